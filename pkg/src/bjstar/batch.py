"""Vectorized criterion evaluation for many elements at once.

Used by the sampling-heavy procedures (left-symmetry testing, structure
recovery).  Elements are represented by rows of realified coordinates; the
whole algebra acts on one space through a block-diagonal operator, so the top
singular subspace of that operator is exactly M0 of the element.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .algebra import AlgebraSignature, Element
from .oracle import DEFAULT, Config, zero_in_numrange_complex
from .scalars import FieldTag
from .subspace import FSubspace


@lru_cache(maxsize=64)
def basis_operators(sig: AlgebraSignature) -> np.ndarray:
    """Operator of every coordinate unit: realified (F=R) or complex (F=C)."""
    ncoord = sig.real_dimension
    mats = []
    for c in range(ncoord):
        e = np.zeros(ncoord)
        e[c] = 1.0
        mats.append(_operator(Element.from_coords(sig, e)))
    out = np.stack(mats) if mats else np.zeros((0, 0, 0))
    out.setflags(write=False)
    return out


def _operator(e: Element) -> np.ndarray:
    from scipy.linalg import block_diag

    if e.signature.field is FieldTag.R:
        return block_diag(*e.real_blocks)
    return block_diag(*e.complex_blocks)


def operators(sig: AlgebraSignature, coords) -> np.ndarray:
    coords = np.atleast_2d(coords)
    return np.einsum("tc,cij->tij", coords, basis_operators(sig))


def margins(sig: AlgebraSignature, x_coords, y_coords, cfg: Config = DEFAULT) -> np.ndarray:
    """Criterion margin of X_t perp Y_t for every row t.

    Either argument may be a single row, broadcast against the other.
    """
    xs = operators(sig, x_coords)
    ys = operators(sig, y_coords)
    xs, ys = np.broadcast_arrays(xs, ys)
    t = xs.shape[0]
    out = np.full(t, np.inf)
    _, s, vh = np.linalg.svd(xs)
    top = s[:, 0]
    ynorm = np.linalg.svd(ys, compute_uv=False)[:, 0]
    ok = (top > 0) & (ynorm > 0)
    m = np.sum(s >= (1.0 - cfg.tol) * top[:, None], axis=1)
    for size in np.unique(m[ok]):
        idx = np.nonzero(ok & (m == size))[0]
        q = np.conj(np.swapaxes(vh[idx, :size, :], 1, 2))
        xq = xs[idx] @ q / top[idx, None, None]
        yq = ys[idx] @ q / ynorm[idx, None, None]
        c = np.conj(np.swapaxes(xq, 1, 2)) @ yq
        if sig.field is FieldTag.R:
            sym = 0.5 * (c + np.swapaxes(c, 1, 2))
            ev = np.linalg.eigvalsh(sym)
            out[idx] = np.minimum(-ev[:, 0], ev[:, -1])
        elif size == 1:
            out[idx] = -np.abs(c[:, 0, 0])
        else:
            for r, ci in zip(idx, c):
                out[r] = zero_in_numrange_complex(ci, cfg)[1]
    return out


def witness_normal_rows(sig: AlgebraSignature, a_op, xs) -> np.ndarray:
    """Rows g with g . coords(B) = <A x, B x>_F, shape (T, r, ncoord)."""
    basis = basis_operators(sig)
    ax = xs @ a_op.T  # (T, N)
    if sig.field is FieldTag.R:
        g = np.einsum("ti,cij,tj->tc", ax, basis, xs)
        return g[:, None, :]
    g = np.einsum("ti,cij,tj->tc", np.conj(ax), basis, xs)
    return np.stack([g.real, g.imag], axis=1)


def sample_orthogonal_batch(a: Element, space: FSubspace | None, rng, count: int, cfg: Config = DEFAULT):
    """``count`` random elements B of ``space`` with A perp B (coordinate rows)."""
    from .algebra import m0_subspace, spectral_norm

    sig = a.signature
    space = FSubspace.full(sig) if space is None else space
    an = a * (1.0 / spectral_norm(a))
    m0 = m0_subspace(an, cfg.tol)
    if sig.field is FieldTag.R:
        q = m0.real_basis
        y = rng.standard_normal((count, q.shape[1]))
    else:
        q = m0.complex_basis
        y = rng.standard_normal((count, q.shape[1])) + 1j * rng.standard_normal((count, q.shape[1]))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    xs = y @ q.T
    g = witness_normal_rows(sig, _operator(an), xs)  # (T, r, ncoord)
    w = space.basis
    gw = g @ w  # (T, r, m)
    xi = rng.standard_normal((count, w.shape[1]))
    # remove the component of xi along the row space of gw
    gram = gw @ np.swapaxes(gw, 1, 2)
    rhs = np.einsum("trm,tm->tr", gw, xi)
    coef = np.einsum("trs,ts->tr", np.linalg.pinv(gram, rcond=1e-12, hermitian=True), rhs)
    xi = xi - np.einsum("trm,tr->tm", gw, coef)
    coords = xi @ w.T
    return coords, xs
