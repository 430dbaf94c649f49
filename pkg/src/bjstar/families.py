"""Explicit constructions on 2x2 and n x n single-block algebras.

* closed-form norms and norm-attaining vectors of the two 2x2 families
  ``[[0, a], [b, q]]`` and ``[[0, q], [b, a]]``;
* the corner-constrained subspaces ``corner_free`` (top-left entry zero) and
  ``corner_restricted`` (top-left entry in a given scalar subspace);
* ``technical1_counterexample``: for A in a corner-restricted subspace, a B in
  the same subspace with A perp B but not B perp A;
* ``unimodular_family_check``: the equivalence between a pairing vanishing
  for every unimodular multiplier and two exact pairing conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space, orth

from .algebra import (
    AlgebraSignature,
    Element,
    m0_subspace,
    outer,
    realify_span,
    spectral_norm,
    unrealify_vector,
)
from .oracle import DEFAULT, Config, bj_orthogonal, bj_orthogonal_direct
from .scalars import UNITS, FieldTag, RingTag, qabs, qconj, qmatvec, qmul
from .subspace import FSubspace

# -- closed-form norms -------------------------------------------------------


def _sq(q) -> float:
    return float(np.sum(np.asarray(q, dtype=float) ** 2))


def corner_family_matrix(a, b, q, second: bool = False) -> np.ndarray:
    """[[0, a], [b, q]] (or [[0, q], [b, a]] when ``second``) as a (2, 2, 4) array."""
    m = np.zeros((2, 2, 4))
    m[0, 1] = q if second else a
    m[1, 0] = b
    m[1, 1] = a if second else q
    return m


def corner_family_norm(a, b, second: bool = False) -> float:
    """Closed-form spectral norm of the corner family with unimodular q."""
    aa, bb = _sq(a), _sq(b)
    s = aa + bb + 1.0
    cross = 4.0 * bb if second else 4.0 * aa * bb
    return float(np.sqrt((np.sqrt(s * s - cross) + s) / 2.0))


def corner_family_attaining_vector(a, b, q, second: bool = False) -> np.ndarray:
    """Documented norm-attaining vector, shape (2, 4).

    First family: (q lam, conj(q) b q); second: (a lam, conj(a) b a), with
    lam = ||B||^2 - 1 - |a|^2.
    """
    a, b, q = (np.asarray(v, dtype=float) for v in (a, b, q))
    lam = corner_family_norm(a, b, second) ** 2 - 1.0 - _sq(a)
    p = a if second else q
    return np.stack([lam * p, qmul(qmul(qconj(p), b), p)])


# -- corner-constrained subspaces -------------------------------------------


def scalar_subspace_basis(ring: RingTag, field: FieldTag, spanning=()) -> np.ndarray:
    """Orthonormal real basis (d, r) of the F-span of the given scalars."""
    d = ring.dim
    cols = []
    for v in spanning:
        v = np.asarray(v, dtype=float)
        if np.any(v[d:] != 0.0):
            raise ValueError(f"scalar {v} is not in {ring.value}")
        cols.append(v[:d])
        if field is FieldTag.C:
            cols.append(qmul(UNITS[1], v)[:d])
    if not cols:
        return np.zeros((d, 0))
    return orth(np.stack(cols, axis=1), rcond=1e-10)


def corner_restricted(n: int, ring: RingTag, field: FieldTag = FieldTag.R, corner=()) -> FSubspace:
    """{X in M_n(K) : X_11 in span(corner)}, as a subspace of one-block algebra."""
    sig = AlgebraSignature.of(field, (n, ring))
    d = ring.dim
    vb = scalar_subspace_basis(ring, field, corner)
    total = sig.real_dimension
    cols = [np.eye(total)[:, d:]]
    if vb.shape[1]:
        head = np.zeros((total, vb.shape[1]))
        head[:d] = vb
        cols.insert(0, head)
    return FSubspace(sig, np.concatenate(cols, axis=1))


def corner_free(ring: RingTag, field: FieldTag = FieldTag.R) -> FSubspace:
    """[[0, K], [K, K]] inside M_2(K)."""
    return corner_restricted(2, ring, field, ())


# -- counterexamples ---------------------------------------------------------


class ExcludedCase(ValueError):
    """n = 2 with zero corner subspace, where left-symmetric elements exist."""


class CounterexampleNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class PairCheck:
    """Margins of A perp B and B perp A from both oracle routes."""

    forward: tuple  # (criterion, direct) margins of A perp B
    backward: tuple  # (criterion, direct) margins of B perp A

    def confirms(self, cfg: Config = DEFAULT, strict: float | None = None) -> bool:
        strict = cfg.tol if strict is None else strict
        closed = -10.0 * cfg.eps_ortho
        return min(self.forward) >= closed and max(self.backward) <= -strict


def check_pair(a: Element, b: Element, cfg: Config = DEFAULT) -> PairCheck:
    fwd = (bj_orthogonal(a, b, cfg).margin, bj_orthogonal_direct(a, b, cfg).margin)
    bwd = (bj_orthogonal(b, a, cfg).margin, bj_orthogonal_direct(b, a, cfg).margin)
    return PairCheck(fwd, bwd)


def _k_complement(vectors, n: int, ring: RingTag) -> np.ndarray:
    """Real orthonormal basis of the K-orthogonal complement of vectors (n, m, 4)."""
    if vectors.shape[1] == 0:
        return np.eye(n * ring.dim)
    return null_space(realify_span(vectors, ring).T, rcond=1e-10)


def multi_attaining_candidates(a_block, basis, ring):
    """B = (A x) x* with x in M0(A), x_1 = 0, picked canonically."""
    n, m = basis.shape[:2]
    if m < 2:
        return []
    d = ring.dim
    span = realify_span(basis, ring)
    first_row = span[:d]
    sub = span @ null_space(first_row, rcond=1e-10) if first_row.any() else span
    if sub.shape[1] == 0:
        return []
    proj = sub @ sub.T
    out = []
    for i in range(1, n):
        e = np.zeros(n * d)
        e[i * d] = 1.0
        v = proj @ e
        if np.linalg.norm(v) > 1e-6:
            out.append(v / np.linalg.norm(v))
    out.append(sub[:, 0])
    mats = []
    for v in out:
        x = unrealify_vector(v, ring)
        mats.append(outer(qmatvec(a_block, x), x))
    return mats


def rank_one_candidates(a_block, basis, ring, corner_basis):
    """B = y z* with z K-orthogonal to M0(A) and y its best admissible image.

    Any such B annihilates M0(A), so A perp B.  The corner entry of B is
    y_1 conj(z_1), kept inside the corner subspace by projecting A z.
    """
    n = a_block.shape[0]
    d = ring.dim
    comp = _k_complement(basis, n, ring)
    if comp.shape[1] == 0:
        return []
    zs = []
    ar = _realified(a_block, ring)
    # z maximizing ||A z|| with z_1 = 0, then over the whole complement
    head_free = comp @ null_space(comp[:d], rcond=1e-10) if comp[:d].any() else comp
    for w in (head_free, comp):
        if w.shape[1]:
            _, s, vh = np.linalg.svd(ar @ w)
            zs.append(w @ vh[0])
    zs.extend(comp.T)
    mats = []
    for zr in zs:
        z = unrealify_vector(zr, ring)
        az = qmatvec(a_block, z)
        y = az.copy()
        y[0] = _admissible_head(az[0], z[0], ring, corner_basis)
        if np.linalg.norm(y) < 1e-8:
            continue
        mats.append(outer(y, z))
    return mats


def _admissible_head(t, z1, ring, corner_basis):
    """Nearest s to t with s conj(z1) in the corner subspace."""
    d = ring.dim
    if qabs(z1) < 1e-14:
        return t
    # s -> s conj(z1) is |z1| times an isometry; pull the corner basis back
    inv = qconj(z1) / qabs(z1) ** 2
    back = []
    for c in corner_basis.T:
        v = np.zeros(4)
        v[:d] = c
        back.append(qmul(v, qconj(inv))[:d])
    if not back:
        return np.zeros(4)
    q = orth(np.stack(back, axis=1), rcond=1e-10)
    s = np.zeros(4)
    s[:d] = q @ (q.T @ t[:d])
    return s


def _realified(block, ring):
    from .scalars import left_mult_matrix

    n = block.shape[0]
    d = ring.dim
    return left_mult_matrix(block, d).transpose(0, 2, 1, 3).reshape(n * d, n * d)


def technical1_counterexample(
    a: Element,
    corner=(),
    cfg: Config = DEFAULT,
    rng=None,
    samples: int = 2000,
) -> Element:
    """B in the corner-restricted subspace with A perp B and not B perp A.

    ``corner`` spans the F-subspace allowed in the top-left entry.  Strategies,
    in order: B = (A x) x* for x in M0(A) with x_1 = 0 (needs dim_K M0 >= 2);
    rank-one B = y z* with z K-orthogonal to M0(A); random elements of the
    subspace orthogonal to A.  Candidates are kept only when both oracle routes
    confirm them.  Raises ``ExcludedCase`` for n = 2 with zero corner when
    nothing is found (left-symmetric elements such as E_22 live there) and
    ``CounterexampleNotFound`` otherwise.
    """
    sig = a.signature
    if len(sig.blocks) != 1:
        raise ValueError("expected a single-block algebra")
    n, ring = sig.blocks[0]
    space = corner_restricted(n, ring, sig.field, corner)
    if a.is_zero() or not space.contains(a):
        raise ValueError("A must be a nonzero member of the corner-restricted subspace")
    corner_basis = scalar_subspace_basis(ring, sig.field, corner)
    an = a * (1.0 / spectral_norm(a))
    block = an.blocks[0]
    basis = m0_subspace(an, cfg.tol).bases[0]

    cands = multi_attaining_candidates(block, basis, ring) + rank_one_candidates(block, basis, ring, corner_basis)
    for mat in cands:
        b = Element.from_blocks(sig, [mat])
        if space.contains(b) and check_pair(an, b, cfg).confirms(cfg):
            return b

    b = _search_random(an, space, cfg, rng, samples)
    if b is not None:
        return b
    if n == 2 and corner_basis.shape[1] == 0:
        raise ExcludedCase("n = 2 with zero corner subspace: no counterexample found")
    raise CounterexampleNotFound("no confirmed counterexample")


def _search_random(a, space, cfg, rng, samples):
    from . import batch

    rng = np.random.default_rng(0) if rng is None else rng
    coords, _ = batch.sample_orthogonal_batch(a, space, rng, samples, cfg)
    m = batch.margins(a.signature, coords, a.coords, cfg)
    for i in np.argsort(m)[:5]:
        if m[i] > -cfg.tol:
            break
        b = Element.from_coords(a.signature, coords[i])
        if check_pair(a, b, cfg).confirms(cfg):
            return b
    return None


# -- unimodular family identity ---------------------------------------------


def unimodular_grid(ring: RingTag, count: int = 64) -> np.ndarray:
    """Deterministic unimodular multipliers of ``ring``, shape (m, 4).

    R: {1, -1}.  C: ``count`` roots of unity.  H: the eight axis units
    followed by a fixed pseudo-random spread on the 3-sphere.
    """
    if ring is RingTag.R:
        return np.array([UNITS[0], -UNITS[0]])
    if ring is RingTag.C:
        t = 2.0 * np.pi * np.arange(count) / count
        g = np.zeros((count, 4))
        g[:, 0], g[:, 1] = np.cos(t), np.sin(t)
        return g
    axes = np.concatenate([UNITS, -UNITS])
    extra = max(count - 8, 0)
    g = np.random.default_rng(20240601).standard_normal((extra, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.concatenate([axes, g])


def _pair_F(v, z, field: FieldTag):
    """<v, z>_F = z* v, real part only when F = R."""
    s = qmul(qconj(z), v).sum(axis=-2)
    return s[..., 0] if field is FieldTag.R else s[..., 0] + 1j * s[..., 1]


def unimodular_family_check(x, y, z, ring: RingTag, field: FieldTag = FieldTag.R, grid: int = 64, tol: float = 1e-9):
    """(left, right) truth values of the unimodular family equivalence.

    left: <x + y mu, z>_F vanishes for every mu on the grid.
    right: <x, z>_F = 0 and <y, z>_K = 0.
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    if not (x.shape == y.shape == z.shape):
        raise ValueError("length mismatch")
    if field is FieldTag.C and ring is not RingTag.C:
        raise ValueError("complex field requires complex entries")
    mus = unimodular_grid(ring, grid)
    vals = _pair_F(x[None] + qmul(y[None], mus[:, None, :]), z[None], field)
    left = bool(np.max(np.abs(vals)) <= tol)
    xz = _pair_F(x, z, field)
    yz = qmul(qconj(z), y).sum(axis=0)
    right = bool(abs(xz) <= tol and np.linalg.norm(yz) <= tol)
    return left, right


def random_family_triple(n: int, ring: RingTag, field: FieldTag, rng, kind: int | None = None):
    """Random (x, y, z) with a chosen pattern of vanishing pairings.

    kind 0: generic; 1: <x, z>_F = 0 only; 2: <y, z>_K = 0 only; 3: both;
    4: <x, z>_F = 0 and Re <y, z>_K = 0 but <y, z>_K != 0 (C and H only).
    """
    d = ring.dim
    kind = int(rng.integers(5)) if kind is None else kind

    def vec():
        v = np.zeros((n, 4))
        v[:, :d] = rng.standard_normal((n, d))
        return v

    x, y, z = vec(), vec(), vec()
    zz = _sq(z)
    if kind in (2, 3):
        y = y - qmul(z, qmul(qconj(z), y).sum(axis=0)) / zz
    if kind in (1, 3, 4):
        xz = qmul(qconj(z), x).sum(axis=0)
        keep = xz.copy()
        keep[0] = 0.0
        if field is FieldTag.C:
            keep[1] = 0.0
        x = x - qmul(z, xz - keep) / zz
    if kind == 4 and ring is not RingTag.R:
        yz = qmul(qconj(z), y).sum(axis=0)
        y = y - qmul(z, np.array([yz[0], 0.0, 0.0, 0.0])) / zz
        if field is FieldTag.C:
            y = y - qmul(z, np.array([0.0, yz[1], 0.0, 0.0])) / zz
    return x, y, z
