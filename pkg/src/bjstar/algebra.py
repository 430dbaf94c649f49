"""Finite-dimensional C*-algebras as direct sums of matrix blocks over R, C, H.

An element stores one ``(n, n, 4)`` quaternion array per block.  Two derived
views drive the numerics:

* the *realified* view, where a block over a ring of real dimension ``d`` acts
  on ``R^(n d)`` by a real ``(n d) x (n d)`` matrix.  Spectral norms, top
  singular subspaces and the real pairing ``Re y* x`` all survive this map.
* the *coordinate* view, a flat real vector listing the allowed components of
  every entry.  The trace pairing ``Re tr(Y* X)`` becomes the dot product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .scalars import (
    FieldTag,
    RingTag,
    UNITS,
    left_mult_matrix,
    qabs,
    qadjoint,
    qconj,
    qmatmul,
    qmul,
)

DEFAULT_TOL = 1e-8


class InvalidElement(ValueError):
    """Raised when an element violates ring or shape invariants."""


class SVDConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class AlgebraSignature:
    field: FieldTag
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "field", FieldTag(self.field))
        object.__setattr__(
            self, "blocks", tuple((int(n), RingTag(r)) for n, r in self.blocks)
        )

    @classmethod
    def of(cls, field, *blocks) -> "AlgebraSignature":
        """``AlgebraSignature.of("R", (2, "R"), (1, "H"))``."""
        return cls(FieldTag(field), tuple(blocks))

    def problems(self) -> list:
        out = []
        if not self.blocks:
            out.append("empty block list")
        for k, (n, r) in enumerate(self.blocks):
            if n < 1:
                out.append(f"block {k}: size {n} < 1")
            if self.field is FieldTag.C and r is not RingTag.C:
                out.append(f"block {k}: ring {r.value} not allowed over a complex field")
        return out

    @property
    def block_dims(self) -> list:
        """Real dimension of each block."""
        return [n * n * r.dim for n, r in self.blocks]

    @property
    def real_dimension(self) -> int:
        return sum(self.block_dims)

    @property
    def dimension(self) -> int:
        """Dimension over the base field."""
        if self.field is FieldTag.C:
            return self.real_dimension // 2
        return self.real_dimension

    @property
    def vector_dims(self) -> list:
        """Real dimension of the column space ``K^n`` of each block."""
        return [n * r.dim for n, r in self.blocks]

    @cached_property
    def coord_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.block_dims)]).astype(int)

    @cached_property
    def vector_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.vector_dims)]).astype(int)

    def sub(self, indices: Sequence[int]) -> "AlgebraSignature":
        return AlgebraSignature(self.field, tuple(self.blocks[k] for k in indices))

    def __str__(self):
        parts = [f"M{n}({r.value})" for n, r in self.blocks]
        return f"{self.field.value}: " + " + ".join(parts)


def _check_block(k, n, ring, arr):
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (n, n, 4):
        raise InvalidElement(f"block {k}: shape {arr.shape}, expected {(n, n, 4)}")
    if not np.all(np.isfinite(arr)):
        raise InvalidElement(f"block {k}: non-finite entry")
    bad = np.argwhere(arr[..., ring.dim :] != 0.0)
    if bad.size:
        s, t = bad[0][:2]
        raise InvalidElement(
            f"block {k}: entry ({s}, {t}) has components outside ring {ring.value}"
        )
    return arr


@dataclass(frozen=True, eq=False)
class Element:
    """A = A_1 + ... + A_l with one quaternion-valued matrix per block."""

    signature: AlgebraSignature
    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) != len(self.signature.blocks):
            raise InvalidElement("number of blocks does not match the signature")
        checked = tuple(
            _check_block(k, n, r, b)
            for k, ((n, r), b) in enumerate(zip(self.signature.blocks, self.blocks))
        )
        for b in checked:
            b.setflags(write=False)
        object.__setattr__(self, "blocks", checked)

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, sig: AlgebraSignature) -> "Element":
        return cls(sig, tuple(np.zeros((n, n, 4)) for n, _ in sig.blocks))

    @classmethod
    def from_coords(cls, sig: AlgebraSignature, v) -> "Element":
        v = np.asarray(v, dtype=float)
        if v.shape != (sig.real_dimension,):
            raise InvalidElement("coordinate vector has the wrong length")
        blocks = []
        off = sig.coord_offsets
        for k, (n, r) in enumerate(sig.blocks):
            b = np.zeros((n, n, 4))
            b[..., : r.dim] = v[off[k] : off[k + 1]].reshape(n, n, r.dim)
            blocks.append(b)
        return cls(sig, tuple(blocks))

    @classmethod
    def from_blocks(cls, sig: AlgebraSignature, mats) -> "Element":
        """Build from per-block real, complex or (n, n, 4) arrays."""
        blocks = []
        for (n, r), m in zip(sig.blocks, mats):
            m = np.asarray(m)
            if m.ndim == 3:
                blocks.append(np.array(m, dtype=float))
                continue
            m = np.atleast_2d(m)
            b = np.zeros((n, n, 4))
            b[..., 0] = m.real
            if np.iscomplexobj(m):
                b[..., 1] = m.imag
            blocks.append(b)
        return cls(sig, tuple(blocks))

    @classmethod
    def random(cls, sig: AlgebraSignature, rng) -> "Element":
        return cls.from_coords(sig, rng.standard_normal(sig.real_dimension))

    # views ------------------------------------------------------------------

    @cached_property
    def coords(self) -> np.ndarray:
        out = np.concatenate(
            [b[..., : r.dim].ravel() for (n, r), b in zip(self.signature.blocks, self.blocks)]
        ) if self.blocks else np.zeros(0)
        out.setflags(write=False)
        return out

    @cached_property
    def real_blocks(self) -> tuple:
        """Realified matrix of each block acting on R^(n d)."""
        out = []
        for (n, r), b in zip(self.signature.blocks, self.blocks):
            d = r.dim
            L = left_mult_matrix(b, d)  # (n, n, d, d)
            out.append(L.transpose(0, 2, 1, 3).reshape(n * d, n * d))
        return tuple(out)

    @cached_property
    def complex_blocks(self) -> tuple:
        """Complex matrices ``w + i x`` (meaningful for R and C blocks)."""
        return tuple(b[..., 0] + 1j * b[..., 1] for b in self.blocks)

    # arithmetic -------------------------------------------------------------

    def _same(self, other: "Element"):
        if other.signature != self.signature:
            raise ValueError("signature mismatch")

    def __add__(self, other: "Element") -> "Element":
        self._same(other)
        return Element(self.signature, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "Element") -> "Element":
        self._same(other)
        return Element(self.signature, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self) -> "Element":
        return Element(self.signature, tuple(-a for a in self.blocks))

    def __mul__(self, t) -> "Element":
        """Multiply by a base-field scalar (real, or complex when F = C)."""
        if isinstance(t, complex) or np.iscomplexobj(t):
            t = complex(t)
            q = np.array([t.real, t.imag, 0.0, 0.0])
            return self.left_scale(q)
        return Element(self.signature, tuple(float(t) * a for a in self.blocks))

    __rmul__ = __mul__

    def left_scale(self, q) -> "Element":
        """q * A entrywise, for a quaternion q valid in every block."""
        q = np.asarray(q, dtype=float)
        return Element(self.signature, tuple(qmul(q, b) for b in self.blocks))

    def right_scale(self, q) -> "Element":
        q = np.asarray(q, dtype=float)
        return Element(self.signature, tuple(qmul(b, q) for b in self.blocks))

    def adjoint(self) -> "Element":
        return Element(self.signature, tuple(qadjoint(b) for b in self.blocks))

    def block_only(self, k: int) -> "Element":
        """Keep block k, zero the others."""
        return Element(
            self.signature,
            tuple(b if i == k else np.zeros_like(b) for i, b in enumerate(self.blocks)),
        )

    def with_block(self, k: int, mat) -> "Element":
        blocks = list(self.blocks)
        blocks[k] = np.asarray(mat, dtype=float)
        return Element(self.signature, tuple(blocks))

    def dot(self, other: "Element") -> float:
        """Real trace pairing Re tr(B* A)."""
        self._same(other)
        return float(self.coords @ other.coords)

    def fro(self) -> float:
        return float(np.linalg.norm(self.coords))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.fro() <= tol

    def block_norms(self) -> np.ndarray:
        return np.array([_top_sv(m) for m in self.real_blocks])

    def norm(self) -> float:
        return spectral_norm(self)

    def apply(self, x) -> np.ndarray:
        """Apply to a realified column vector of the whole space."""
        off = self.signature.vector_offsets
        return np.concatenate(
            [m @ x[off[k] : off[k + 1]] for k, m in enumerate(self.real_blocks)]
        )

    def __repr__(self):
        return f"Element({self.signature}, norm={self.norm():.6g})"


def _top_sv(m) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def validate(e: Element) -> Optional[str]:
    """None when ``e`` satisfies every invariant, else a diagnostic string."""
    probs = e.signature.problems()
    if probs:
        return "; ".join(probs)
    for k, ((n, r), b) in enumerate(zip(e.signature.blocks, e.blocks)):
        try:
            _check_block(k, n, r, b)
        except InvalidElement as exc:
            return str(exc)
    return None


def validate_blocks(sig: AlgebraSignature, blocks) -> Optional[str]:
    """Diagnostic for raw block arrays before an Element is built."""
    probs = sig.problems()
    if probs:
        return "; ".join(probs)
    if len(blocks) != len(sig.blocks):
        return "number of blocks does not match the signature"
    for k, ((n, r), b) in enumerate(zip(sig.blocks, blocks)):
        try:
            _check_block(k, n, r, b)
        except InvalidElement as exc:
            return str(exc)
    return None


def matrix_unit(sig: AlgebraSignature, block: int, s: int, t: int, mu=None) -> Element:
    """mu * E_st placed in the given block, zero elsewhere (0-based indices)."""
    if not 0 <= block < len(sig.blocks):
        raise IndexError(f"block {block} out of range")
    n, r = sig.blocks[block]
    if not (0 <= s < n and 0 <= t < n):
        raise IndexError(f"position ({s}, {t}) out of range for size {n}")
    mu = UNITS[0] if mu is None else np.asarray(mu, dtype=float)
    if abs(qabs(mu) - 1.0) > 1e-12:
        raise ValueError("mu must be unimodular")
    if np.any(mu[r.dim :] != 0.0):
        raise ValueError(f"mu is not an element of {r.value}")
    e = Element.zeros(sig)
    b = np.zeros((n, n, 4))
    b[s, t] = mu
    return e.with_block(block, b)


# -- quaternion linear algebra ----------------------------------------------


def quat_complex_adjoint(m) -> np.ndarray:
    """Complex 2n x 2n image [[M1, M2], [-conj M2, conj M1]] of M = M1 + M2 j."""
    m = np.asarray(m, dtype=float)
    m1 = m[..., 0] + 1j * m[..., 1]
    m2 = m[..., 2] + 1j * m[..., 3]
    return np.block([[m1, m2], [-m2.conj(), m1.conj()]])


def complex_to_quat_vector(c) -> np.ndarray:
    """Quaternion vector v with adjoint image [v1; -conj v2] equal to c."""
    c = np.asarray(c)
    n = c.shape[0] // 2
    a, b = c[:n], -c[n:].conj()
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def quat_to_complex_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    a = v[:, 0] + 1j * v[:, 1]
    b = v[:, 2] + 1j * v[:, 3]
    return np.concatenate([a, -b.conj()])


def qvec_inner(x, y) -> np.ndarray:
    """y* x for quaternion vectors shaped (n, 4)."""
    return qmul(qconj(y), x).sum(axis=0)


def realify_vector(v, ring: RingTag) -> np.ndarray:
    return np.asarray(v, dtype=float)[:, : ring.dim].ravel()


def unrealify_vector(x, ring: RingTag) -> np.ndarray:
    d = ring.dim
    n = len(x) // d
    out = np.zeros((n, 4))
    out[:, :d] = np.asarray(x).reshape(n, d)
    return out


def realify_span(basis, ring: RingTag) -> np.ndarray:
    """Real orthonormal columns spanning the right K-span of K-orthonormal columns.

    ``basis`` has shape (n, m, 4); the result has shape (n d, m d).
    """
    basis = np.asarray(basis, dtype=float)
    n, m = basis.shape[:2]
    cols = []
    for c in range(m):
        for u in range(ring.dim):
            cols.append(realify_vector(qmul(basis[:, c], UNITS[u]), ring))
    if not cols:
        return np.zeros((n * ring.dim, 0))
    return np.stack(cols, axis=1)


def _quat_pivoted_gram_schmidt(cands, k, tol=1e-6):
    """Pick k quaternion-orthonormal vectors from candidate columns (n, c, 4)."""
    accepted = []
    cands = [np.array(cands[:, c]) for c in range(cands.shape[1])]
    while len(accepted) < k and cands:
        resid = []
        for v in cands:
            r = v.copy()
            for a in accepted:
                r = r - qmul(a, qvec_inner(r, a))
            resid.append(r)
        norms = [np.linalg.norm(r) for r in resid]
        best = int(np.argmax(norms))
        if norms[best] < tol:
            break
        accepted.append(resid[best] / norms[best])
        cands.pop(best)
    return accepted


@dataclass(frozen=True)
class BlockSVD:
    """Singular values (descending) and K-orthonormal right singular vectors.

    ``right`` has shape (n, n, 4); column c pairs with ``singular_values[c]``.
    """

    singular_values: np.ndarray
    right: np.ndarray
    ring: RingTag


def block_svd(m, ring: RingTag, tol: float = DEFAULT_TOL) -> BlockSVD:
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    try:
        if ring is RingTag.H:
            return _quat_svd(m, tol)
        if ring is RingTag.R:
            _, s, vh = np.linalg.svd(m[..., 0])
            right = np.zeros((n, n, 4))
            right[..., 0] = vh.T
            return BlockSVD(s, right, ring)
        _, s, vh = np.linalg.svd(m[..., 0] + 1j * m[..., 1])
        v = vh.conj().T
        right = np.zeros((n, n, 4))
        right[..., 0] = v.real
        right[..., 1] = v.imag
        return BlockSVD(s, right, ring)
    except np.linalg.LinAlgError as exc:
        raise SVDConvergenceError(str(exc)) from exc


def _quat_svd(m, tol):
    n = m.shape[0]
    chi = quat_complex_adjoint(m)
    _, s2, vh = np.linalg.svd(chi)
    v = vh.conj().T
    smax = s2[0] if s2.size else 0.0
    pair_gap = np.abs(s2[0::2] - s2[1::2])
    if np.any(pair_gap > max(tol * smax, 1e-300) + 1e-14 * smax):
        raise SVDConvergenceError(
            f"adjoint singular values do not pair up (gap {pair_gap.max():.3g})"
        )
    s = 0.5 * (s2[0::2] + s2[1::2])
    qcols = np.stack([complex_to_quat_vector(v[:, c]) for c in range(2 * n)], axis=1)
    # clusters of (numerically) equal quaternionic singular values
    right = np.zeros((n, n, 4))
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and s[start] - s[stop] <= tol * max(smax, 1e-300):
            stop += 1
        picked = _quat_pivoted_gram_schmidt(qcols[:, 2 * start : 2 * stop], stop - start)
        if len(picked) != stop - start:
            raise SVDConvergenceError("could not assemble quaternionic singular vectors")
        for c, vec in enumerate(picked):
            right[:, start + c] = vec
        start = stop
    return BlockSVD(s, right, RingTag.H)


def spectral_norm(a: Element) -> float:
    """max over blocks of the top singular value."""
    if not a.blocks:
        return 0.0
    return float(max(_top_sv(m) for m in a.real_blocks))


@dataclass(frozen=True)
class M0Subspace:
    """Vectors on which an element attains its norm.

    ``bases[k]`` is an (n_k, m_k, 4) K-orthonormal basis of the top right
    singular subspace of block k (empty for blocks that do not attain).
    """

    signature: AlgebraSignature
    attaining: tuple
    bases: tuple
    tol: float
    zero_element: bool = False

    def dim_K(self, k: int) -> int:
        return self.bases[k].shape[1]

    @cached_property
    def real_basis(self) -> np.ndarray:
        """Orthonormal real columns in the realified space (+ K^{n_k})."""
        sig = self.signature
        off = sig.vector_offsets
        cols = []
        for k, (n, r) in enumerate(sig.blocks):
            loc = realify_span(self.bases[k], r)
            full = np.zeros((off[-1], loc.shape[1]))
            full[off[k] : off[k + 1]] = loc
            cols.append(full)
        return np.concatenate(cols, axis=1) if cols else np.zeros((0, 0))

    @cached_property
    def complex_basis(self) -> np.ndarray:
        """Orthonormal complex columns in + C^{n_k} (complex field only)."""
        sig = self.signature
        sizes = [n for n, _ in sig.blocks]
        off = np.concatenate([[0], np.cumsum(sizes)])
        cols = []
        for k, b in enumerate(self.bases):
            loc = b[..., 0] + 1j * b[..., 1]
            full = np.zeros((off[-1], loc.shape[1]), dtype=complex)
            full[off[k] : off[k + 1]] = loc
            cols.append(full)
        return np.concatenate(cols, axis=1) if cols else np.zeros((0, 0), dtype=complex)

    @property
    def real_dim(self) -> int:
        return int(self.real_basis.shape[1])


def m0_subspace(a: Element, tol: float = DEFAULT_TOL) -> M0Subspace:
    sig = a.signature
    norm = spectral_norm(a)
    if norm == 0.0:
        bases = tuple(_identity_basis(n) for n, _ in sig.blocks)
        return M0Subspace(sig, tuple(range(len(sig.blocks))), bases, tol, zero_element=True)
    attaining = []
    bases = []
    for k, ((n, r), b) in enumerate(zip(sig.blocks, a.blocks)):
        svd = block_svd(b, r, tol)
        if svd.singular_values[0] < (1.0 - tol) * norm:
            bases.append(np.zeros((n, 0, 4)))
            continue
        attaining.append(k)
        keep = svd.singular_values >= (1.0 - tol) * norm
        bases.append(svd.right[:, keep])
    return M0Subspace(sig, tuple(attaining), tuple(bases), tol)


def _identity_basis(n):
    out = np.zeros((n, n, 4))
    out[np.arange(n), np.arange(n), 0] = 1.0
    return out


def quat_matrix_product(a: Element, b: Element) -> Element:
    """Blockwise product A B."""
    a._same(b)
    return Element(a.signature, tuple(qmatmul(x, y) for x, y in zip(a.blocks, b.blocks)))


def outer(x, y) -> np.ndarray:
    """The rank-one quaternion matrix x y* for vectors shaped (n, 4)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return qmul(x[:, None, :], qconj(y)[None, :, :])


def block_mask(sig: AlgebraSignature, keep: Sequence[int]) -> np.ndarray:
    """Boolean mask over coordinates selecting the listed blocks."""
    mask = np.zeros(sig.real_dimension, dtype=bool)
    off = sig.coord_offsets
    for k in keep:
        mask[off[k] : off[k + 1]] = True
    return mask
