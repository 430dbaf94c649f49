"""Haar unitaries over R, C, H and the BJ-isomorphisms they induce.

A ``BJIso`` acts blockwise by X -> U X V* (optionally on X* instead) and then
permutes blocks of equal shape.  These maps are real-linear isometries of the
spectral norm, hence preserve Birkhoff-James orthogonality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import AlgebraSignature, Element, _quat_pivoted_gram_schmidt, quat_complex_adjoint
from .scalars import FieldTag, RingTag, qadjoint, qmatmul


def _haar_square(n: int, ring: RingTag, rng) -> np.ndarray:
    d = ring.dim
    g = np.zeros((n, n, 4))
    g[..., :d] = rng.standard_normal((n, n, d))
    if ring is RingTag.H:
        cols = _quat_pivoted_gram_schmidt(g, n, tol=1e-12)
        if len(cols) < n:
            raise np.linalg.LinAlgError("degenerate Gaussian draw")
        # pivoting permutes columns; Haar measure is permutation invariant
        return np.stack(cols, axis=1)
    m = g[..., 0] + 1j * g[..., 1] if ring is RingTag.C else g[..., 0]
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))[None, :]
    out = np.zeros((n, n, 4))
    out[..., 0] = q.real
    if ring is RingTag.C:
        out[..., 1] = q.imag
    return out


def random_unitary(n: int, ring: RingTag, rng, fix_e1: bool = False) -> np.ndarray:
    """Haar-distributed unitary over ``ring`` as an (n, n, 4) array.

    With ``fix_e1`` the result is 1 (+) U' with U' Haar of size n-1, so the
    first basis vector is fixed exactly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not fix_e1:
        return _haar_square(n, ring, rng)
    out = np.zeros((n, n, 4))
    out[0, 0, 0] = 1.0
    if n > 1:
        out[1:, 1:] = _haar_square(n - 1, ring, rng)
    return out


def unitarity_defect(u: np.ndarray) -> float:
    """||chi(U)* chi(U) - I|| through the complex adjoint image."""
    c = quat_complex_adjoint(u)
    return float(np.linalg.norm(c.conj().T @ c - np.eye(c.shape[0]), 2))


def _identity(n):
    out = np.zeros((n, n, 4))
    out[np.arange(n), np.arange(n), 0] = 1.0
    return out


@dataclass(frozen=True, eq=False)
class BJIso:
    """X -> block pi(k) of the result is U_k op_k(X_k) V_k*, op_k = id or adjoint."""

    signature: AlgebraSignature
    left: tuple
    right: tuple
    adjoint: tuple
    perm: tuple
    description: str = ""

    @classmethod
    def identity(cls, sig: AlgebraSignature) -> "BJIso":
        us = tuple(_identity(n) for n, _ in sig.blocks)
        k = len(sig.blocks)
        return cls(sig, us, us, (False,) * k, tuple(range(k)), "identity")

    def apply(self, e: Element) -> Element:
        if e.signature != self.signature:
            raise ValueError("signature mismatch")
        out = [None] * len(self.perm)
        for k, b in enumerate(e.blocks):
            x = qadjoint(b) if self.adjoint[k] else b
            out[self.perm[k]] = qmatmul(qmatmul(self.left[k], x), qadjoint(self.right[k]))
        return Element(self.signature, tuple(out))

    __call__ = apply

    @cached_property
    def matrix(self) -> np.ndarray:
        """Real matrix of the map on coordinates (orthogonal)."""
        sig = self.signature
        eye = np.eye(sig.real_dimension)
        cols = [self.apply(Element.from_coords(sig, c)).coords for c in eye]
        return np.stack(cols, axis=1) if cols else np.zeros((0, 0))

    def apply_coords(self, coords) -> np.ndarray:
        return np.asarray(coords) @ self.matrix.T

    def pull_back_coords(self, coords) -> np.ndarray:
        """Preimage coordinates (the matrix is orthogonal)."""
        return np.asarray(coords) @ self.matrix

    def is_identity(self, tol: float = 0.0) -> bool:
        return bool(np.linalg.norm(self.matrix - np.eye(len(self.matrix))) <= tol)


def random_bj_isomorphism(sig: AlgebraSignature, rng, adjoint: bool = True, permute: bool = True) -> BJIso:
    """Independent Haar pairs per block, adjoint flags, and a shape-preserving permutation.

    Over F = C a single adjoint flag is shared by every block: the adjoint is
    conjugate-linear, and mixing it with linear blocks would break the complex
    structure that the orthogonality relation depends on.
    """
    left = tuple(random_unitary(n, r, rng) for n, r in sig.blocks)
    right = tuple(random_unitary(n, r, rng) for n, r in sig.blocks)
    k = len(sig.blocks)
    if not adjoint:
        flags = (False,) * k
    elif sig.field is FieldTag.C:
        flags = (bool(rng.integers(2)),) * k
    else:
        flags = tuple(bool(b) for b in rng.integers(2, size=k))
    perm = list(range(k))
    if permute:
        groups = {}
        for i, shape in enumerate(sig.blocks):
            groups.setdefault(shape, []).append(i)
        for idx in groups.values():
            shuffled = list(rng.permutation(idx))
            for src, dst in zip(idx, shuffled):
                perm[src] = int(dst)
    desc = f"unitary pairs, adjoint={list(flags)}, perm={perm}"
    return BJIso(sig, left, right, flags, tuple(perm), desc)
