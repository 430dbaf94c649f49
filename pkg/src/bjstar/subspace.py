"""F-linear subspaces of an algebra, stored by a real orthonormal basis.

Coordinates are the realified element coordinates, so the trace pairing
``Re tr(Y* X)`` is the Euclidean dot product.  Complex-field subspaces keep
the same representation and only record that they are closed under ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import null_space, orth, subspace_angles

from .algebra import AlgebraSignature, Element, block_mask
from .scalars import FieldTag

RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FSubspace:
    ambient: AlgebraSignature
    basis: np.ndarray  # (N, m) orthonormal columns

    @classmethod
    def full(cls, sig: AlgebraSignature) -> "FSubspace":
        return cls(sig, np.eye(sig.real_dimension))

    @classmethod
    def zero(cls, sig: AlgebraSignature) -> "FSubspace":
        return cls(sig, np.zeros((sig.real_dimension, 0)))

    @classmethod
    def span(cls, sig: AlgebraSignature, vectors, tol: float = RANK_TOL) -> "FSubspace":
        """Span of elements or raw coordinate vectors (columns)."""
        cols = [v.coords if isinstance(v, Element) else np.asarray(v) for v in vectors]
        if not cols:
            return cls.zero(sig)
        m = np.stack(cols, axis=1)
        if sig.field is FieldTag.C:
            m = np.concatenate([m, np.stack([times_i(sig, c) for c in cols], axis=1)], axis=1)
        return cls(sig, _orth(m, tol))

    @classmethod
    def kernel(cls, sig: AlgebraSignature, normals, tol: float = RANK_TOL) -> "FSubspace":
        """{C : <C, g> = 0 for every normal g} (real trace pairing)."""
        normals = [n.coords if isinstance(n, Element) else np.asarray(n) for n in normals]
        if not normals:
            return cls.full(sig)
        g = np.stack(normals, axis=0)
        return cls(sig, _null(g, tol))

    @classmethod
    def blocks_vanishing(cls, sig: AlgebraSignature, blocks) -> "FSubspace":
        """Elements that are zero on every listed block."""
        keep = [k for k in range(len(sig.blocks)) if k not in set(blocks)]
        mask = block_mask(sig, keep)
        return cls(sig, np.eye(sig.real_dimension)[:, mask])

    @classmethod
    def blocks_supported(cls, sig: AlgebraSignature, blocks) -> "FSubspace":
        mask = block_mask(sig, list(blocks))
        return cls(sig, np.eye(sig.real_dimension)[:, mask])

    # ------------------------------------------------------------------

    @property
    def field(self) -> FieldTag:
        return self.ambient.field

    @property
    def real_dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def dim(self) -> int:
        """Dimension over the base field."""
        return self.real_dim // 2 if self.field is FieldTag.C else self.real_dim

    @cached_property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def is_complex_linear(self, tol: float = 1e-8) -> bool:
        if self.real_dim == 0:
            return True
        rotated = np.stack([times_i(self.ambient, c) for c in self.basis.T], axis=1)
        return bool(np.linalg.norm(rotated - self.projector @ rotated) <= tol)

    def project(self, v):
        if isinstance(v, Element):
            return Element.from_coords(self.ambient, self.projector @ v.coords)
        return self.projector @ np.asarray(v)

    def distance(self, v) -> float:
        c = v.coords if isinstance(v, Element) else np.asarray(v)
        return float(np.linalg.norm(c - self.projector @ c))

    def contains(self, v, tol: float = 1e-8) -> bool:
        c = v.coords if isinstance(v, Element) else np.asarray(v)
        scale = max(1.0, float(np.linalg.norm(c)))
        return self.distance(c) <= tol * scale

    def complement(self) -> "FSubspace":
        return FSubspace(self.ambient, _null(self.basis.T, RANK_TOL) if self.real_dim else np.eye(self.ambient.real_dimension))

    def element(self, coeffs) -> Element:
        return Element.from_coords(self.ambient, self.basis @ np.asarray(coeffs))

    def random_element(self, rng) -> Element:
        return self.element(rng.standard_normal(self.real_dim))

    def distance_to(self, other: "FSubspace") -> float:
        """Spectral-norm distance between the orthogonal projectors."""
        self._same(other)
        return float(np.linalg.norm(self.projector - other.projector, 2))

    def principal_angles(self, other: "FSubspace") -> np.ndarray:
        self._same(other)
        if self.real_dim == 0 or other.real_dim == 0:
            return np.zeros(0)
        return subspace_angles(self.basis, other.basis)

    def equals(self, other: "FSubspace", tol: float = 1e-6) -> bool:
        if self.real_dim != other.real_dim:
            return False
        return self.distance_to(other) <= tol

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def _same(self, other):
        if other.ambient != self.ambient:
            raise ValueError("ambient signature mismatch")

    def __repr__(self):
        return f"FSubspace(dim_{self.field.value}={self.dim}, ambient={self.ambient})"


def times_i(sig: AlgebraSignature, coords) -> np.ndarray:
    """Coordinates of i * C (complex field: every block is complex)."""
    c = np.asarray(coords).reshape(-1, 2)
    return np.stack([-c[:, 1], c[:, 0]], axis=1).ravel()


def _orth(m, tol):
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    return orth(m, rcond=tol)


def _null(g, tol):
    if g.size == 0:
        return np.eye(g.shape[1])
    return null_space(g, rcond=tol)


def subspace_intersect(spaces) -> FSubspace:
    """Intersection of subspaces through the null space of stacked normals."""
    spaces = list(spaces)
    if not spaces:
        raise ValueError("need at least one subspace")
    sig = spaces[0].ambient
    for s in spaces[1:]:
        s._same(spaces[0])
    normals = [s.complement().basis for s in spaces]
    g = np.concatenate(normals, axis=1).T
    if g.shape[0] == 0:
        return FSubspace(sig, spaces[0].basis.copy())
    return FSubspace(sig, _null(g, RANK_TOL))
