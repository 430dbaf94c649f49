"""Birkhoff-James orthogonality in block C*-algebras, decided two ways.

``bj_orthogonal`` compresses A*B onto the norm-attaining subspace of A and asks
whether zero lies in the resulting range (a real quadratic-form interval when
the base field is R, a numerical range when it is C).  ``bj_orthogonal_direct``
never looks at singular vectors: it probes ``lambda -> ||A + lambda B||`` near
zero and minimizes it over a bracket that must contain the minimizer.

Both routes report a signed margin.  Positive means zero lies strictly inside
the witness range (orthogonal with room to spare), negative is minus the
distance from zero to it.  For normalized inputs the two margins coincide in
exact arithmetic, which is what makes them comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import least_squares

from .algebra import (
    DEFAULT_TOL,
    Element,
    M0Subspace,
    block_svd,
    m0_subspace,
    outer,
    spectral_norm,
    unrealify_vector,
)
from .scalars import FieldTag, qmatvec
from .subspace import FSubspace

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Config:
    tol: float = DEFAULT_TOL
    eps_ortho: float = 1e-9
    theta_grid: int = 720
    direct_grid: int = 72
    direct_step: float = 1e-5
    samples: int = 200
    max_iters: int = 50


DEFAULT = Config()


class OracleError(RuntimeError):
    pass


@dataclass
class OrthoVerdict:
    orthogonal: bool
    margin: float
    method: str
    indeterminate: bool = False
    witness: Optional[np.ndarray] = None
    value: Optional[complex] = None
    note: str = ""

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = self.witness
            if np.iscomplexobj(w):
                w = np.stack([w.real, w.imag], axis=-1)
            w = np.asarray(w).tolist()
        v = self.value
        if isinstance(v, complex):
            v = [v.real, v.imag]
        return {
            "orthogonal": bool(self.orthogonal),
            "margin": float(self.margin),
            "indeterminate": bool(self.indeterminate),
            "witness": w,
            "value": v,
            "method": self.method,
            "note": self.note,
        }


# -- witness ranges -----------------------------------------------------------


def zero_in_range_real(c, tol: float = 0.0):
    """Is 0 in {x^T C x : |x| = 1}?  Returns (inside, margin)."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    s = 0.5 * (c + c.T)
    ev = np.linalg.eigvalsh(s)
    margin = float(min(-ev[0], ev[-1]))
    return margin >= -tol, margin


def _hermitian_min_eigs(c, thetas):
    rot = np.exp(1j * thetas)[:, None, None] * c[None]
    h = 0.5 * (rot + np.conj(np.swapaxes(rot, 1, 2)))
    return np.linalg.eigvalsh(h)[:, 0]


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Maximize a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def golden_section_min(f, lo, hi, tol=1e-10, max_iter=200):
    x, v = golden_section_max(lambda t: -f(t), lo, hi, tol, max_iter)
    return x, -v


def zero_in_numrange_complex(c, cfg: Config = DEFAULT, rng=None):
    """Is 0 in the numerical range of a complex matrix?  Returns (inside, margin).

    Zero is outside exactly when some rotation makes the Hermitian part
    positive definite, so the margin is minus the best such smallest
    eigenvalue over a theta grid refined by golden section.
    """
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    thetas = np.linspace(0.0, 2.0 * np.pi, cfg.theta_grid, endpoint=False)
    lam = _hermitian_min_eigs(c, thetas)
    i = int(np.argmax(lam))
    step = 2.0 * np.pi / cfg.theta_grid

    def f(t):
        return float(_hermitian_min_eigs(c, np.array([t]))[0])

    _, best = golden_section_max(f, thetas[i] - step, thetas[i] + step, tol=1e-12)
    best = max(best, float(lam[i]))
    margin = -best
    inside = margin >= -cfg.eps_ortho
    if abs(margin) < 10.0 * cfg.eps_ortho:
        y = numrange_witness(c, rng=rng)
        if y is not None and abs(np.vdot(y, c @ y)) <= cfg.eps_ortho:
            inside = True
    return inside, margin


def numrange_witness(c, rng=None, starts: int = 8, tol: float = 1e-10):
    """A unit vector y with y* C y close to zero, found by least squares."""
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    m = c.shape[0]
    rng = np.random.default_rng(0) if rng is None else rng
    scale = max(float(np.linalg.norm(c, 2)), 1e-300)

    def resid(p):
        y = p[:m] + 1j * p[m:]
        nrm = np.vdot(y, y).real
        z = np.vdot(y, c @ y) / (nrm * scale)
        return [z.real, z.imag, (nrm - 1.0) * 1e-3]

    best = None
    for _ in range(starts):
        p0 = rng.standard_normal(2 * m)
        sol = least_squares(resid, p0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        y = sol.x[:m] + 1j * sol.x[m:]
        y = y / np.linalg.norm(y)
        val = abs(np.vdot(y, c @ y)) / scale
        if best is None or val < best[0]:
            best = (val, y)
        if val <= tol:
            break
    if best is None or best[0] > 1e-6:
        return None
    return best[1]


# -- criterion route ------------------------------------------------------------


def _real_operator(a: Element) -> np.ndarray:
    return block_diag(*a.real_blocks) if a.blocks else np.zeros((0, 0))


def _complex_operator(a: Element) -> np.ndarray:
    return block_diag(*a.complex_blocks) if a.blocks else np.zeros((0, 0), dtype=complex)


def _normalized(a: Element, b: Element):
    na, nb = spectral_norm(a), spectral_norm(b)
    return na, nb, (a * (1.0 / na) if na > 0 else a), (b * (1.0 / nb) if nb > 0 else b)


def _check_pair(a: Element, b: Element):
    if a.signature != b.signature:
        raise ValueError("signature mismatch")


def compression(a: Element, b: Element, m0: M0Subspace):
    """Q* A* B Q on an orthonormal basis Q of M0(A) (real or complex)."""
    if a.signature.field is FieldTag.R:
        q = m0.real_basis
        return (_real_operator(a) @ q).T @ (_real_operator(b) @ q), q
    q = m0.complex_basis
    return (_complex_operator(a) @ q).conj().T @ (_complex_operator(b) @ q), q


def pairing(a: Element, b: Element, x) -> complex:
    """<A x, B x>_F for a realified (F = R) or complex (F = C) vector x."""
    if a.signature.field is FieldTag.R:
        return float((_real_operator(a) @ x) @ (_real_operator(b) @ x))
    return complex(np.vdot(_complex_operator(a) @ x, _complex_operator(b) @ x))


def bj_orthogonal(a: Element, b: Element, cfg: Config = DEFAULT) -> OrthoVerdict:
    """A is BJ-orthogonal to B iff <Ax, Bx>_F = 0 for a unit x in M0(A)."""
    _check_pair(a, b)
    na, nb, an, bn = _normalized(a, b)
    if na == 0.0:
        return OrthoVerdict(True, math.inf, "criterion", note="A is zero")
    if nb == 0.0:
        return OrthoVerdict(True, math.inf, "criterion", note="B is zero")
    m0 = m0_subspace(an, cfg.tol)
    c, q = compression(an, bn, m0)
    flat = 0.5 * (c + c.T) if a.signature.field is FieldTag.R else c
    if np.linalg.norm(flat) <= cfg.eps_ortho:
        # every unit vector of M0 is a witness, as trivially as for B = 0
        x = q[:, 0]
        return OrthoVerdict(True, math.inf, "criterion", witness=x, value=pairing(an, bn, x), note="compression vanishes")
    if a.signature.field is FieldTag.R:
        inside, margin = zero_in_range_real(c, cfg.eps_ortho)
        witness = _real_witness(c, q) if inside else None
    else:
        inside, margin = zero_in_numrange_complex(c, cfg)
        witness = None
        if inside:
            y = numrange_witness(c)
            witness = None if y is None else q @ y
    value = None if witness is None else pairing(an, bn, witness)
    return OrthoVerdict(
        inside,
        margin,
        "criterion",
        indeterminate=abs(margin) < cfg.eps_ortho,
        witness=witness,
        value=value,
    )


def _real_witness(c, q):
    s = 0.5 * (c + c.T)
    ev, vec = np.linalg.eigh(s)
    lo, hi = ev[0], ev[-1]
    if hi - lo <= 0.0:
        y = vec[:, 0]
    else:
        t = math.sqrt(max(0.0, -lo) / (hi - lo))
        y = math.sqrt(max(0.0, 1.0 - t * t)) * vec[:, 0] + t * vec[:, -1]
    return q @ y


# -- direct route -------------------------------------------------------------------


class _NormPencil:
    """Batched evaluation of lambda -> ||A + lambda B||."""

    def __init__(self, a: Element, b: Element):
        self.complex = a.signature.field is FieldTag.C
        if self.complex:
            self.pairs = list(zip(a.complex_blocks, b.complex_blocks))
        else:
            self.pairs = list(zip(a.real_blocks, b.real_blocks))

    def __call__(self, lams) -> np.ndarray:
        lams = np.atleast_1d(lams)
        out = np.zeros(lams.shape, dtype=float)
        for ma, mb in self.pairs:
            stack = ma[None] + lams[:, None, None] * mb[None]
            sv = np.linalg.svd(stack, compute_uv=False)[:, 0]
            out = np.maximum(out, sv)
        return out


def _one_sided_slopes(g, f0, dirs, h):
    """Richardson-extrapolated one-sided derivatives of g along each direction."""
    hs = np.array([h, h / 2.0, h / 4.0])
    lams = (dirs[:, None] * hs[None, :]).ravel()
    vals = g(lams).reshape(len(dirs), 3)
    q = (vals - f0) / hs[None, :]
    return (q[:, 0] - 6.0 * q[:, 1] + 8.0 * q[:, 2]) / 3.0


def bj_orthogonal_direct(a: Element, b: Element, cfg: Config = DEFAULT) -> OrthoVerdict:
    """Orthogonality straight from the definition ||A + lambda B|| >= ||A||.

    The function is convex in lambda, so zero is a minimizer iff every one-sided
    directional derivative at zero is non-negative; the most negative one is the
    margin.  A golden-section search over |lambda| <= 2 ||A|| / ||B|| looks for an
    explicit decrease as a second line of evidence.
    """
    _check_pair(a, b)
    na, nb, an, bn = _normalized(a, b)
    if na == 0.0:
        return OrthoVerdict(True, math.inf, "direct", note="A is zero")
    if nb == 0.0:
        return OrthoVerdict(True, math.inf, "direct", note="B is zero")
    g = _NormPencil(an, bn)
    f0 = float(g(np.array([0.0]))[0])
    radius = 2.0  # 2 ||A|| / ||B|| after normalization
    if a.signature.field is FieldTag.R:
        slopes = _one_sided_slopes(g, f0, np.array([1.0, -1.0]), cfg.direct_step)
        margin = float(slopes.min())
        lam, fmin = golden_section_min(lambda t: float(g(np.array([t]))[0]), -radius, radius, tol=1e-12)
        lam = complex(lam)
    else:
        thetas = np.linspace(0.0, 2.0 * np.pi, cfg.direct_grid, endpoint=False)
        slopes = _one_sided_slopes(g, f0, np.exp(1j * thetas), cfg.direct_step)
        i = int(np.argmin(slopes))
        step = 2.0 * np.pi / cfg.direct_grid

        def slope(t):
            return float(_one_sided_slopes(g, f0, np.array([np.exp(1j * t)]), cfg.direct_step)[0])

        t_best, s_best = golden_section_min(slope, thetas[i] - step, thetas[i] + step, tol=1e-9)
        margin = float(min(s_best, slopes[i]))
        direction = np.exp(1j * (t_best if s_best <= slopes[i] else thetas[i]))
        r, fmin = golden_section_min(
            lambda t: float(g(np.array([t * direction]))[0]), 0.0, radius, tol=1e-12
        )
        lam = complex(r * direction)
        lam, fmin = _coordinate_descent(g, lam, fmin, radius)
    decrease = f0 - fmin
    orthogonal = margin >= -cfg.eps_ortho and decrease <= cfg.eps_ortho
    note = f"min ||A+tB|| = {fmin:.17g} at t = {lam:.6g}"
    if margin >= -cfg.eps_ortho and decrease > cfg.eps_ortho:
        note += "; search found a decrease the slopes missed"
        margin = min(margin, -decrease)
    return OrthoVerdict(
        orthogonal,
        margin,
        "direct",
        indeterminate=abs(margin) < cfg.eps_ortho,
        value=lam,
        note=note,
    )


def _coordinate_descent(g, lam, fmin, radius, sweeps: int = 2):
    for _ in range(sweeps):
        for unit in (1.0, 1j):
            base = lam

            def f(t):
                return float(g(np.array([base + t * unit]))[0])

            t, v = golden_section_min(f, -radius, radius, tol=1e-12)
            if v < fmin:
                lam, fmin = base + t * unit, v
    return lam, fmin


def orthogonal_both(a: Element, b: Element, cfg: Config = DEFAULT):
    return bj_orthogonal(a, b, cfg), bj_orthogonal_direct(a, b, cfg)


# -- smooth points -----------------------------------------------------------------


@dataclass(frozen=True)
class SmoothCertificate:
    block: int
    u: np.ndarray  # unit quaternion vector (n_j, 4)
    norm_gap: float
    sv_gap: float


def smooth_diagnostic(a: Element, cfg: Config = DEFAULT):
    """(certificate or None, reason)."""
    norm = spectral_norm(a)
    if norm == 0.0:
        return None, "zero element"
    bn = a.block_norms()
    attaining = [k for k, v in enumerate(bn) if v >= (1.0 - cfg.tol) * norm]
    if len(attaining) != 1:
        return None, f"{len(attaining)} blocks attain the norm"
    j = attaining[0]
    others = [v for k, v in enumerate(bn) if k != j]
    norm_gap = norm - (max(others) if others else 0.0)
    if norm_gap <= cfg.tol * norm:
        return None, "norm gap between blocks below tolerance"
    n, r = a.signature.blocks[j]
    svd = block_svd(a.blocks[j], r, cfg.tol)
    s = svd.singular_values
    sv_gap = float(s[0] - (s[1] if n > 1 else 0.0))
    if sv_gap <= cfg.tol * norm:
        return None, "top singular value is not simple"
    return SmoothCertificate(j, svd.right[:, 0].copy(), float(norm_gap), sv_gap), "smooth"


def is_smooth(a: Element, cfg: Config = DEFAULT) -> Optional[SmoothCertificate]:
    return smooth_diagnostic(a, cfg)[0]


def functional_normals(a: Element, block: int, u) -> list:
    """Coordinate normals of C -> <C_j u, A_j u>_F (one for R, two for C)."""
    sig = a.signature
    w = qmatvec(a.blocks[block], u)
    base = Element.zeros(sig).with_block(block, outer(w, u))
    normals = [base.coords]
    if sig.field is FieldTag.C:
        normals.append(base.left_scale(np.array([0.0, 1.0, 0.0, 0.0])).coords)
    return normals


def witness_normals(a: Element, x) -> list:
    """Normals of B -> <Ax, Bx>_F for a realified (F=R) or complex (F=C) x."""
    sig = a.signature
    blocks = []
    if sig.field is FieldTag.R:
        off = sig.vector_offsets
        for k, (n, r) in enumerate(sig.blocks):
            u = unrealify_vector(x[off[k] : off[k + 1]], r)
            blocks.append(outer(qmatvec(a.blocks[k], u), u))
    else:
        start = 0
        for k, (n, r) in enumerate(sig.blocks):
            xc = x[start : start + n]
            start += n
            u = np.zeros((n, 4))
            u[:, 0], u[:, 1] = xc.real, xc.imag
            blocks.append(outer(qmatvec(a.blocks[k], u), u))
    base = Element(sig, tuple(blocks))
    normals = [base.coords]
    if sig.field is FieldTag.C:
        normals.append(base.left_scale(np.array([0.0, 1.0, 0.0, 0.0])).coords)
    return normals


class NotSmooth(ValueError):
    pass


def smooth_hyperplane(a: Element, cfg: Config = DEFAULT) -> FSubspace:
    """The outgoing neighbourhood of a smooth A: kernel of one F-linear functional."""
    cert = is_smooth(a, cfg)
    if cert is None:
        raise NotSmooth(smooth_diagnostic(a, cfg)[1])
    return FSubspace.kernel(a.signature, functional_normals(a, cert.block, cert.u))


# -- sampling ---------------------------------------------------------------------


def _unit_in_m0(m0: M0Subspace, field_: FieldTag, rng):
    if field_ is FieldTag.R:
        q = m0.real_basis
        y = rng.standard_normal(q.shape[1])
        return q @ (y / np.linalg.norm(y))
    q = m0.complex_basis
    y = rng.standard_normal(q.shape[1]) + 1j * rng.standard_normal(q.shape[1])
    return q @ (y / np.linalg.norm(y))


def sample_orthogonal_with_witness(
    a: Element, space: Optional[FSubspace], rng, cfg: Config = DEFAULT
):
    """Random B in ``space`` with A orthogonal to B, and the witness x used."""
    sig = a.signature
    if spectral_norm(a) == 0.0:
        raise ValueError("A must be nonzero")
    space = FSubspace.full(sig) if space is None else space
    m0 = m0_subspace(a, cfg.tol)
    w = space.basis
    for _ in range(cfg.max_iters):
        x = _unit_in_m0(m0, sig.field, rng)
        g = np.stack(witness_normals(a, x), axis=0) @ w
        # orthonormal basis of {c : g c = 0} inside the space's coordinates
        _, s, vh = np.linalg.svd(g, full_matrices=True)
        rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
        z = vh[rank:].T
        if z.shape[1] == 0:
            continue
        coeff = z @ rng.standard_normal(z.shape[1])
        b = Element.from_coords(sig, w @ coeff)
        if b.fro() == 0.0:
            continue
        b = b * (1.0 / spectral_norm(b))
        return b, x
    raise OracleError("could not draw an element orthogonal to A inside the subspace")


def sample_orthogonal(a: Element, space: Optional[FSubspace], rng, cfg: Config = DEFAULT) -> Element:
    return sample_orthogonal_with_witness(a, space, rng, cfg)[0]
