"""Verification suites.

Each suite draws its own generator from a master seed and a label, runs a
fixed number of trials, and returns a :class:`SuiteReport` whose violations
carry enough data to replay the failing case.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraSignature, Element, matrix_unit, spectral_norm
from .isometry import random_bj_isomorphism
from .families import (
    CounterexampleNotFound,
    ExcludedCase,
    check_pair,
    corner_family_attaining_vector,
    corner_family_matrix,
    corner_family_norm,
    corner_free,
    corner_restricted,
    random_family_triple,
    technical1_counterexample,
    unimodular_family_check,
)
from .leftsym import left_symmetric_test
from .oracle import (
    DEFAULT,
    Config,
    bj_orthogonal,
    bj_orthogonal_direct,
    is_smooth,
    sample_orthogonal,
    smooth_hyperplane,
)
from .scalars import UNITS, FieldTag, RingTag, qmatvec, random_imaginary_unit, unit_basis
from .structure import (
    STRUCT_DEFAULT,
    ClassSignature,
    Frame,
    Mode,
    StructureConfig,
    Unsupported,
    analytic_annihilator,
    block_annihilator,
    classify,
    minimal_smooth_tuple,
    pseudo_abelian_partition,
)
from .subspace import subspace_intersect

BAND = 1e-6


def derive_seed(master: int, label: str) -> int:
    """64-bit seed for one suite, from the master seed and a label."""
    h = hashlib.blake2b(f"{int(master)}:{label}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def suite_rng(master: int, label: str):
    return np.random.default_rng(derive_seed(master, label))


@dataclass
class SuiteReport:
    name: str
    seed: int
    trials: int = 0
    agreements: int = 0
    indeterminates: int = 0
    violations: list = field(default_factory=list)
    worst: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    band_limit: float = 0.01
    wall_time: float = 0.0

    @property
    def band_rate(self) -> float:
        return self.indeterminates / self.trials if self.trials else 0.0

    @property
    def ok(self) -> bool:
        return not self.violations and self.band_rate <= self.band_limit

    def record_worst(self, key: str, value: float, larger_is_worse: bool = True):
        cur = self.worst.get(key)
        if cur is None or (value > cur if larger_is_worse else value < cur):
            self.worst[key] = float(value)

    def violate(self, **info):
        self.violations.append(_plain(info))

    def merge(self, other: "SuiteReport") -> "SuiteReport":
        self.trials += other.trials
        self.agreements += other.agreements
        self.indeterminates += other.indeterminates
        self.violations += [dict(v, suite=other.name) for v in other.violations]
        self.notes += [f"{other.name}: {n}" for n in other.notes]
        self.wall_time += other.wall_time
        for k, v in other.worst.items():
            self.record_worst(k, v, not k.startswith("min"))
        return self

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "suite": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "agreements": self.agreements,
            "indeterminates": self.indeterminates,
            "band_rate": self.band_rate,
            "violations": self.violations,
            "worst": self.worst,
            "notes": self.notes,
            "ok": self.ok,
        }
        if timing:
            out["timing"] = {"wall_seconds": self.wall_time}
        return out

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"{status} {self.name} seed={self.seed} trials={self.trials} "
            f"violations={len(self.violations)} band={self.band_rate:.4f}"
        )


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Element):
        return x.coords.tolist()
    if isinstance(x, AlgebraSignature):
        return str(x)
    return x


class _Timer:
    def __init__(self, report: SuiteReport):
        self.report = report

    def __enter__(self):
        self.t = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_time += time.perf_counter() - self.t
        return False


# -- closed-form norms -------------------------------------------------------


def closed_form_suite(seed: int, trials: int = 200, rings=(RingTag.C, RingTag.H)) -> SuiteReport:
    """Norms and attaining vectors of the two corner families against SVD."""
    rep = SuiteReport("closed-form-norms", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        for ring in rings:
            sig = AlgebraSignature.of(FieldTag.R, (2, ring))
            for _ in range(trials):
                a, b = np.zeros(4), np.zeros(4)
                a[: ring.dim] = rng.standard_normal(ring.dim)
                b[: ring.dim] = rng.standard_normal(ring.dim)
                q = random_imaginary_unit(ring, rng)
                for second in (False, True):
                    rep.trials += 1
                    m = corner_family_matrix(a, b, q, second)
                    svd_norm = spectral_norm(Element.from_blocks(sig, [m]))
                    err = abs(svd_norm**2 - corner_family_norm(a, b, second) ** 2)
                    x = corner_family_attaining_vector(a, b, q, second)
                    nx = np.linalg.norm(x)
                    att = abs(np.linalg.norm(qmatvec(m, x)) - svd_norm * nx) / nx
                    rep.record_worst("norm_sq_error", err)
                    rep.record_worst("attaining_error", att)
                    if err > 1e-9 or att > 1e-8:
                        rep.violate(ring=ring.value, second=second, a=a, b=b, q=q, err=err, att=att)
                    else:
                        rep.agreements += 1
    return rep


def _corner_units(ring: RingTag, field_: FieldTag):
    if ring.dim == 1 or field_ is FieldTag.C:
        return [UNITS[0]]
    return unit_basis(ring)


def corner_free_suite(seed: int, samples: int = 10_000, cases=None) -> SuiteReport:
    """Single matrix units of [[0, K], [K, K]] survive left-symmetry testing,
    and their outgoing hyperplanes meet that subspace only in zero."""
    rep = SuiteReport("corner-free-left-symmetry", seed)
    rng = suite_rng(seed, rep.name)
    cases = cases or [
        (RingTag.R, FieldTag.R),
        (RingTag.C, FieldTag.R),
        (RingTag.H, FieldTag.R),
        (RingTag.C, FieldTag.C),
    ]
    with _Timer(rep):
        for ring, field_ in cases:
            sig = AlgebraSignature.of(field_, (2, ring))
            space = corner_free(ring, field_)
            planes = []
            for s, t in [(1, 1), (0, 1), (1, 0)]:
                for mu in _corner_units(ring, field_):
                    a = matrix_unit(sig, 0, s, t, mu)
                    rep.trials += 1
                    v = left_symmetric_test(a, space, DEFAULT, rng, samples)
                    if v.falsified:
                        rep.violate(ring=ring.value, field=field_.value, position=[s, t], mu=mu, counterexample=v.counterexample)
                    else:
                        rep.agreements += 1
                    planes.append(smooth_hyperplane(a))
            dim = subspace_intersect([space] + planes).real_dim
            rep.notes.append(f"M2({ring.value}) over {field_.value}: intersection dimension {dim}")
            if dim != 0:
                rep.violate(ring=ring.value, field=field_.value, intersection_dim=dim)
    return rep


# -- counterexamples in corner-restricted subspaces ---------------------------

COUNTEREXAMPLE_CASES = (
    (3, RingTag.R, FieldTag.R, ()),
    (3, RingTag.C, FieldTag.R, ()),
    (2, RingTag.C, FieldTag.R, (UNITS[0],)),
    (2, RingTag.H, FieldTag.R, ()),
)


def counterexample_suite(seed: int, trials: int = 100, cases=COUNTEREXAMPLE_CASES) -> SuiteReport:
    """Random A in corner-restricted subspaces get a confirmed B with A perp B, not B perp A."""
    rep = SuiteReport("corner-counterexamples", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        for n, ring, field_, corner in cases:
            space = corner_restricted(n, ring, field_, corner)
            for _ in range(trials):
                a = space.random_element(rng)
                rep.trials += 1
                try:
                    b = technical1_counterexample(a, corner, DEFAULT, rng)
                except (ExcludedCase, CounterexampleNotFound) as exc:
                    rep.violate(n=n, ring=ring.value, a=a, error=str(exc))
                    continue
                pc = check_pair(a * (1.0 / spectral_norm(a)), b)
                rep.record_worst("min_forward", min(pc.forward), False)
                rep.record_worst("max_backward", max(pc.backward))
                if space.contains(b) and pc.confirms(DEFAULT, 1e-8):
                    rep.agreements += 1
                else:
                    rep.violate(n=n, ring=ring.value, a=a, b=b, forward=pc.forward, backward=pc.backward)
    return rep


# -- oracle agreement ----------------------------------------------------------

TEST_SIGNATURES = (
    AlgebraSignature.of(FieldTag.R, (2, RingTag.R)),
    AlgebraSignature.of(FieldTag.R, (3, RingTag.R)),
    AlgebraSignature.of(FieldTag.R, (2, RingTag.C)),
    AlgebraSignature.of(FieldTag.C, (2, RingTag.C)),
    AlgebraSignature.of(FieldTag.R, (2, RingTag.H)),
    AlgebraSignature.of(FieldTag.R, (2, RingTag.R), (1, RingTag.R), (1, RingTag.R)),
    AlgebraSignature.of(FieldTag.R, (1, RingTag.R), (1, RingTag.C), (1, RingTag.H)),
)


def random_pair(sig: AlgebraSignature, rng, cfg: Config = DEFAULT):
    """A mix of generic pairs and perturbed orthogonal pairs near the boundary."""
    a = Element.random(sig, rng)
    kind = int(rng.integers(3))
    if kind == 0:
        return a, Element.random(sig, rng)
    b = sample_orthogonal(a, None, rng, cfg)
    scale = 10.0 ** rng.uniform(-3, 0)
    return a, b + Element.random(sig, rng) * (scale * (1 if kind == 1 else -1))


def oracle_agreement_suite(sig: AlgebraSignature, seed: int, trials: int = 1000, cfg: Config = DEFAULT) -> SuiteReport:
    rep = SuiteReport(f"oracle-agreement[{sig}]", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        for _ in range(trials):
            a, b = random_pair(sig, rng, cfg)
            v1 = bj_orthogonal(a, b, cfg)
            v2 = bj_orthogonal_direct(a, b, cfg)
            rep.trials += 1
            rep.record_worst("margin_gap", abs(v1.margin - v2.margin))
            if abs(v1.margin) < BAND or abs(v2.margin) < BAND:
                rep.indeterminates += 1
            elif v1.orthogonal == v2.orthogonal:
                rep.agreements += 1
            else:
                rep.violate(a=a, b=b, criterion=v1.margin, direct=v2.margin)
    return rep


def _submaximal_element(sig: AlgebraSignature, rng):
    a = Element.random(sig, rng)
    norms = a.block_norms()
    top = int(rng.integers(len(sig.blocks)))
    blocks = list(a.blocks)
    for k in range(len(blocks)):
        target = 1.0 if k == top else rng.uniform(0.05, 0.9)
        blocks[k] = blocks[k] * (target / norms[k])
    return Element(sig, tuple(blocks)), top


def moreover_suite(sig: AlgebraSignature, seed: int, trials: int = 1000, cfg: Config = DEFAULT) -> SuiteReport:
    """Zeroing blocks whose norm is below the maximum leaves every verdict unchanged."""
    rep = SuiteReport(f"submaximal-blocks[{sig}]", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        for _ in range(trials):
            a, top = _submaximal_element(sig, rng)
            a_top = a.block_only(top)
            _, b = random_pair(sig, rng, cfg)
            if rng.integers(2):
                b = sample_orthogonal(a, None, rng, cfg) + Element.random(sig, rng) * 10.0 ** rng.uniform(-3, 0)
            v1 = bj_orthogonal(a, b, cfg)
            v2 = bj_orthogonal(a_top, b, cfg)
            rep.trials += 1
            rep.record_worst("margin_gap", abs(v1.margin - v2.margin))
            if abs(v1.margin) < BAND and abs(v2.margin) < BAND:
                rep.indeterminates += 1
            elif v1.orthogonal == v2.orthogonal:
                rep.agreements += 1
            else:
                rep.violate(a=a, b=b, full=v1.margin, top_only=v2.margin)
    return rep


# -- smoothness ------------------------------------------------------------------


def smoothness_suite(sig: AlgebraSignature, cfg: Config = DEFAULT) -> SuiteReport:
    """Every matrix unit times a canonical unit is smooth; identities and ties are not."""
    rep = SuiteReport(f"smoothness[{sig}]", 0)
    with _Timer(rep):
        for k, (n, ring) in enumerate(sig.blocks):
            units = [UNITS[0], UNITS[1]] if sig.field is FieldTag.C else unit_basis(ring)
            for s in range(n):
                for t in range(n):
                    for mu in units:
                        rep.trials += 1
                        e = matrix_unit(sig, k, s, t, mu)
                        cert = is_smooth(e, cfg)
                        if cert is None or cert.block != k:
                            rep.violate(block=k, position=[s, t], mu=mu, expected="smooth")
                        else:
                            rep.agreements += 1
        ident = Element.from_blocks(sig, [np.eye(n) for n, _ in sig.blocks])
        rep.trials += 1
        if is_smooth(ident, cfg) is None:
            rep.agreements += 1
        else:
            rep.violate(element="identity", expected="not smooth")
        if len(sig.blocks) > 1:
            tie = matrix_unit(sig, 0, 0, 0) + matrix_unit(sig, 1, 0, 0)
            rep.trials += 1
            if is_smooth(tie, cfg) is None:
                rep.agreements += 1
            else:
                rep.violate(element="two-block tie", expected="not smooth")
    return rep


# -- invariance ------------------------------------------------------------------


def invariance_suite(sig: AlgebraSignature, seed: int, trials: int = 500, cfg: Config = DEFAULT, transport_every: int = 50) -> SuiteReport:
    """Verdicts, smoothness and counterexamples survive random BJ-isomorphisms."""
    rep = SuiteReport(f"invariance[{sig}]", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        for i in range(trials):
            phi = random_bj_isomorphism(sig, rng)
            a, b = random_pair(sig, rng, cfg)
            pa, pb = phi(a), phi(b)
            rep.trials += 1
            rep.record_worst("norm_change", abs(spectral_norm(pa) - spectral_norm(a)))
            v1, v2 = bj_orthogonal(a, b, cfg), bj_orthogonal(pa, pb, cfg)
            if abs(v1.margin) < BAND or abs(v2.margin) < BAND:
                rep.indeterminates += 1
            elif v1.orthogonal != v2.orthogonal:
                rep.violate(kind="verdict", a=a, b=b, iso=phi.description, before=v1.margin, after=v2.margin)
                continue
            if (is_smooth(a, cfg) is None) != (is_smooth(pa, cfg) is None):
                rep.violate(kind="smoothness", a=a, iso=phi.description)
                continue
            if transport_every and i % transport_every == 0:
                ls = left_symmetric_test(a, None, cfg, rng, 200)
                if ls.falsified and not check_pair(phi(a * (1.0 / spectral_norm(a))), phi(ls.counterexample), cfg).confirms(cfg, 10 * cfg.eps_ortho):
                    rep.violate(kind="counterexample", a=a, b=ls.counterexample, iso=phi.description)
                    continue
            rep.agreements += 1
    return rep


# -- unimodular family -------------------------------------------------------------


def unimodular_suite(seed: int, trials: int = 1000) -> SuiteReport:
    rep = SuiteReport("unimodular-family", seed)
    rng = suite_rng(seed, rep.name)
    cases = [(RingTag.R, FieldTag.R), (RingTag.C, FieldTag.R), (RingTag.H, FieldTag.R), (RingTag.C, FieldTag.C)]
    with _Timer(rep):
        for ring, field_ in cases:
            for _ in range(trials):
                x, y, z = random_family_triple(3, ring, field_, rng)
                left, right = unimodular_family_check(x, y, z, ring, field_)
                rep.trials += 1
                if left == right:
                    rep.agreements += 1
                else:
                    rep.violate(ring=ring.value, field=field_.value, x=x, y=y, z=z, left=left, right=right)
    return rep


# -- structure -------------------------------------------------------------------


def annihilator_suite(sig: AlgebraSignature, seed: int, blocks=None, scfg: StructureConfig = STRUCT_DEFAULT, scramble: bool = True) -> SuiteReport:
    """Oracle block annihilator equals the analytic one for each seeded block.

    With ``scramble`` the oracle works through a random BJ-isomorphism and the
    analytic answer is transported by the same map.
    """
    rep = SuiteReport(f"block-annihilator[{sig}]", seed)
    rng = suite_rng(seed, rep.name)
    frame = Frame(sig, random_bj_isomorphism(sig, rng)) if scramble else Frame.plain(sig)
    blocks = range(len(sig.blocks)) if blocks is None else blocks
    with _Timer(rep):
        for j in blocks:
            rep.trials += 1
            s, tup, wit = minimal_smooth_tuple(frame, [j], None, scfg, rng)
            ann = block_annihilator(tup, frame, rng, scfg, None, wit)
            ref = frame.push(analytic_annihilator(sig, j))
            dist = ann.distance_to(ref) if ann.real_dim == ref.real_dim else float("inf")
            rep.record_worst("projector_distance", dist)
            if dist <= 1e-7:
                rep.agreements += 1
            else:
                rep.violate(block=j, s=s, dim=ann.real_dim, expected_dim=ref.real_dim, distance=dist)
    return rep


def partition_suite(sig: AlgebraSignature, seed: int, scfg: StructureConfig = STRUCT_DEFAULT) -> SuiteReport:
    """Pseudo-abelian partition on a scrambled frame; Unsupported is reported, not failed."""
    rep = SuiteReport(f"partition[{sig}]", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        frame = Frame(sig, random_bj_isomorphism(sig, rng))
        rep.trials += 1
        try:
            part = pseudo_abelian_partition(frame, None, rng, scfg)
        except Unsupported as exc:
            rep.notes.append(f"unsupported: {exc}")
            rep.indeterminates += 1
            return rep
        got = sorted((i.block, i.ring.value) for i in part.ideals)
        want = sorted((k, r.value) for k, (n, r) in enumerate(sig.blocks))
        rep.notes.append(f"s={part.s}")
        if got == want:
            rep.agreements += 1
        else:
            rep.violate(got=got, expected=want)
    rep.band_limit = 1.0
    return rep


THEOREM_PAIRS = (
    (AlgebraSignature.of(FieldTag.C, (2, RingTag.C)), AlgebraSignature.of(FieldTag.C, *[(1, RingTag.C)] * 4)),
    (AlgebraSignature.of(FieldTag.R, (1, RingTag.H)), AlgebraSignature.of(FieldTag.R, (2, RingTag.R))),
    (AlgebraSignature.of(FieldTag.R, *[(1, RingTag.R)] * 4), AlgebraSignature.of(FieldTag.R, (1, RingTag.C), (1, RingTag.C))),
    (AlgebraSignature.of(FieldTag.R, (1, RingTag.R), (1, RingTag.R)), AlgebraSignature.of(FieldTag.R, (1, RingTag.C))),
    (
        AlgebraSignature.of(FieldTag.C, (2, RingTag.C), (1, RingTag.C)),
        AlgebraSignature.of(FieldTag.C, *[(1, RingTag.C)] * 5),
    ),
)


def _scrambled_class(sig, rng, scfg):
    frame = Frame(sig, random_bj_isomorphism(sig, rng))
    try:
        return classify(sig, Mode.ORACLE, rng, frame, scfg).signature, "oracle"
    except Unsupported:
        return classify(sig, Mode.ANALYTIC).signature, "analytic"


def theorem_suite(pairs=THEOREM_PAIRS, seed: int = 0, scfg: StructureConfig = STRUCT_DEFAULT) -> SuiteReport:
    """Scrambled classification separates exactly the non-isomorphic pairs."""
    rep = SuiteReport("theorem", seed)
    rng = suite_rng(seed, rep.name)
    with _Timer(rep):
        jobs = [(a, b) for a, b in pairs] + [(s, s) for p in pairs for s in p]
        for s1, s2 in jobs:
            c1, m1 = _scrambled_class(s1, rng, scfg)
            c2, m2 = _scrambled_class(s2, rng, scfg)
            if "analytic" in (m1, m2):
                rep.notes.append(f"analytic fallback for {s1} / {s2}")
            truth = ClassSignature.from_signature(s1) == ClassSignature.from_signature(s2)
            same_dim = s1.real_dimension == s2.real_dimension
            rep.trials += 1
            ok = (c1 == c2) == truth and c1 == ClassSignature.from_signature(s1) and c2 == ClassSignature.from_signature(s2)
            if ok and same_dim:
                rep.agreements += 1
            else:
                rep.violate(first=str(s1), second=str(s2), got=[str(c1), str(c2)], isomorphic=truth)
    return rep
