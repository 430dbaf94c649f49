"""The eleven acceptance criteria at their stated sizes and tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the terminal
summary.  Expected runtime is a few minutes on one core.
"""

import pytest

from bjstar import harness
from bjstar.algebra import AlgebraSignature
from bjstar.scalars import FieldTag, RingTag
from bjstar.structure import Unsupported

R, C, H = RingTag.R, RingTag.C, RingTag.H
MULTI_BLOCK = [s for s in harness.TEST_SIGNATURES if len(s.blocks) > 1]


def _violations(reports):
    return sum(len(r.violations) for r in reports)


def test_closed_form_norms(acceptance):
    rep = harness.closed_form_suite(seed=1, trials=200)
    ok = acceptance(
        1,
        "closed-form corner norms and attaining vectors",
        rep.ok and rep.trials == 800,
        f"worst norm^2 error {rep.worst['norm_sq_error']:.1e}, attaining {rep.worst['attaining_error']:.1e}",
    )
    assert ok, rep.violations[:3]


def test_oracle_equivalence(acceptance):
    reps = [harness.oracle_agreement_suite(s, seed=2, trials=1000) for s in harness.TEST_SIGNATURES]
    worst_band = max(r.band_rate for r in reps)
    ok = acceptance(
        2,
        "criterion and direct oracles agree outside the band",
        all(r.ok for r in reps),
        f"{sum(r.trials for r in reps)} pairs, {_violations(reps)} disagreements, max band rate {worst_band:.4f}",
    )
    assert ok, [r.line() for r in reps if not r.ok]


def test_submaximal_blocks(acceptance):
    reps = [harness.moreover_suite(s, seed=3, trials=1000) for s in MULTI_BLOCK]
    ok = acceptance(
        3,
        "zeroing sub-maximal blocks keeps every verdict",
        all(not r.violations for r in reps),
        f"{sum(r.trials for r in reps)} pairs, {_violations(reps)} changes",
    )
    assert ok, [r.line() for r in reps if r.violations]


def test_smoothness(acceptance):
    reps = [harness.smoothness_suite(s) for s in harness.TEST_SIGNATURES]
    ok = acceptance(
        4,
        "matrix units smooth, identities and ties rejected",
        all(r.ok for r in reps),
        f"{sum(r.trials for r in reps)} elements",
    )
    assert ok, [r.violations for r in reps if r.violations]


def test_corner_free_left_symmetry(acceptance):
    rep = harness.corner_free_suite(seed=5, samples=10_000)
    ok = acceptance(
        5,
        "corner-free units left-symmetric, hyperplanes meet in zero",
        rep.ok,
        f"{rep.trials} elements x 10^4 samples, {len(rep.violations)} falsified",
    )
    assert ok, rep.violations


def test_corner_counterexamples(acceptance):
    rep = harness.counterexample_suite(seed=6, trials=100)
    ok = acceptance(
        6,
        "confirmed counterexamples in corner-restricted subspaces",
        rep.ok and rep.trials == 400,
        f"{rep.agreements}/{rep.trials}, worst backward margin {rep.worst.get('max_backward', float('nan')):.2e}",
    )
    assert ok, rep.violations[:3]


def test_block_annihilator(acceptance):
    sigs = [
        AlgebraSignature.of(FieldTag.R, (2, R), (3, R)),
        AlgebraSignature.of(FieldTag.C, (2, C), (2, C)),
        AlgebraSignature.of(FieldTag.R, (2, R), (2, R)),
    ]
    reps = [harness.annihilator_suite(s, seed) for s in sigs for seed in range(5)]
    worst = max(r.worst.get("projector_distance", 0.0) for r in reps)
    ok = acceptance(
        7,
        "oracle block annihilator equals the analytic one",
        all(r.ok for r in reps),
        f"{sum(r.trials for r in reps)} blocks, worst projector distance {worst:.1e}",
    )
    assert ok, [r.violations for r in reps if r.violations]


def test_theorem_desk_check(acceptance):
    reps = [harness.theorem_suite(seed=seed) for seed in range(10)]
    fallbacks = sum(len(r.notes) for r in reps)
    ok = acceptance(
        8,
        "scrambled classification separates exactly the non-isomorphic pairs",
        all(r.ok for r in reps),
        f"{sum(r.trials for r in reps)} comparisons over 10 seeds, {fallbacks} analytic fallbacks",
    )
    assert ok, [r.violations for r in reps if r.violations]


def test_invariance(acceptance):
    reps = [harness.invariance_suite(s, seed, 500) for s in harness.TEST_SIGNATURES for seed in (1, 2, 3)]
    ok = acceptance(
        9,
        "verdicts, smoothness and counterexamples survive BJ-isomorphisms",
        all(r.ok for r in reps),
        f"{sum(r.trials for r in reps)} trials, {_violations(reps)} violations",
    )
    assert ok, [r.line() for r in reps if not r.ok]


def test_unimodular_family(acceptance):
    rep = harness.unimodular_suite(seed=10, trials=1000)
    ok = acceptance(
        10,
        "unimodular family identity: grid side equals exact side",
        rep.ok,
        f"{rep.trials} triples, {len(rep.violations)} disagreements",
    )
    assert ok, rep.violations[:3]


def test_pseudo_abelian_partition(acceptance):
    sigs = [
        AlgebraSignature.of(FieldTag.R, (1, R), (1, R)),
        AlgebraSignature.of(FieldTag.C, (1, C), (1, C)),
        AlgebraSignature.of(FieldTag.R, (1, R), (1, C)),
        AlgebraSignature.of(FieldTag.R, (1, C), (1, H)),
    ]
    reps = [harness.partition_suite(s, seed) for s in sigs for seed in range(5)]
    unsupported = sum(r.indeterminates for r in reps)
    ok = acceptance(
        11,
        "pseudo-abelian partition recovered or reported unsupported",
        _violations(reps) == 0,
        f"{sum(r.agreements for r in reps)} exact, {unsupported} unsupported, {_violations(reps)} wrong",
    )
    assert ok, [r.violations for r in reps if r.violations]
