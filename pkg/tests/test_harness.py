import json

import numpy as np

from bjstar import harness
from bjstar.algebra import AlgebraSignature
from bjstar.scalars import RingTag


def test_seed_derivation_is_stable_and_label_dependent():
    a = harness.derive_seed(7, "x")
    assert a == harness.derive_seed(7, "x")
    assert a != harness.derive_seed(7, "y") and a != harness.derive_seed(8, "x")
    assert 0 <= a < 2**64


def test_report_merge_and_band():
    r = harness.SuiteReport("a", 1, trials=100, agreements=99, indeterminates=1)
    assert r.ok and r.band_rate == 0.01
    r.merge(harness.SuiteReport("b", 1, trials=100, agreements=99, indeterminates=1))
    assert r.trials == 200 and r.indeterminates == 2
    assert r.ok
    r.merge(harness.SuiteReport("c", 1, trials=10, indeterminates=10))
    assert not r.ok
    bad = harness.SuiteReport("d", 1)
    bad.violate(x=np.arange(2))
    r.merge(bad)
    assert r.violations[-1] == {"x": [0, 1], "suite": "d"}


def test_reports_are_reproducible():
    s = AlgebraSignature.of("R", (2, RingTag.R))
    a = harness.invariance_suite(s, 42, 60)
    b = harness.invariance_suite(s, 42, 60)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert a.ok and a.trials == 60


def test_invariance_on_quaternions():
    s = AlgebraSignature.of("R", (1, RingTag.H))
    rep = harness.invariance_suite(s, 3, 100)
    assert not rep.violations


def test_small_suites_are_clean():
    for rep in (
        harness.closed_form_suite(1, 20),
        harness.counterexample_suite(1, 5),
        harness.unimodular_suite(1, 50),
        harness.oracle_agreement_suite(harness.TEST_SIGNATURES[-1], 1, 50),
        harness.moreover_suite(harness.TEST_SIGNATURES[-2], 1, 50),
    ):
        assert rep.ok, rep.line()


def test_theorem_suite_separates_a_pair():
    pairs = ((AlgebraSignature.of("R", (1, RingTag.H)), AlgebraSignature.of("R", (2, RingTag.R))),)
    rep = harness.theorem_suite(pairs, seed=3)
    assert rep.ok and rep.trials == 3
