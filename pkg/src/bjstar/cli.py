"""Command line interface: JSON documents in, JSON reports out.

Exit codes: 0 positive answer, 1 negative answer, 2 indeterminate,
3 numerical budget exhausted, 64 usage error, 65 malformed document,
66 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .algebra import (
    AlgebraSignature,
    Element,
    InvalidElement,
    SVDConvergenceError,
    m0_subspace,
    spectral_norm,
    validate_blocks,
)
from .leftsym import left_symmetric_test
from .oracle import DEFAULT, Config, OracleError, bj_orthogonal, bj_orthogonal_direct, smooth_diagnostic
from .scalars import FieldTag, RingTag
from .structure import Mode, Unsupported, classify, pseudo_abelian_split
from .subspace import FSubspace

EX_OK, EX_NO, EX_INDETERMINATE, EX_BUDGET = 0, 1, 2, 3
EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66
SEED_MAX = 2**64 - 1


class UsageError(Exception):
    pass


class DocumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- documents ---------------------------------------------------------------


def _load_json(text: str, what: str):
    """Inline JSON when ``text`` starts with '{' or '[', otherwise a file path."""
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        source = stripped
    else:
        try:
            source = Path(text).read_text()
        except OSError as exc:
            raise FileNotFoundError(f"cannot read {what} {text!r}: {exc.strerror}") from exc
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{what}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def parse_algebra(doc) -> AlgebraSignature:
    if not isinstance(doc, dict) or set(doc) - {"field", "blocks"} or "field" not in doc or "blocks" not in doc:
        raise DocumentError("algebra document needs exactly the keys 'field' and 'blocks'")
    if doc["field"] not in ("R", "C"):
        raise DocumentError(f"field must be 'R' or 'C', got {doc['field']!r}")
    blocks = doc["blocks"]
    if not isinstance(blocks, list) or not blocks:
        raise DocumentError("'blocks' must be a non-empty list")
    out = []
    for k, b in enumerate(blocks):
        if not isinstance(b, dict) or set(b) != {"ring", "n"}:
            raise DocumentError(f"block {k}: expected keys 'ring' and 'n'")
        if b["ring"] not in ("R", "C", "H"):
            raise DocumentError(f"block {k}: ring must be R, C or H")
        n = b["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise DocumentError(f"block {k}: n must be a positive integer")
        out.append((n, RingTag(b["ring"])))
    sig = AlgebraSignature(FieldTag(doc["field"]), tuple(out))
    probs = sig.problems()
    if probs:
        raise DocumentError("; ".join(probs))
    return sig


def emit_algebra(sig: AlgebraSignature) -> dict:
    return {"field": sig.field.value, "blocks": [{"ring": r.value, "n": n} for n, r in sig.blocks]}


def _parse_blocks(sig: AlgebraSignature, blocks):
    if not isinstance(blocks, list) or len(blocks) != len(sig.blocks):
        raise DocumentError(f"expected {len(sig.blocks)} blocks")
    arrs = []
    for k, ((n, _), b) in enumerate(zip(sig.blocks, blocks)):
        try:
            arr = np.array(b, dtype=float)
        except (TypeError, ValueError) as exc:
            raise DocumentError(f"block {k}: entries must be numbers") from exc
        if arr.shape != (n, n, 4):
            raise DocumentError(f"block {k}: shape {arr.shape}, expected {(n, n, 4)}")
        arrs.append(arr)
    problem = validate_blocks(sig, arrs)
    if problem:
        raise DocumentError(problem)
    return arrs


def parse_element(doc, sig: AlgebraSignature = None) -> Element:
    if not isinstance(doc, dict) or "blocks" not in doc:
        raise DocumentError("element document needs a 'blocks' list")
    if "algebra" in doc:
        own = parse_algebra(doc["algebra"])
        if sig is not None and own != sig:
            raise DocumentError("element algebra does not match the -a algebra")
        sig = own
    if sig is None:
        raise DocumentError("element document has no algebra and none was given")
    return Element(sig, tuple(_parse_blocks(sig, doc["blocks"])))


def emit_element(e: Element) -> dict:
    return {"algebra": emit_algebra(e.signature), "blocks": [b.tolist() for b in e.blocks]}


def parse_subspace(doc, sig: AlgebraSignature) -> FSubspace:
    """{"spanning": [blocks, ...]}: the F-span of the listed elements."""
    if not isinstance(doc, dict) or "spanning" not in doc:
        raise DocumentError("subspace document needs a 'spanning' list")
    if "algebra" in doc and parse_algebra(doc["algebra"]) != sig:
        raise DocumentError("subspace algebra does not match the -a algebra")
    gens = doc["spanning"]
    if not isinstance(gens, list):
        raise DocumentError("'spanning' must be a list")
    return FSubspace.span(sig, [Element(sig, tuple(_parse_blocks(sig, g))) for g in gens])


def _finite(x):
    """JSON-safe floats: non-finite values become strings."""
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, np.ndarray):
        return _finite(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def dumps(doc) -> str:
    return json.dumps(_finite(doc), indent=2, allow_nan=False)


# -- commands ----------------------------------------------------------------


def _seed(value: str) -> int:
    try:
        s = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}")
    if not 0 <= s <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return s


def _positive(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def _cfg(args) -> Config:
    tol = getattr(args, "tol", None)
    return DEFAULT if tol is None else Config(tol=tol)


def _inputs(args, *names):
    sig = parse_algebra(_load_json(args.algebra, "algebra"))
    return sig, [parse_element(_load_json(getattr(args, n), n), sig) for n in names]


def cmd_norm(args, out):
    _, (a,) = _inputs(args, "x")
    out.append({"norm": spectral_norm(a), "block_norms": a.block_norms().tolist()})
    return EX_OK


def cmd_m0(args, out):
    _, (a,) = _inputs(args, "x")
    m0 = m0_subspace(a, _cfg(args).tol)
    out.append(
        {
            "attaining_blocks": list(m0.attaining),
            "real_dimension": m0.real_dim,
            "bases": [b.tolist() for b in m0.bases],
        }
    )
    return EX_OK


def cmd_check(args, out):
    _, (a, b) = _inputs(args, "x", "y")
    cfg = _cfg(args)
    verdicts = []
    if args.method in ("criterion", "both"):
        verdicts.append(bj_orthogonal(a, b, cfg))
    if args.method in ("direct", "both"):
        verdicts.append(bj_orthogonal_direct(a, b, cfg))
    indeterminate = any(v.indeterminate for v in verdicts)
    agree = len({v.orthogonal for v in verdicts}) == 1
    head = verdicts[0]
    doc = {
        "orthogonal": head.orthogonal if agree else None,
        "margin": min(v.margin for v in verdicts) if head.orthogonal else max(v.margin for v in verdicts),
        "witness": head.to_dict()["witness"],
        "method": args.method,
        "indeterminate": indeterminate or not agree,
    }
    if len(verdicts) > 1:
        doc["verdicts"] = [v.to_dict() for v in verdicts]
    out.append(doc)
    if doc["indeterminate"]:
        return EX_INDETERMINATE
    return EX_OK if head.orthogonal else EX_NO


def cmd_smooth(args, out):
    _, (a,) = _inputs(args, "x")
    cert, reason = smooth_diagnostic(a, _cfg(args))
    doc = {"smooth": cert is not None, "reason": reason}
    if cert is not None:
        doc.update(block=cert.block, vector=cert.u.tolist(), norm_gap=cert.norm_gap, sv_gap=cert.sv_gap)
    out.append(doc)
    return EX_OK if cert is not None else EX_NO


def cmd_leftsym(args, out):
    sig, (a,) = _inputs(args, "x")
    space = None
    if args.subspace:
        space = parse_subspace(_load_json(args.subspace, "subspace"), sig)
    rng = harness.suite_rng(args.seed, "leftsym")
    try:
        v = left_symmetric_test(a, space, _cfg(args), rng, args.samples)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    doc = v.to_dict()
    if v.counterexample is not None:
        doc["counterexample"] = emit_element(v.counterexample)
    out.append(doc)
    return EX_NO if v.falsified else EX_OK


def cmd_split(args, out):
    sig = parse_algebra(_load_json(args.algebra, "algebra"))
    rng = harness.suite_rng(args.seed, "split")
    res = pseudo_abelian_split(sig, Mode(args.mode), rng=rng)
    out.append(res.to_dict())
    return EX_OK


def cmd_classify(args, out):
    sig = parse_algebra(_load_json(args.algebra, "algebra"))
    rng = harness.suite_rng(args.seed, "classify")
    try:
        res = classify(sig, Mode(args.mode), rng)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    except Unsupported as exc:
        out.append({"signature": None, "mode": args.mode, "unsupported": str(exc)})
        return EX_BUDGET
    doc = {"signature": str(res.signature), "mode": res.mode.value}
    if res.extractions:
        doc["extractions"] = [
            {"n": x.n, "ring": x.ring.value, "s": x.s, "codim": x.codim, "m0_dim": x.m0_dim} for x in res.extractions
        ]
    if res.partition is not None:
        doc["pseudo_abelian_rings"] = [r.value for r in res.partition.rings()]
    out.append(doc)
    return EX_OK


def _merged(name, seed, reports):
    rep = harness.SuiteReport(name, seed)
    for r in reports:
        rep.merge(r)
    return rep


def _suite_corner_norms(seed, trials):
    return _merged(
        "corner-norms",
        seed,
        [harness.closed_form_suite(seed, trials or 200), harness.corner_free_suite(seed, 10_000)],
    )


def _over_signatures(name, fn, sigs, default):
    def run(seed, trials):
        return _merged(name, seed, [fn(s, seed, trials or default) for s in sigs])

    return run


def _suite_theorem(seed, trials):
    return _merged("theorem", seed, [harness.theorem_suite(seed=seed + i) for i in range(trials or 1)])


def _suite_annihilator(seed, trials):
    sigs = [
        AlgebraSignature.of(FieldTag.R, (2, RingTag.R), (3, RingTag.R)),
        AlgebraSignature.of(FieldTag.C, (2, RingTag.C), (2, RingTag.C)),
        AlgebraSignature.of(FieldTag.R, (2, RingTag.R), (2, RingTag.R)),
    ]
    return _merged(
        "annihilator", seed, [harness.annihilator_suite(s, seed + i) for s in sigs for i in range(trials or 1)]
    )


_MULTI = [s for s in harness.TEST_SIGNATURES if len(s.blocks) > 1]

SUITES = {
    "corner-norms": _suite_corner_norms,
    "counterexample": lambda seed, trials: harness.counterexample_suite(seed, trials or 100),
    "oracle-equiv": _over_signatures("oracle-equiv", harness.oracle_agreement_suite, harness.TEST_SIGNATURES, 1000),
    "submaximal": _over_signatures("submaximal", harness.moreover_suite, _MULTI, 1000),
    "invariance": _over_signatures("invariance", harness.invariance_suite, harness.TEST_SIGNATURES, 500),
    "theorem": _suite_theorem,
    "unimodular": lambda seed, trials: harness.unimodular_suite(seed, trials or 1000),
    "smoothness": lambda seed, trials: _merged("smoothness", seed, [harness.smoothness_suite(s) for s in harness.TEST_SIGNATURES]),
    "annihilator": _suite_annihilator,
}


def cmd_verify(args, out):
    rep = SUITES[args.suite](args.seed, args.trials)
    out.append(rep.to_dict())
    print(f"{rep.line()} wall={rep.wall_time:.2f}s", file=sys.stderr)
    return EX_OK if rep.ok else EX_NO


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bjstar", description="Birkhoff-James orthogonality in finite-dimensional C*-algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_alg(name, help_, elements=("x",)):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("-a", "--algebra", required=True, help="algebra document (path or inline JSON)")
        for e in elements:
            sp.add_argument(f"-{e}", required=True, help=f"element document {e.upper()}")
        return sp

    sp = with_alg("norm", "spectral norm")
    sp.set_defaults(func=cmd_norm)
    sp = with_alg("m0", "norm-attaining subspace")
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_m0)
    sp = with_alg("check", "is A BJ-orthogonal to B", ("x", "y"))
    sp.add_argument("--method", choices=["criterion", "direct", "both"], default="criterion")
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_check)
    sp = with_alg("smooth", "smoothness certificate")
    sp.set_defaults(func=cmd_smooth)
    sp = with_alg("leftsym", "search for a left-symmetry counterexample")
    sp.add_argument("--subspace", help="subspace document (spanning elements)")
    sp.add_argument("--samples", type=_positive, default=DEFAULT.samples)
    sp.add_argument("--seed", type=_seed, default=0)
    sp.set_defaults(func=cmd_leftsym)
    for name, func in (("split", cmd_split), ("classify", cmd_classify)):
        sp = sub.add_parser(name, help=f"{name} the algebra")
        sp.add_argument("-a", "--algebra", required=True)
        sp.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.ANALYTIC.value)
        sp.add_argument("--seed", type=_seed, default=0)
        sp.set_defaults(func=func)
    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", required=True, choices=sorted(SUITES))
    sp.add_argument("--seed", type=_seed, required=True)
    sp.add_argument("--trials", type=_positive)
    sp.set_defaults(func=cmd_verify)
    return p


def _check_threads():
    v = os.environ.get("BJSTAR_THREADS")
    if v is not None and not (v.isdigit() and int(v) >= 1):
        raise UsageError("BJSTAR_THREADS must be a positive integer")


def run_command(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    out = []
    try:
        _check_threads()
        args = build_parser().parse_args(argv)
        code = args.func(args, out)
    except UsageError as exc:
        print(f"bjstar: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except FileNotFoundError as exc:
        print(f"bjstar: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except (DocumentError, InvalidElement) as exc:
        print(f"bjstar: malformed input: {exc}", file=sys.stderr)
        return EX_DATAERR
    except (SVDConvergenceError, OracleError) as exc:
        print(f"bjstar: numerical budget exhausted: {exc}", file=sys.stderr)
        stdout.write(dumps({"error": str(exc), "partial": out}) + "\n")
        return EX_BUDGET
    for doc in out:
        stdout.write(dumps(doc) + "\n")
    return code


def main() -> None:
    sys.exit(run_command())
