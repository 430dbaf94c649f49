"""Recovering the block structure of an algebra from orthogonality alone.

Two modes.  ``analytic`` reads everything off the signature.  ``oracle`` works
through a :class:`Frame`: structured candidate elements (matrix units and unit
multiples) are pushed through a BJ-isomorphism, and from then on only
orthogonality queries, smooth hyperplanes and left-symmetry tests are used.
The frame's own block labels are consulted only to name the candidates and to
report which presented block a recovered subspace corresponds to.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import AlgebraSignature, Element, block_svd, m0_subspace, matrix_unit
from .isometry import BJIso, random_unitary
from .leftsym import left_symmetric_test
from .oracle import DEFAULT, Config, is_smooth, smooth_hyperplane
from .scalars import UNITS, FieldTag, RingTag, qadjoint, qmatmul, unit_basis
from .subspace import FSubspace, subspace_intersect


class Mode(str, enum.Enum):
    ANALYTIC = "analytic"
    ORACLE = "oracle"


class StructureError(RuntimeError):
    pass


class Unsupported(StructureError):
    """Oracle mode could not pin down the answer; nothing is guessed."""


@dataclass(frozen=True)
class StructureConfig:
    oracle: Config = DEFAULT
    ls_samples: int = 200
    confirm_samples: int = 1000
    verify_samples: int = 50
    batch: int = 50
    stall: int = 5
    max_rounds: int = 40
    max_tuple: int = 24
    cap: int = 8
    m0_draws: int = 5


STRUCT_DEFAULT = StructureConfig()


# -- signatures of isomorphism classes --------------------------------------


@dataclass(frozen=True)
class ClassSignature:
    field: FieldTag
    blocks: tuple  # sorted (n, RingTag) pairs

    @classmethod
    def of(cls, field_: FieldTag, blocks) -> "ClassSignature":
        items = sorted(((int(n), RingTag(r)) for n, r in blocks), key=lambda b: (-b[0], b[1].order))
        return cls(FieldTag(field_), tuple(items))

    @classmethod
    def from_signature(cls, sig: AlgebraSignature) -> "ClassSignature":
        return cls.of(sig.field, sig.blocks)

    @classmethod
    def parse(cls, text: str) -> "ClassSignature":
        head, _, body = text.partition(":")
        blocks = []
        for term in filter(None, (t.strip() for t in body.split("+"))):
            count, _, rest = term.partition("xM")
            n, _, ring = rest.partition("(")
            blocks += [(int(n), RingTag(ring.rstrip(")")))] * int(count)
        return cls.of(FieldTag(head.strip()), blocks)

    def __str__(self):
        counts = Counter(self.blocks)
        ordered = sorted(counts, key=lambda b: (-b[0], b[1].order))
        terms = [f"{counts[b]}xM{b[0]}({b[1].value})" for b in ordered]
        return f"{self.field.value}: " + " + ".join(terms)


# -- frames ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Frame:
    """An algebra seen through a BJ-isomorphism."""

    signature: AlgebraSignature
    iso: BJIso

    @classmethod
    def plain(cls, sig: AlgebraSignature) -> "Frame":
        return cls(sig, BJIso.identity(sig))

    def element(self, e: Element) -> Element:
        return self.iso.apply(e)

    def unit(self, block: int, s: int, t: int, mu=None) -> Element:
        return self.iso.apply(matrix_unit(self.signature, block, s, t, mu))

    def units(self, block: int):
        """Canonical unimodular multipliers of a block over the base field."""
        ring = self.signature.blocks[block][1]
        return [UNITS[0]] if self.signature.field is FieldTag.C else unit_basis(ring)

    def push(self, space: FSubspace) -> FSubspace:
        return FSubspace(self.signature, self.iso.matrix @ space.basis)

    def pull(self, space: FSubspace) -> FSubspace:
        return FSubspace(self.signature, self.iso.matrix.T @ space.basis)

    def presented_block_of(self, space: FSubspace, tol: float = 1e-6) -> Optional[int]:
        """Index of the presented block whose coordinates equal the pulled-back space."""
        back = self.pull(space)
        for k in range(len(self.signature.blocks)):
            if back.equals(FSubspace.blocks_supported(self.signature, [k]), tol):
                return k
        return None


# -- pseudo-abelian split ----------------------------------------------------


@dataclass(frozen=True)
class SplitResult:
    nonpseudo: tuple
    pseudo: tuple
    mode: Mode
    evidence: dict = field(default_factory=dict)
    nonpseudo_space: Optional[FSubspace] = None

    def to_dict(self) -> dict:
        return {
            "nonpseudo": list(self.nonpseudo),
            "pseudo": list(self.pseudo),
            "mode": self.mode.value,
            "evidence": self.evidence,
        }


def _ls_ok(z: Element, space, scfg: StructureConfig, rng, samples=None) -> bool:
    v = left_symmetric_test(z, space, scfg.oracle, rng, scfg.ls_samples if samples is None else samples)
    return not v.falsified


def pseudo_abelian_split(
    sig: AlgebraSignature,
    mode: Mode = Mode.ANALYTIC,
    scfg: StructureConfig = STRUCT_DEFAULT,
    rng=None,
    frame: Optional[Frame] = None,
) -> SplitResult:
    """Partition blocks into the nonpseudo-abelian (n > 1) and pseudo-abelian parts.

    Oracle mode tests the unit multiples of every block's corner entry for
    left-symmetry in the whole algebra.  The joint outgoing neighbourhood of the
    survivors is the nonpseudo-abelian summand; a block is pseudo-abelian when
    that subspace vanishes on it.
    """
    if sig.real_dimension < 2:
        raise ValueError("total dimension must be at least 2")
    mode = Mode(mode)
    if mode is Mode.ANALYTIC:
        non = tuple(k for k, (n, _) in enumerate(sig.blocks) if n > 1)
        pse = tuple(k for k, (n, _) in enumerate(sig.blocks) if n == 1)
        return SplitResult(non, pse, mode)
    frame = Frame.plain(sig) if frame is None else frame
    rng = np.random.default_rng(0) if rng is None else rng
    survivors, tested = [], 0
    for k in range(len(sig.blocks)):
        for mu in frame.units(k):
            z = frame.unit(k, 0, 0, mu)
            tested += 1
            if _ls_ok(z, None, scfg, rng):
                survivors.append(z)
    planes = [smooth_hyperplane(z, scfg.oracle) for z in survivors]
    space = subspace_intersect(planes) if planes else FSubspace.full(sig)
    back = frame.pull(space)
    non, pse = [], []
    for k in range(len(sig.blocks)):
        own = FSubspace.blocks_supported(sig, [k])
        inside = all(back.contains(c, 1e-6) for c in own.basis.T)
        outside = np.linalg.norm(back.basis.T @ own.basis) <= 1e-6
        if inside == outside:
            raise Unsupported(f"block {k} is neither inside nor orthogonal to the summand")
        (non if inside else pse).append(k)
    evidence = {"candidates": tested, "left_symmetric": len(survivors), "samples_each": scfg.ls_samples}
    return SplitResult(tuple(non), tuple(pse), mode, evidence, space)


# -- smooth tuples -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SmoothTuple:
    """Smooth elements (frame coordinates) attaining their norm in one block.

    ``presented`` keeps the members before the frame is applied, as (block,
    matrix) pairs, so isometries of the block can act on them.
    """

    elements: tuple
    presented: tuple
    block: Optional[int]

    def __len__(self):
        return len(self.elements)


def make_tuple(frame: Frame, presented, cfg: Config = DEFAULT) -> SmoothTuple:
    sig = frame.signature
    elems = []
    blocks = set()
    for k, mat in presented:
        e = frame.element(Element.zeros(sig).with_block(k, mat))
        if is_smooth(e, cfg) is None:
            raise StructureError("tuple member is not smooth")
        elems.append(e)
        blocks.add(m0_subspace(e, cfg.tol).attaining)
    block = next(iter(blocks))[0] if len(blocks) == 1 else None
    return SmoothTuple(tuple(elems), tuple(presented), block)


def tuple_space(t: SmoothTuple, ambient: Optional[FSubspace], cfg: Config = DEFAULT) -> FSubspace:
    planes = [smooth_hyperplane(e, cfg) for e in t.elements]
    if ambient is not None:
        planes.append(ambient)
    return subspace_intersect(planes)


def _families(frame: Frame, k: int):
    """Candidate tuple families for block k, as lists of (block, matrix)."""
    n = frame.signature.blocks[k][0]
    units = frame.units(k)

    def unit(s, t, mu):
        m = np.zeros((n, n, 4))
        m[s, t] = mu
        return (k, m)

    corner = [unit(0, 0, mu) for mu in units]
    keep = {(0, 1), (1, 0), (1, 1)}
    outside = [unit(s, t, mu) for s in range(n) for t in range(n) if (s, t) not in keep for mu in units]
    return [corner] if n == 2 else [corner, outside]


def _ls_candidates(frame: Frame, space: FSubspace, blocks):
    out = []
    for k in blocks:
        n = frame.signature.blocks[k][0]
        for s in range(n):
            for t in range(n):
                for mu in frame.units(k):
                    z = frame.unit(k, s, t, mu)
                    if space.contains(z, 1e-8):
                        out.append(z)
    return out


def find_left_symmetric(frame: Frame, space: FSubspace, blocks, scfg: StructureConfig, rng, limit=None):
    """Matrix-unit images in ``space`` that survive left-symmetry testing there."""
    found = []
    for z in _ls_candidates(frame, space, blocks):
        if _ls_ok(z, space, scfg, rng) and _ls_ok(z, space, scfg, rng, scfg.confirm_samples):
            found.append(z)
            if limit is not None and len(found) >= limit:
                break
    return found


def minimal_smooth_tuple(
    frame: Frame,
    blocks=None,
    ambient: Optional[FSubspace] = None,
    scfg: StructureConfig = STRUCT_DEFAULT,
    rng=None,
):
    """Smallest tuple (within the structured families) with a left-symmetric witness.

    Returns (s, tuple, witness).  For n = 2 the corner family yields s equal
    to the dimension of K over F, which is exact when K = F.  Larger blocks
    get the family that zeroes every entry outside a 2x2 corner-free pattern,
    an upper bound.
    """
    sig = frame.signature
    rng = np.random.default_rng(0) if rng is None else rng
    blocks = [k for k, (n, _) in enumerate(sig.blocks) if n > 1] if blocks is None else list(blocks)
    if any(sig.blocks[k][0] < 2 for k in blocks):
        raise ValueError("minimal smooth tuples need blocks with n >= 2")
    fams = {k: _families(frame, k) for k in blocks}
    for s in range(1, scfg.max_tuple + 1):
        for k in blocks:
            for fam in fams[k]:
                if len(fam) < s:
                    continue
                t = make_tuple(frame, fam[:s], scfg.oracle)
                space = tuple_space(t, ambient, scfg.oracle)
                order = [k] + [b for b in blocks if b != k]
                wit = find_left_symmetric(frame, space, order, scfg, rng, limit=1)
                if wit:
                    return s, t, wit[0]
    raise StructureError("tuple search exhausted its budget")


# -- successors and annihilators ---------------------------------------------


def _completion(v, ring: RingTag, rng):
    """Random unitary whose first column is the unit vector v (n, 4)."""
    from .algebra import qvec_inner
    from .scalars import qmul

    n = v.shape[0]
    cols = [v]
    while len(cols) < n:
        r = np.zeros((n, 4))
        r[:, : ring.dim] = rng.standard_normal((n, ring.dim))
        for a in cols:
            r = r - qmul(a, qvec_inner(r, a))
        nr = np.linalg.norm(r)
        if nr > 1e-8:
            cols.append(r / nr)
    return np.stack(cols, axis=1)


def _unitary_mapping(a, b, ring: RingTag, rng):
    """Random unitary W with W a = b for unit vectors a, b."""
    inner = random_unitary(a.shape[0], ring, rng, fix_e1=True)
    return qmatmul(qmatmul(_completion(b, ring, rng), inner), qadjoint(_completion(a, ring, rng)))


def _move(m, u, v, adjoint: bool):
    x = qadjoint(m) if adjoint else m
    return qmatmul(qmatmul(u, x), qadjoint(v))


def tuple_successors(current, frame: Frame, rng, scfg: StructureConfig = STRUCT_DEFAULT, ambient=None, witnesses=None):
    """New tuples sharing a member with an existing one.

    A member x y* (rank one) is fixed by X -> U X V* when U x = x and V y = y,
    and by X -> U X* V* when U y = x and V x = y; the other members move.  The
    image of the tuple's witness is re-checked for left-symmetry in the new
    intersection before the tuple is accepted.
    """
    sig = frame.signature
    out = []
    current = list(current)
    for _ in range(scfg.batch):
        t = current[int(rng.integers(len(current)))]
        wit = None if witnesses is None else witnesses.get(id(t))
        k, mat = t.presented[int(rng.integers(len(t.presented)))]
        ring = sig.blocks[k][1]
        y = block_svd(mat, ring).right[:, 0]
        x = _left_vector(mat, y, ring)
        adj = bool(rng.integers(2))
        if adj:
            u, v = _unitary_mapping(y, x, ring, rng), _unitary_mapping(x, y, ring, rng)
        else:
            u, v = _unitary_mapping(x, x, ring, rng), _unitary_mapping(y, y, ring, rng)
        moved = tuple((b, _move(m, u, v, adj)) for b, m in t.presented)
        if all(np.allclose(m0, m1) for (_, m0), (_, m1) in zip(t.presented, moved)):
            continue
        nt = make_tuple(frame, moved, scfg.oracle)
        if wit is not None:
            we = Element.from_coords(sig, frame.iso.pull_back_coords(wit.coords))
            new_w = frame.element(we.with_block(k, _move(we.blocks[k], u, v, adj)))
            space = tuple_space(nt, ambient, scfg.oracle)
            if not space.contains(new_w, 1e-8) or not _ls_ok(new_w, space, scfg, rng, scfg.verify_samples):
                continue
            witnesses[id(nt)] = new_w
        out.append(nt)
    return out


def _left_vector(mat, y, ring):
    from .scalars import qmatvec

    x = qmatvec(mat, y)
    return x / np.linalg.norm(x)


def block_annihilator(
    seed: SmoothTuple,
    frame: Frame,
    rng=None,
    scfg: StructureConfig = STRUCT_DEFAULT,
    ambient: Optional[FSubspace] = None,
    witness: Optional[Element] = None,
) -> FSubspace:
    """Elements (of ``ambient``) vanishing on the block where ``seed`` lives.

    The seed's hyperplanes are intersected over its sampled isometry orbit
    until the dimension is unchanged for ``stall`` rounds; then the outgoing
    neighbourhoods of the left-symmetric elements found inside are cut away.
    """
    sig = frame.signature
    rng = np.random.default_rng(0) if rng is None else rng
    if seed.block is None:
        raise StructureError("seed tuple is not concentrated in one block")
    ambient = FSubspace.full(sig) if ambient is None else ambient
    blocks = [k for k in range(len(sig.blocks)) if sig.blocks[k][0] > 1]
    base = tuple_space(seed, ambient, scfg.oracle)
    space = base
    pool = [seed]
    witnesses = {id(seed): witness} if witness is not None else None
    stable, rounds = 0, 0
    while stable < scfg.stall:
        rounds += 1
        if rounds > scfg.max_rounds:
            raise StructureError("orbit intersection did not stabilize")
        new = tuple_successors(pool, frame, rng, scfg, ambient, witnesses)
        if not new:
            stable += 1
            continue
        planes = [smooth_hyperplane(e, scfg.oracle) for t in new for e in t.elements]
        nxt = subspace_intersect([space] + planes)
        stable = stable + 1 if nxt.real_dim == space.real_dim else 0
        space = nxt
        pool.extend(new)
    cuts = []
    for s in (space, base):
        for z in find_left_symmetric(frame, s, blocks, scfg, rng):
            if is_smooth(z, scfg.oracle) is not None:
                cuts.append(smooth_hyperplane(z, scfg.oracle))
    return subspace_intersect([space] + cuts)


def analytic_annihilator(sig: AlgebraSignature, block: int) -> FSubspace:
    return FSubspace.blocks_vanishing(sig, [block])


# -- pseudo-abelian partition ------------------------------------------------


@dataclass(frozen=True)
class Ideal:
    block: int  # presented block index
    ring: RingTag
    coords: tuple  # frame coordinates spanned


@dataclass(frozen=True)
class Partition:
    ideals: tuple
    s: int
    evidence: dict

    def rings(self):
        return sorted((i.ring for i in self.ideals), key=lambda r: r.order)


def pseudo_abelian_partition(
    frame: Frame,
    blocks=None,
    rng=None,
    scfg: StructureConfig = STRUCT_DEFAULT,
) -> Partition:
    """Group single-entry left-symmetric elements into minimal ideals.

    Two left-symmetric elements lie in the same ideal exactly when their sum
    is again left-symmetric (a sum across ideals attains its norm on two blocks
    and is refuted).  The ring of an ideal is read from the real dimension of
    its span; the count of distinct outgoing neighbourhoods among random unit
    multiples serves as the finiteness check (one for R, unbounded otherwise),
    and cutting all but one generator must make it finite.
    """
    sig = frame.signature
    rng = np.random.default_rng(0) if rng is None else rng
    blocks = [k for k, (n, _) in enumerate(sig.blocks) if n == 1] if blocks is None else list(blocks)
    if any(sig.blocks[k][0] != 1 for k in blocks):
        raise ValueError("pseudo-abelian partition needs 1x1 blocks")
    cfg = scfg.oracle
    cands = [frame.unit(k, 0, 0, mu) for k in blocks for mu in frame.units(k)]
    for z in cands:
        if not _ls_ok(z, None, scfg, rng):
            raise Unsupported("a single-entry candidate is not left-symmetric")
    groups = []
    for z in cands:
        for g in groups:
            rep = g[0]
            if _ls_ok(_unit_sum(rep, z), None, scfg, rng):
                g.append(z)
                break
        else:
            groups.append([z])
    ideals, s_total, distinct = [], 0, []
    for g in groups:
        span = FSubspace.span(sig, g)
        real = span.real_dim
        if sig.field is FieldTag.C:
            ring = RingTag.C if real == 2 else None
        else:
            ring = {1: RingTag.R, 2: RingTag.C, 4: RingTag.H}.get(real)
        if ring is None:
            raise Unsupported(f"group of real dimension {real}")
        count = _distinct_neighbourhoods(span, sig, scfg, rng)
        finite_expected = real == 1 or sig.field is FieldTag.C
        if (count == 1) != finite_expected:
            raise Unsupported("neighbourhood count contradicts the inferred ring")
        s_here = 0 if finite_expected else real - 1
        if s_here:
            cut = subspace_intersect([span] + [smooth_hyperplane(z, cfg) for z in g[:s_here]])
            if _distinct_neighbourhoods(cut, sig, scfg, rng) != 1:
                raise Unsupported("cutting the ideal did not make its neighbourhoods finite")
        s_total += s_here
        distinct.append(count)
        block = frame.presented_block_of(span)
        if block is None:
            raise Unsupported("recovered ideal does not match a coordinate block")
        ideals.append(Ideal(block, ring, tuple(np.nonzero(np.abs(span.projector).sum(axis=1) > 1e-8)[0].tolist())))
    evidence = {"candidates": len(cands), "neighbourhood_counts": distinct}
    return Partition(tuple(ideals), s_total, evidence)


def _unit_sum(a: Element, b: Element) -> Element:
    c = a + b
    return c * (1.0 / c.norm())


def _distinct_neighbourhoods(span: FSubspace, sig, scfg: StructureConfig, rng) -> int:
    planes = []
    for _ in range(scfg.cap):
        z = span.random_element(rng)
        z = z * (1.0 / z.norm())
        if not _ls_ok(z, None, scfg, rng, scfg.verify_samples):
            raise Unsupported("a unit multiple inside an ideal is not left-symmetric")
        p = smooth_hyperplane(z, scfg.oracle)
        if not any(_same_plane(p, q) for q in planes):
            planes.append(p)
    return len(planes)


def _same_plane(p: FSubspace, q: FSubspace) -> bool:
    ang = p.principal_angles(q)
    return p.real_dim == q.real_dim and (ang.size == 0 or float(np.max(ang)) < 1e-6)


# -- classification ----------------------------------------------------------


@dataclass(frozen=True)
class Extraction:
    n: int
    ring: RingTag
    s: int
    codim: int
    m0_dim: int


@dataclass(frozen=True)
class Classification:
    signature: ClassSignature
    mode: Mode
    extractions: tuple = ()
    partition: Optional[Partition] = None
    split: Optional[SplitResult] = None


def classify(
    sig: AlgebraSignature,
    mode: Mode = Mode.ANALYTIC,
    rng=None,
    frame: Optional[Frame] = None,
    scfg: StructureConfig = STRUCT_DEFAULT,
) -> Classification:
    """*-isomorphism class of the algebra.

    Oracle mode: split off the pseudo-abelian part, then repeatedly find a
    minimal smooth tuple, compute its block annihilator and read the extracted
    block's size and ring from the codimension, the dimension of the
    norm-attaining space of random elements, and the tuple size.
    """
    mode = Mode(mode)
    if sig.real_dimension < 2:
        raise ValueError("total dimension must be at least 2")
    if mode is Mode.ANALYTIC:
        return Classification(ClassSignature.from_signature(sig), mode)
    rng = np.random.default_rng(0) if rng is None else rng
    frame = Frame.plain(sig) if frame is None else frame
    split = pseudo_abelian_split(sig, Mode.ORACLE, scfg, rng, frame)
    found = []
    extractions = []
    space = split.nonpseudo_space
    remaining = list(split.nonpseudo)
    while space.real_dim > 0:
        live = [k for k in remaining if space.contains(frame.unit(k, 0, 0))]
        if not live:
            raise Unsupported("no candidate block left inside the remaining summand")
        s, tup, wit = minimal_smooth_tuple(frame, live, space, scfg, rng)
        ann = block_annihilator(tup, frame, rng, scfg, space, wit)
        codim = space.real_dim - ann.real_dim
        if codim <= 0:
            raise StructureError("extraction did not reduce the dimension")
        removed = subspace_intersect([space, ann.complement()])
        d_hat = _m0_dimension(removed, sig, scfg, rng)
        ext = _read_block(sig.field, codim, d_hat, s)
        extractions.append(ext)
        found.append((ext.n, ext.ring))
        space = ann
        remaining = [k for k in remaining if space.contains(frame.unit(k, 0, 0))]
    part = None
    if split.pseudo:
        part = pseudo_abelian_partition(frame, split.pseudo, rng, scfg)
        found += [(1, i.ring) for i in part.ideals]
    return Classification(ClassSignature.of(sig.field, found), mode, tuple(extractions), part, split)


def _m0_dimension(space: FSubspace, sig, scfg, rng) -> int:
    dims = []
    for _ in range(scfg.m0_draws):
        e = space.random_element(rng)
        dims.append(m0_subspace(e, scfg.oracle.tol).real_dim)
    return min(dims)


def _read_block(field_: FieldTag, codim: int, m0_real: int, s: int) -> Extraction:
    if field_ is FieldTag.C:
        if codim % 2 or m0_real != 2:
            raise Unsupported(f"complex codimension {codim / 2}, attaining dimension {m0_real}")
        d, ring, c = 1, RingTag.C, codim // 2
    else:
        ring = {1: RingTag.R, 2: RingTag.C, 4: RingTag.H}.get(m0_real)
        if ring is None:
            raise Unsupported(f"attaining dimension {m0_real}")
        d, c = m0_real, codim
    n = math.isqrt(c // d) if c % d == 0 else 0
    if n < 2 or n * n * d != c:
        raise Unsupported(f"codimension {codim} does not fit attaining dimension {m0_real}")
    if (s == 1) != (n == 2 and d == 1):
        raise Unsupported(f"tuple size {s} contradicts M{n}({ring.value})")
    return Extraction(n, ring, s, codim, m0_real)
