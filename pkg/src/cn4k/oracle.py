"""Brute-force references: countermodel search, a second evaluator, generators.

The countermodel search enumerates frames up to a world bound: preorders up
to isomorphism, then accessibility relations up to automorphisms of the
preorder. Only relations the formula can observe are enumerated; the
others are left empty, which cannot change the formula's support. For each
frame all monotone valuations are checked at once with the bit-lane
evaluator of the semantics module.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Mapping

from .formula import And, Box, Dia, Formula, Impl, Neg, Or, Polarity, Var, subformulas, variables
from .logics import RELATIONS, FrameClass, relation_groups
from .semantics import (
    EvaluationError,
    Frame,
    LaneSpace,
    Model,
    _lane_extension,
    frame_validates,
    reflexive_transitive_closure,
)


@dataclass(frozen=True)
class SearchBounds:
    max_worlds: int = 3
    max_candidates: int | None = None
    variables: frozenset[str] | None = None

    def __post_init__(self):
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be at least 1")


@dataclass(frozen=True)
class Countermodel:
    model: Model
    world: int

    @property
    def world_name(self) -> str:
        return self.model.frame.worlds[self.world]


@dataclass(frozen=True)
class SearchOutcome:
    countermodel: Countermodel | None
    frames_checked: int
    complete: bool   # False if max_candidates stopped the enumeration early


# --------------------------------------------------------------------------
# frame enumeration
# --------------------------------------------------------------------------

def _is_transitive(n: int, rel: frozenset) -> bool:
    return all((a, d) in rel for (a, b) in rel for (c, d) in rel if b == c)


def _permute(pairs, perm) -> frozenset:
    return frozenset((perm[a], perm[b]) for a, b in pairs)


def canonical_preorders(n: int) -> list[frozenset]:
    """One preorder per isomorphism class, on worlds ``0..n-1``."""
    off = [(a, b) for a in range(n) for b in range(n) if a != b]
    refl = frozenset((i, i) for i in range(n))
    perms = list(itertools.permutations(range(n)))
    seen = set()
    out = []
    for bits in range(1 << len(off)):
        rel = refl | {off[k] for k in range(len(off)) if bits >> k & 1}
        rel = frozenset(rel)
        if not _is_transitive(n, rel):
            continue
        canon = min(tuple(sorted(_permute(rel, p))) for p in perms)
        if canon in seen:
            continue
        seen.add(canon)
        out.append(frozenset(canon))
    return out


def _automorphisms(n: int, leq: frozenset) -> list[tuple[int, ...]]:
    return [p for p in itertools.permutations(range(n)) if _permute(leq, p) == leq]


def relevant_relations(f: Formula, positive: bool = True) -> frozenset[str]:
    """Relations whose contents can affect support of ``f`` with the given root polarity."""
    out: set[str] = set()
    seen: set = set()
    stack = [(f, positive)]
    while stack:
        g, pos = stack.pop()
        if (g, pos) in seen:
            continue
        seen.add((g, pos))
        if isinstance(g, Var):
            continue
        if isinstance(g, Neg):
            stack.append((g.sub, not pos))
        elif isinstance(g, (And, Or)):
            stack += [(g.l, pos), (g.r, pos)]
        elif isinstance(g, Impl):
            stack += [(g.l, True), (g.r, pos)]
        elif isinstance(g, Box):
            out.add("r_box_pos" if pos else "r_box_neg")
            stack.append((g.sub, pos))
        elif isinstance(g, Dia):
            out.add("r_dia_pos" if pos else "r_dia_neg")
            stack.append((g.sub, pos))
    return frozenset(out)


def _relation_from_mask(n: int, mask: int) -> frozenset:
    return frozenset((k // n, k % n) for k in range(n * n) if mask >> k & 1)


def _mask_perm(n: int, perm) -> list[int]:
    # where each pair bit goes under the permutation
    return [perm[k // n] * n + perm[k % n] for k in range(n * n)]


def _apply_mask(mask: int, mapping: list[int]) -> int:
    out = 0
    k = 0
    while mask:
        if mask & 1:
            out |= 1 << mapping[k]
        mask >>= 1
        k += 1
    return out


def enumerate_frames(cls: FrameClass, max_worlds: int,
                     relevant: frozenset[str] | None = None) -> Iterator[Frame]:
    """Frames of ``cls`` up to isomorphism, smallest first.

    Relation blocks (sets of relations forced equal by ``cls``) that contain
    no relevant relation are fixed to the empty relation.
    """
    relevant = frozenset(RELATIONS) if relevant is None else relevant
    blocks = [b for b in relation_groups(cls) if set(b) & relevant]
    for n in range(1, max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(n))
        for leq in canonical_preorders(n):
            autos = [_mask_perm(n, p) for p in _automorphisms(n, leq) if list(p) != list(range(n))]
            for masks in itertools.product(range(1 << (n * n)), repeat=len(blocks)):
                if autos and any(tuple(_apply_mask(m, a) for m in masks) < masks for a in autos):
                    continue
                rels = {r: frozenset() for r in RELATIONS}
                for block, mask in zip(blocks, masks):
                    rel = _relation_from_mask(n, mask)
                    for r in block:
                        rels[r] = rel
                yield Frame(worlds, leq, **rels)


# --------------------------------------------------------------------------
# countermodel search
# --------------------------------------------------------------------------

def _modal_free(f: Formula) -> bool:
    return not any(isinstance(g, (Box, Dia)) for g in subformulas(f))


def search_countermodel(f: Formula, cls: FrameClass, bounds: SearchBounds = SearchBounds()) -> SearchOutcome:
    names = sorted(set(variables(f)) | set(bounds.variables or ()))
    relevant = relevant_relations(f)
    checked = 0
    spaces: dict[frozenset, tuple[LaneSpace, dict, list]] = {}
    for frame in enumerate_frames(cls, bounds.max_worlds, relevant):
        if bounds.max_candidates is not None and checked >= bounds.max_candidates:
            return SearchOutcome(None, checked, False)
        checked += 1
        n = frame.size
        cached = spaces.get(frame.leq)
        if cached is None:
            space = LaneSpace(frame, names)
            up = [[b for b in range(n) if (a, b) in frame.leq] for a in range(n)]
            # modal-free parts do not depend on the relations: evaluate them once per preorder
            base: dict = {}
            bare = Frame(frame.worlds, frame.leq)
            empty = {r: [[] for _ in range(n)] for r in RELATIONS}
            _lane_extension(bare, space, f, Polarity.POS, base, empty, up)
            base = {k: v for k, v in base.items() if _modal_free(k[0])}
            cached = spaces[frame.leq] = (space, base, up)
        space, base, up = cached
        succ = {r: [[b for b in range(n) if (a, b) in frame.relation(r)] for a in range(n)]
                for r in RELATIONS}
        ext = _lane_extension(frame, space, f, Polarity.POS, dict(base), succ, up)
        if any(space.full & ~e for e in ext):
            fv = frame_validates(frame, f, space)
            model = fv.countermodel(frame)
            return SearchOutcome(Countermodel(model, fv.world), checked, True)
    return SearchOutcome(None, checked, True)


def find_countermodel(f: Formula, cls: FrameClass, bounds: SearchBounds = SearchBounds()) -> Countermodel | None:
    """First model (in canonical enumeration order) of ``cls`` falsifying ``f`` somewhere."""
    return search_countermodel(f, cls, bounds).countermodel


# --------------------------------------------------------------------------
# independent evaluator
# --------------------------------------------------------------------------

def reference_supports(m: Model, w: str | int, pol: Polarity, f: Formula) -> bool:
    """Direct recursive evaluation over world names and pair sets.

    Written separately from the bitset evaluator so the two can be compared.
    """
    frame = m.frame
    names = frame.worlds
    if isinstance(w, int) and not isinstance(w, bool):
        if not 0 <= w < len(names):
            raise EvaluationError(f"unknown world {w!r}")
        world = names[w]
    elif w in names:
        world = w
    else:
        raise EvaluationError(f"unknown world {w!r}")

    def named(rel):
        return {(names[a], names[b]) for a, b in rel}

    leq = named(frame.leq)
    rel = {r: named(frame.relation(r)) for r in RELATIONS}
    vp = {p: {names[i] for i in ws} for p, ws in m.v_pos.items()}
    vn = {p: {names[i] for i in ws} for p, ws in m.v_neg.items()}

    def above(x):
        return [y for y in names if (x, y) in leq]

    def succ(r, x):
        return [y for y in names if (x, y) in rel[r]]

    def sup(x: str, positive: bool, g: Formula) -> bool:
        if isinstance(g, Var):
            if g.name not in m.declared:
                raise EvaluationError(f"variable {g.name!r} is not declared by the model")
            return x in (vp if positive else vn).get(g.name, set())
        if isinstance(g, Neg):
            return sup(x, not positive, g.sub)
        if isinstance(g, And):
            if positive:
                return sup(x, True, g.l) and sup(x, True, g.r)
            return sup(x, False, g.l) or sup(x, False, g.r)
        if isinstance(g, Or):
            if positive:
                return sup(x, True, g.l) or sup(x, True, g.r)
            return sup(x, False, g.l) and sup(x, False, g.r)
        if isinstance(g, Impl):
            if positive:
                return all(not sup(y, True, g.l) or sup(y, True, g.r) for y in above(x))
            return sup(x, True, g.l) and sup(x, False, g.r)
        if isinstance(g, Box):
            if positive:
                return all(all(sup(z, True, g.sub) for z in succ("r_box_pos", y)) for y in above(x))
            return all(any(sup(z, False, g.sub) for z in succ("r_box_neg", y)) for y in above(x))
        if isinstance(g, Dia):
            if positive:
                return all(any(sup(z, True, g.sub) for z in succ("r_dia_pos", y)) for y in above(x))
            return all(all(sup(z, False, g.sub) for z in succ("r_dia_neg", y)) for y in above(x))
        raise TypeError(f"not a formula: {g!r}")

    return sup(world, pol is Polarity.POS, f)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusProfile:
    max_size: int = 6
    variables: int = 2
    count: int = 100


_VAR_NAMES = "pqrstuvw"


def random_formula(rng: random.Random, size: int, atoms: list[str]) -> Formula:
    """Random formula with exactly ``size`` nodes."""
    if size <= 1:
        return Var(rng.choice(atoms))
    if size == 2 or rng.random() < 0.35:
        op = rng.choice((Neg, Box, Dia))
        return op(random_formula(rng, size - 1, atoms))
    op = rng.choice((And, Or, Impl))
    k = rng.randint(1, size - 2)
    return op(random_formula(rng, k, atoms), random_formula(rng, size - 1 - k, atoms))


def corpus_generate(seed: int, profile: CorpusProfile | Mapping = CorpusProfile()) -> list[Formula]:
    """Deterministic pseudo-random formulas; the same seed gives the same list."""
    if isinstance(profile, Mapping):
        profile = CorpusProfile(**profile)
    rng = random.Random(seed)
    atoms = list(_VAR_NAMES[: profile.variables])
    return [random_formula(rng, rng.randint(1, profile.max_size), atoms) for _ in range(profile.count)]


def _up_close(leq: frozenset, ws: set[int]) -> frozenset[int]:
    return frozenset(b for (a, b) in leq if a in ws)


def random_frame(rng: random.Random, cls: FrameClass, n: int, density: float = 0.35) -> Frame:
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    leq = reflexive_transitive_closure(n, [p for p in pairs if rng.random() < density / 1.5])
    rels = {}
    for block in relation_groups(cls):
        rel = frozenset((a, b) for a in range(n) for b in range(n) if rng.random() < density)
        for r in block:
            rels[r] = rel
    return Frame(tuple(f"w{i}" for i in range(n)), leq, **rels)


def random_model(rng: random.Random, cls: FrameClass, max_worlds: int = 3,
                 names: list[str] | tuple[str, ...] = ("p", "q")) -> Model:
    """A well-formed model of ``cls``: preorder, class equalities and monotonicity hold."""
    n = rng.randint(1, max_worlds)
    frame = random_frame(rng, cls, n)
    v_pos, v_neg = {}, {}
    for p in names:
        v_pos[p] = _up_close(frame.leq, {w for w in range(n) if rng.random() < 0.4})
        v_neg[p] = _up_close(frame.leq, {w for w in range(n) if rng.random() < 0.4})
    return Model(frame, v_pos, v_neg, frozenset(names))
