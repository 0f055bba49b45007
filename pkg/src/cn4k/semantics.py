"""Finite frames and models with two monotone valuations, and the support relation.

Worlds are stored by index; ``Frame.worlds`` keeps their display names. Truth
sets are Python ints used as bitsets over world indices.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .formula import And, Box, Dia, Formula, Impl, Neg, Or, Polarity, Var, variables as formula_variables
from .logics import CLASS_EQUALITIES, RELATIONS, FrameClass

Pair = tuple[int, int]


class EvaluationError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    worlds: tuple[str, ...]
    leq: frozenset[Pair]
    r_box_pos: frozenset[Pair] = frozenset()
    r_box_neg: frozenset[Pair] = frozenset()
    r_dia_pos: frozenset[Pair] = frozenset()
    r_dia_neg: frozenset[Pair] = frozenset()

    @classmethod
    def build(cls, worlds: Sequence[str], leq: Iterable[tuple[str, str]], **relations) -> "Frame":
        """Construct from world names; relations given as name pairs (not closed)."""
        idx = {w: i for i, w in enumerate(worlds)}

        def conv(pairs):
            try:
                return frozenset((idx[a], idx[b]) for a, b in pairs)
            except KeyError as e:
                raise ModelFormatError(f"unknown world {e.args[0]!r}") from None

        rels = {name: conv(relations.get(name, ())) for name in RELATIONS}
        extra = set(relations) - set(RELATIONS)
        if extra:
            raise ModelFormatError(f"unknown relation(s): {sorted(extra)}")
        return cls(tuple(worlds), conv(leq), **rels)

    @property
    def size(self) -> int:
        return len(self.worlds)

    def relation(self, name: str) -> frozenset[Pair]:
        return getattr(self, name)

    def index(self, w: str | int) -> int:
        if isinstance(w, int) and not isinstance(w, bool):
            if 0 <= w < len(self.worlds):
                return w
        elif w in self.worlds:
            return self.worlds.index(w)
        raise EvaluationError(f"unknown world {w!r}")


@dataclass(frozen=True)
class Report:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def reflexive_transitive_closure(n: int, pairs: Iterable[Pair]) -> frozenset[Pair]:
    reach = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        reach[a][b] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return frozenset((i, j) for i in range(n) for j in range(n) if reach[i][j])


def check_frame(frame: Frame, cls: FrameClass = FrameClass.GENERAL) -> Report:
    """Preorder laws for ``leq`` plus the relation equalities demanded by ``cls``."""
    out = []
    n, leq, names = frame.size, frame.leq, frame.worlds
    if n == 0:
        out.append(("empty", "frame has no worlds"))
    for i in range(n):
        if (i, i) not in leq:
            out.append(("reflexivity", names[i], names[i]))
    for (a, b), (c, d) in itertools.product(sorted(leq), repeat=2):
        if b == c and (a, d) not in leq:
            out.append(("transitivity", names[a], names[d]))
    for r1, r2 in CLASS_EQUALITIES[cls]:
        if frame.relation(r1) != frame.relation(r2):
            out.append(("class", cls.value, f"{r1} != {r2}"))
    return Report(tuple(dict.fromkeys(out)))


@dataclass(frozen=True, eq=False)
class Model:
    frame: Frame
    v_pos: Mapping[str, frozenset[int]]
    v_neg: Mapping[str, frozenset[int]]
    declared: frozenset[str] = frozenset()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.declared:
            object.__setattr__(self, "declared", frozenset(self.v_pos) | frozenset(self.v_neg))

    @classmethod
    def build(cls, frame: Frame, v_pos: Mapping[str, Iterable[str]] | None = None,
              v_neg: Mapping[str, Iterable[str]] | None = None,
              declared: Iterable[str] = ()) -> "Model":
        v_pos = v_pos or {}
        v_neg = v_neg or {}
        decl = frozenset(declared) | frozenset(v_pos) | frozenset(v_neg)
        pos = {p: frozenset(frame.index(w) for w in v_pos.get(p, ())) for p in decl}
        neg = {p: frozenset(frame.index(w) for w in v_neg.get(p, ())) for p in decl}
        return cls(frame, pos, neg, decl)


def check_model(m: Model) -> Report:
    """Monotonicity violations ``(pol, p, w, w')`` of both valuations."""
    out = []
    names = m.frame.worlds
    for pol, val in (("pos", m.v_pos), ("neg", m.v_neg)):
        for p in sorted(val):
            for a, b in sorted(m.frame.leq):
                if a in val[p] and b not in val[p]:
                    out.append((pol, p, names[a], names[b]))
    return Report(tuple(out))


def trivial_model(declared: Iterable[str] = ("p", "q", "r")) -> Model:
    """One world, every relation the identity, every variable both true and false."""
    loop = frozenset({(0, 0)})
    frame = Frame(("w",), loop, loop, loop, loop, loop)
    decl = frozenset(declared)
    full = frozenset({0})
    return Model(frame, {p: full for p in decl}, {p: full for p in decl}, decl)


# --------------------------------------------------------------------------
# support
# --------------------------------------------------------------------------

class _Structure:
    """Successor bitmasks of a frame, shared by all evaluations on it."""

    def __init__(self, frame: Frame):
        n = frame.size
        self.n = n
        self.full = (1 << n) - 1
        self.up = [0] * n
        for a, b in frame.leq:
            self.up[a] |= 1 << b
        self.succ = {}
        for name in RELATIONS:
            s = [0] * n
            for a, b in frame.relation(name):
                s[a] |= 1 << b
            self.succ[name] = s

    def forall_up(self, good: int) -> int:
        out = 0
        for w in range(self.n):
            if self.up[w] & ~good == 0:
                out |= 1 << w
        return out

    def box_like(self, rel: str, s: int) -> int:
        # worlds all of whose rel-successors lie in s
        good = 0
        for w, succ in enumerate(self.succ[rel]):
            if succ & ~s == 0:
                good |= 1 << w
        return self.forall_up(good)

    def dia_like(self, rel: str, s: int) -> int:
        # worlds with some rel-successor in s
        good = 0
        for w, succ in enumerate(self.succ[rel]):
            if succ & s:
                good |= 1 << w
        return self.forall_up(good)


def _structure(m: Model) -> _Structure:
    st = m._cache.get("structure")
    if st is None:
        st = m._cache["structure"] = _Structure(m.frame)
    return st


def extension(m: Model, pol: Polarity, f: Formula) -> int:
    """Bitset of worlds where ``f`` is supported with polarity ``pol``."""
    memo = m._cache.setdefault("ext", {})
    key = (f, pol)
    hit = memo.get(key)
    if hit is not None:
        return hit
    st = _structure(m)
    pos = pol is Polarity.POS
    if isinstance(f, Var):
        if f.name not in m.declared:
            raise EvaluationError(f"variable {f.name!r} is not declared by the model")
        ws = (m.v_pos if pos else m.v_neg).get(f.name, frozenset())
        res = sum(1 << w for w in ws)
    elif isinstance(f, Neg):
        res = extension(m, pol.flip(), f.sub)
    elif isinstance(f, And):
        a, b = extension(m, pol, f.l), extension(m, pol, f.r)
        res = a & b if pos else a | b
    elif isinstance(f, Or):
        a, b = extension(m, pol, f.l), extension(m, pol, f.r)
        res = a | b if pos else a & b
    elif isinstance(f, Impl):
        a = extension(m, Polarity.POS, f.l)
        b = extension(m, pol, f.r)
        res = st.forall_up(~a & st.full | b) if pos else a & b
    elif isinstance(f, Box):
        s = extension(m, pol, f.sub)
        res = st.box_like("r_box_pos", s) if pos else st.dia_like("r_box_neg", s)
    elif isinstance(f, Dia):
        s = extension(m, pol, f.sub)
        res = st.dia_like("r_dia_pos", s) if pos else st.box_like("r_dia_neg", s)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[key] = res
    return res


def supports(m: Model, w: str | int, pol: Polarity, f: Formula) -> bool:
    i = m.frame.index(w)
    return bool(extension(m, pol, f) >> i & 1)


def sequent_holds(m: Model, w: str | int, s) -> bool:
    from .sequent import formula_interpretation

    return supports(m, w, Polarity.POS, formula_interpretation(s))


def persistence_check(m: Model, sample: Iterable[Formula]) -> bool:
    for f in sample:
        for pol in Polarity:
            ext = extension(m, pol, f)
            for a, b in m.frame.leq:
                if ext >> a & 1 and not ext >> b & 1:
                    return False
    return True


# --------------------------------------------------------------------------
# frame validity: all monotone valuations at once
# --------------------------------------------------------------------------

def up_sets(frame: Frame) -> list[frozenset[int]]:
    """Up-closed world sets of the frame's preorder, ordered by size then members."""
    n = frame.size
    up = [0] * n
    for a, b in frame.leq:
        up[a] |= 1 << b
    out = []
    for mask in range(1 << n):
        if all(up[w] & ~mask == 0 for w in range(n) if mask >> w & 1):
            out.append(mask)
    out.sort(key=lambda m: (bin(m).count("1"), [w for w in range(n) if m >> w & 1]))
    return [frozenset(w for w in range(n) if m >> w & 1) for m in out]


class LaneSpace:
    """Every monotone valuation of ``names`` over a preorder, one bit lane each.

    Lane index is a mixed-radix number whose digits are, per variable in
    sorted order, the indices of the chosen positive and negative up-sets
    (first variable's positive up-set most significant).
    """

    def __init__(self, frame: Frame, names: Iterable[str]):
        self.names = sorted(set(names))
        self.upsets = up_sets(frame)
        self.n = frame.size
        u = len(self.upsets)
        digits = 2 * len(self.names)
        self.count = u ** digits
        self.full = (1 << self.count) - 1
        self._u = u
        self.var_masks: dict[tuple[str, bool], list[int]] = {}
        for d in range(digits):
            weight = u ** (digits - 1 - d)
            period = weight * u
            reps = self.count // period
            repeat = ((1 << (period * reps)) - 1) // ((1 << period) - 1)
            per_world = [0] * self.n
            for a, us in enumerate(self.upsets):
                block = ((1 << weight) - 1) << (a * weight)
                lanes = block * repeat
                for w in us:
                    per_world[w] |= lanes
            name = self.names[d // 2]
            self.var_masks[(name, d % 2 == 0)] = per_world

    def decode(self, lane: int) -> tuple[dict[str, frozenset[int]], dict[str, frozenset[int]]]:
        u = self._u
        digits = []
        for _ in range(2 * len(self.names)):
            digits.append(lane % u)
            lane //= u
        digits.reverse()
        pos, neg = {}, {}
        for i, name in enumerate(self.names):
            pos[name] = self.upsets[digits[2 * i]]
            neg[name] = self.upsets[digits[2 * i + 1]]
        return pos, neg


def _lane_extension(frame: Frame, space: LaneSpace, f: Formula, pol: Polarity,
                    memo: dict, succ: dict[str, list[int]], up: list[int]) -> list[int]:
    key = (f, pol)
    if key in memo:
        return memo[key]
    n, full = space.n, space.full
    pos = pol is Polarity.POS

    def forall_up(good):
        out = []
        for w in range(n):
            acc = full
            for v in up[w]:
                acc &= good[v]
            out.append(acc)
        return out

    def box_like(rel, s):
        good = []
        for w in range(n):
            acc = full
            for v in succ[rel][w]:
                acc &= s[v]
            good.append(acc)
        return forall_up(good)

    def dia_like(rel, s):
        good = []
        for w in range(n):
            acc = 0
            for v in succ[rel][w]:
                acc |= s[v]
            good.append(acc)
        return forall_up(good)

    rec = lambda g, p: _lane_extension(frame, space, g, p, memo, succ, up)  # noqa: E731
    if isinstance(f, Var):
        res = space.var_masks[(f.name, pos)]
    elif isinstance(f, Neg):
        res = rec(f.sub, pol.flip())
    elif isinstance(f, And):
        a, b = rec(f.l, pol), rec(f.r, pol)
        res = [x & y for x, y in zip(a, b)] if pos else [x | y for x, y in zip(a, b)]
    elif isinstance(f, Or):
        a, b = rec(f.l, pol), rec(f.r, pol)
        res = [x | y for x, y in zip(a, b)] if pos else [x & y for x, y in zip(a, b)]
    elif isinstance(f, Impl):
        a, b = rec(f.l, Polarity.POS), rec(f.r, pol)
        if pos:
            res = forall_up([(~x & full) | y for x, y in zip(a, b)])
        else:
            res = [x & y for x, y in zip(a, b)]
    elif isinstance(f, Box):
        s = rec(f.sub, pol)
        res = box_like("r_box_pos", s) if pos else dia_like("r_box_neg", s)
    elif isinstance(f, Dia):
        s = rec(f.sub, pol)
        res = dia_like("r_dia_pos", s) if pos else box_like("r_dia_neg", s)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[key] = res
    return res


@dataclass(frozen=True)
class FrameValidation:
    valid: bool
    v_pos: Mapping[str, frozenset[int]] | None = None
    v_neg: Mapping[str, frozenset[int]] | None = None
    world: int | None = None

    def __bool__(self) -> bool:
        return self.valid

    def countermodel(self, frame: Frame) -> Model | None:
        if self.valid:
            return None
        return Model(frame, dict(self.v_pos), dict(self.v_neg), frozenset(self.v_pos))


def frame_validates(frame: Frame, f: Formula, space: LaneSpace | None = None) -> FrameValidation:
    """Is ``f`` positively supported everywhere under every monotone valuation?

    On failure the witness is the first valuation in lane order, at the
    highest-indexed world where it fails.
    """
    if space is None:
        space = LaneSpace(frame, formula_variables(f))
    n = frame.size
    up = [[b for b in range(n) if (a, b) in frame.leq] for a in range(n)]
    succ = {name: [[b for b in range(n) if (a, b) in frame.relation(name)] for a in range(n)]
            for name in RELATIONS}
    ext = _lane_extension(frame, space, f, Polarity.POS, {}, succ, up)
    fails = [space.full & ~e for e in ext]
    best = None
    for x in fails:
        if x:
            low = (x & -x).bit_length() - 1
            best = low if best is None else min(best, low)
    if best is None:
        return FrameValidation(True)
    world = max(w for w in range(n) if fails[w] >> best & 1)
    v_pos, v_neg = space.decode(best)
    return FrameValidation(False, v_pos, v_neg, world)


# --------------------------------------------------------------------------
# model files
# --------------------------------------------------------------------------

_CLASS_COPIES = {
    # relation -> ordered sources to copy from when absent
    "mono": {r: [s for s in RELATIONS if s != r] for r in RELATIONS},
    "pm": {"r_dia_pos": ["r_box_pos"], "r_box_pos": ["r_dia_pos"],
           "r_dia_neg": ["r_box_neg"], "r_box_neg": ["r_dia_neg"]},
    "yv": {"r_box_neg": ["r_box_pos"], "r_box_pos": ["r_box_neg"],
           "r_dia_neg": ["r_dia_pos"], "r_dia_pos": ["r_dia_neg"]},
    "join": {"r_dia_neg": ["r_box_pos"], "r_box_pos": ["r_dia_neg"],
             "r_box_neg": ["r_dia_pos"], "r_dia_pos": ["r_box_neg"]},
    "general": {},
}


def _pairs(value, what: str) -> list[tuple[str, str]]:
    out = []
    for item in value or []:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ModelFormatError(f"{what}: expected [world, world] pairs, got {item!r}")
        out.append((str(item[0]), str(item[1])))
    return out


def model_from_dict(data: Mapping, close: bool = False) -> Model:
    """Build a model from the structured file layout.

    Keys: ``worlds``, ``leq``, ``r_box_pos`` ... ``r_dia_neg`` (or ``r`` for
    all of them), optional ``class`` shorthand, ``variables``, ``v_pos``,
    ``v_neg``. ``close=True`` takes the reflexive-transitive closure of leq.
    """
    if not isinstance(data, Mapping):
        raise ModelFormatError("model must be a mapping")
    if "worlds" not in data:
        raise ModelFormatError("model needs a 'worlds' list")
    worlds = [str(w) for w in data["worlds"]]
    if not worlds or len(set(worlds)) != len(worlds):
        raise ModelFormatError("worlds must be a nonempty list of distinct names")
    leq = _pairs(data.get("leq"), "leq")
    rels = {name: _pairs(data[name], name) for name in RELATIONS if name in data}
    if "r" in data:
        shared = _pairs(data["r"], "r")
        for name in RELATIONS:
            rels.setdefault(name, shared)
    cls = str(data.get("class", "general")).lower()
    if cls not in _CLASS_COPIES:
        raise ModelFormatError(f"unknown frame class {cls!r}")
    for target, sources in _CLASS_COPIES[cls].items():
        if target not in rels:
            for s in sources:
                if s in rels:
                    rels[target] = rels[s]
                    break
    frame = Frame.build(worlds, leq, **rels)
    if close:
        frame = Frame(frame.worlds, reflexive_transitive_closure(frame.size, frame.leq),
                      frame.r_box_pos, frame.r_box_neg, frame.r_dia_pos, frame.r_dia_neg)
    v_pos = {str(k): [str(w) for w in (v or [])] for k, v in (data.get("v_pos") or {}).items()}
    v_neg = {str(k): [str(w) for w in (v or [])] for k, v in (data.get("v_neg") or {}).items()}
    declared = [str(v) for v in data.get("variables", [])]
    try:
        return Model.build(frame, v_pos, v_neg, declared)
    except EvaluationError as e:
        raise ModelFormatError(str(e)) from None


def model_to_dict(m: Model) -> dict:
    names = m.frame.worlds

    def pairs(rel):
        return [[names[a], names[b]] for a, b in sorted(rel)]

    out = {"worlds": list(names), "leq": pairs(m.frame.leq)}
    for name in RELATIONS:
        out[name] = pairs(m.frame.relation(name))
    out["variables"] = sorted(m.declared)
    out["v_pos"] = {p: [names[w] for w in sorted(m.v_pos.get(p, ()))] for p in sorted(m.declared)}
    out["v_neg"] = {p: [names[w] for w in sorted(m.v_neg.get(p, ()))] for p in sorted(m.declared)}
    return out


def load_model(path: str | Path, close: bool = False) -> Model:
    text = Path(path).read_text(encoding="utf-8")
    return parse_model(text, close=close)


def parse_model(text: str, close: bool = False) -> Model:
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ModelFormatError(f"cannot parse model file: {e}") from None
    return model_from_dict(data, close=close)


def dump_model(m: Model, as_json: bool = False) -> str:
    data = model_to_dict(m)
    if as_json:
        return json.dumps(data, indent=2)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)
