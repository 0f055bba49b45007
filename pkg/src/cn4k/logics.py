"""The five logics and the frame classes they are complete for."""

from __future__ import annotations

import enum


class FrameClass(enum.Enum):
    GENERAL = "general"
    PM = "pm"
    YV = "yv"
    JOIN = "join"
    MONO = "mono"


class LogicId(enum.Enum):
    CN4K = "cn4k"
    CN4K_PM = "pm"
    CN4K_YV = "yv"
    CN4K_JOIN = "join"
    CN4K_ONE = "one"

    @classmethod
    def from_name(cls, name: str) -> "LogicId":
        key = name.strip().lower()
        for logic in cls:
            if key in (logic.value, logic.name.lower()):
                return logic
        raise ValueError(f"unknown logic {name!r}; expected one of cn4k, pm, yv, join, one")

    @property
    def frame_class(self) -> FrameClass:
        return _FRAME_CLASS[self]

    def extends(self, other: "LogicId") -> bool:
        """True if every theorem of ``other`` is a theorem of ``self``."""
        return other is self or other is LogicId.CN4K or self is LogicId.CN4K_ONE


_FRAME_CLASS = {
    LogicId.CN4K: FrameClass.GENERAL,
    LogicId.CN4K_PM: FrameClass.PM,
    LogicId.CN4K_YV: FrameClass.YV,
    LogicId.CN4K_JOIN: FrameClass.JOIN,
    LogicId.CN4K_ONE: FrameClass.MONO,
}

ALL_LOGICS = tuple(LogicId)

# relation names in a frame, in canonical order
RELATIONS = ("r_box_pos", "r_box_neg", "r_dia_pos", "r_dia_neg")

# pairs of relations a frame class forces to coincide
CLASS_EQUALITIES: dict[FrameClass, tuple[tuple[str, str], ...]] = {
    FrameClass.GENERAL: (),
    FrameClass.PM: (("r_box_pos", "r_dia_pos"), ("r_box_neg", "r_dia_neg")),
    FrameClass.YV: (("r_box_pos", "r_box_neg"), ("r_dia_pos", "r_dia_neg")),
    FrameClass.JOIN: (("r_box_pos", "r_dia_neg"), ("r_dia_pos", "r_box_neg")),
    FrameClass.MONO: (
        ("r_box_pos", "r_box_neg"),
        ("r_box_pos", "r_dia_pos"),
        ("r_box_pos", "r_dia_neg"),
    ),
}


def relation_groups(cls: FrameClass) -> list[tuple[str, ...]]:
    """Partition of the four relations into blocks forced equal by ``cls``."""
    parent = {r: r for r in RELATIONS}

    def find(r):
        while parent[r] != r:
            r = parent[r]
        return r

    for a, b in CLASS_EQUALITIES[cls]:
        parent[find(b)] = find(a)
    groups: dict[str, list[str]] = {}
    for r in RELATIONS:
        groups.setdefault(find(r), []).append(r)
    return [tuple(g) for g in groups.values()]
