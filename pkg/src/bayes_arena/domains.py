"""Fixed variable domains of the battle model, plus the observed-state types.

Nine variable families drive both decision models: per-character HP level,
distance zone, ally flag, HP trend, imminent death, class, and resists, plus
the target and skill variables. Domains are module-level constants so every
model, table, and serialized file agrees on value order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .prob import Domain

HP_LEVELS = Domain("hp_level", tuple(str(i) for i in range(10)))
DISTANCE_ZONES = Domain("distance", ("Contact", "Close", "Far", "VeryFar"))
BOOL_ALLY = Domain("ally", ("false", "true"))
DELTA_HP = Domain("delta_hp", ("minus", "zero", "plus"))
BOOL_ID = Domain("imminent_death", ("false", "true"))
CLASSES = Domain("class", ("Tank", "Contact", "Ranged", "Healer"))
RESISTS = Domain(
    "resists",
    ("Nothing", "Fire", "Ice", "Nature", "FireIce", "IceNat", "FireNat", "All"),
)

#: Condition "is this character the one being targeted" used to index every
#: per-character factor table; rows for "false" are uniform by construction.
TARGETED = Domain("targeted", ("false", "true"))

SKILLS = Domain(
    "skill",
    (
        "small_heal",
        "big_heal",
        "HOT",
        "poison_abol",
        "malediction_abol",
        "buff_armor",
        "regen_mana",
        "small_dd",
        "big_dd",
        "DOT",
        "debuff_armor",
        "root",
    ),
)

#: Which side each skill acts on. Ally-side skills carry a hard
#: P(ally=true | skill, targeted) = 1 row and vice versa.
ALLY_SIDE_SKILLS = (
    "small_heal",
    "big_heal",
    "HOT",
    "poison_abol",
    "malediction_abol",
    "buff_armor",
    "regen_mana",
)
FOE_SIDE_SKILLS = ("small_dd", "big_dd", "DOT", "debuff_armor", "root")

#: Element used by the resist table. debuff_armor is Nature-tagged here even
#: though it deals no elemental damage in the simulator.
SKILL_ELEMENTS = {
    "small_dd": "Nature",
    "big_dd": "Fire",
    "DOT": "Nature",
    "root": "Nature",
    "debuff_armor": "Nature",
}

#: Resist values that include each element.
RESISTS_BY_ELEMENT = {
    "Fire": frozenset({"Fire", "FireIce", "FireNat", "All"}),
    "Ice": frozenset({"Ice", "FireIce", "IceNat", "All"}),
    "Nature": frozenset({"Nature", "IceNat", "FireNat", "All"}),
}


def skill_side(skill: str) -> str:
    """'ally' or 'foe' for one of the 12 skills."""
    if skill in ALLY_SIDE_SKILLS:
        return "ally"
    if skill in FOE_SIDE_SKILLS:
        return "foe"
    raise KeyError(f"unknown skill {skill!r}")


def bool_label(flag: bool) -> str:
    return "true" if flag else "false"


@dataclass(frozen=True)
class CharacterState:
    """One character's observed and derived variables at a decision point."""

    id: str
    hp_level: int
    distance: str
    ally: bool
    delta_hp: str
    imminent_death: bool
    cls: str
    resists: str

    def __post_init__(self):
        if not 0 <= self.hp_level <= 9:
            raise ValueError(f"hp_level {self.hp_level} outside 0..9")
        if self.distance not in DISTANCE_ZONES:
            raise ValueError(f"unknown distance zone {self.distance!r}")
        if self.delta_hp not in DELTA_HP:
            raise ValueError(f"unknown delta_hp {self.delta_hp!r}")
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}")
        if self.resists not in RESISTS:
            raise ValueError(f"unknown resists {self.resists!r}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "hp_level": self.hp_level,
            "distance": self.distance,
            "ally": self.ally,
            "delta_hp": self.delta_hp,
            "imminent_death": self.imminent_death,
            "class": self.cls,
            "resists": self.resists,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CharacterState":
        return cls(
            id=doc["id"],
            hp_level=doc["hp_level"],
            distance=doc["distance"],
            ally=doc["ally"],
            delta_hp=doc["delta_hp"],
            imminent_death=doc["imminent_death"],
            cls=doc["class"],
            resists=doc["resists"],
        )


@dataclass(frozen=True)
class BattleSnapshot:
    """Alive roster plus the previous target: the Known of every question.

    A prev_target naming a character that is no longer in the roster is
    normalized to None (the previous target died since the last decision).
    """

    characters: tuple[CharacterState, ...]
    prev_target: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "characters", tuple(self.characters))
        if not self.characters:
            raise ValueError("snapshot needs at least one character")
        ids = [c.id for c in self.characters]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate character ids in snapshot: {ids}")
        if self.prev_target is not None and self.prev_target not in ids:
            object.__setattr__(self, "prev_target", None)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.characters)

    def character(self, char_id: str) -> CharacterState:
        for c in self.characters:
            if c.id == char_id:
                return c
        raise KeyError(f"no character {char_id!r} in snapshot")

    def target_domain(self) -> Domain:
        return Domain("target", self.ids)

    def to_json(self) -> dict:
        return {
            "characters": [c.to_json() for c in self.characters],
            "prev_target": self.prev_target,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BattleSnapshot":
        return cls(
            characters=tuple(CharacterState.from_json(c) for c in doc["characters"]),
            prev_target=doc.get("prev_target"),
        )
