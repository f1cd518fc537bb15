"""Construction and serialization of the target and skill models.

Both models factor over per-character variables conditioned on the binary
"is character i the target" flag rather than on the full n-valued target:
the untargeted case is uniform for every factor, so the tables stay
roster-size independent, shareable across encounters, and learnable by
counting. Only the target-persistence transition depends on the roster size.

Default table shapes are calibration values. Soft evidence enters through
two scalars: e_ally overwrites P(ally=false | targeted) and e_id overwrites
P(imminent_death=true | targeted).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .domains import (
    ALLY_SIDE_SKILLS,
    BOOL_ALLY,
    BOOL_ID,
    CLASSES,
    DELTA_HP,
    DISTANCE_ZONES,
    FOE_SIDE_SKILLS,
    HP_LEVELS,
    RESISTS,
    RESISTS_BY_ELEMENT,
    SKILLS,
    SKILL_ELEMENTS,
    TARGETED,
    skill_side,
)
from .prob import (
    ConditionalTable,
    Distribution,
    Domain,
    normalize,
    point_mass,
    uniform,
)

TARGET_FACTORS = ("hp_level", "distance", "ally", "delta_hp", "imminent_death", "class")
SKILL_FACTORS = TARGET_FACTORS + ("resists",)

#: Parent domains per factor, excluding the trailing TARGETED flag (and, for
#: the skill model, the SKILLS parent inserted before TARGETED).
FACTOR_PARENTS = {
    "hp_level": (BOOL_ALLY, CLASSES),
    "distance": (BOOL_ALLY,),
    "ally": (),
    "delta_hp": (BOOL_ALLY, CLASSES),
    "imminent_death": (),
    "class": (BOOL_ALLY,),
    "resists": (CLASSES,),
}
# The skill model drops the class parent from the HP-trend factor.
SKILL_FACTOR_PARENTS = dict(FACTOR_PARENTS)
SKILL_FACTOR_PARENTS["delta_hp"] = (BOOL_ALLY,)

FACTOR_CHILDREN = {
    "hp_level": HP_LEVELS,
    "distance": DISTANCE_ZONES,
    "ally": BOOL_ALLY,
    "delta_hp": DELTA_HP,
    "imminent_death": BOOL_ID,
    "class": CLASSES,
    "resists": RESISTS,
}

#: Fixed low-HP skew exponents for heal-type skills and the high-HP skew for
#: early debuffing; the target-side HP skew is parameterized instead.
SKILL_HP_EXPONENTS = {"big_heal": 4.0, "small_heal": 2.0, "HOT": 2.0}
DEBUFF_HP_EXPONENT = 2.0

#: P(imminent_death=true | skill, targeted=true): high for the big, decisive
#: skills, moderate for a quick heal, baseline otherwise.
SKILL_ID_TRUE = {"big_heal": 0.7, "big_dd": 0.7, "small_heal": 0.4}
SKILL_ID_DEFAULT = 0.3

#: Preferred casting ranges for the movement-lock skill.
ROOT_DISTANCE_WEIGHTS = {"Contact": 0.1, "Close": 0.5, "Far": 0.3, "VeryFar": 0.1}

#: Ranged-caster prior on where a targeted foe stands.
FOE_DISTANCE_WEIGHTS = {"Contact": 0.1, "Close": 0.2, "Far": 0.5, "VeryFar": 0.2}

#: HP-trend shape for the two cells where the trend is informative: a focused
#: enemy healer and our own tank under fire are both usually losing HP.
SKEWED_DELTA = {"minus": 0.6, "zero": 0.25, "plus": 0.15}


class InvalidParamsError(ValueError):
    """ModelParams violate their invariants."""


@dataclass(frozen=True)
class ModelParams:
    """Scalar knobs from which the default tables are built.

    Exactly one of ``persistence`` (probability of keeping the previous
    target) and ``prev_weight`` (unnormalized weight of the previous target
    against weight 1 for every other) must be set. ``table_overrides`` maps
    "target.<factor>", "skill.<factor>", or "skill.prior" to explicit tables
    and takes precedence over the built shapes.
    """

    e_ally: float = 0.6
    e_id: float = 0.9
    persistence: Optional[float] = 0.4
    prev_weight: Optional[float] = None
    hp_shape_exponent: float = 2.0
    resist_penalty: float = 0.1
    table_overrides: Optional[Mapping[str, ConditionalTable]] = None

    def __post_init__(self):
        if not 0.0 <= self.e_ally <= 1.0:
            raise InvalidParamsError(f"e_ally {self.e_ally} outside [0, 1]")
        if not 0.0 <= self.e_id <= 1.0:
            raise InvalidParamsError(f"e_id {self.e_id} outside [0, 1]")
        if (self.persistence is None) == (self.prev_weight is None):
            raise InvalidParamsError("set exactly one of persistence / prev_weight")
        if self.persistence is not None and not 0.0 < self.persistence < 1.0:
            raise InvalidParamsError(f"persistence {self.persistence} outside (0, 1)")
        if self.prev_weight is not None and not self.prev_weight > 0.0:
            raise InvalidParamsError(f"prev_weight {self.prev_weight} must be > 0")
        if self.hp_shape_exponent < 0.0:
            raise InvalidParamsError("hp_shape_exponent must be >= 0")
        if not 0.0 < self.resist_penalty <= 1.0:
            raise InvalidParamsError(
                f"resist_penalty {self.resist_penalty} outside (0, 1]"
            )
        if self.table_overrides is not None:
            object.__setattr__(self, "table_overrides", dict(self.table_overrides))

    def override(self, key: str) -> Optional[ConditionalTable]:
        if self.table_overrides is None:
            return None
        return self.table_overrides.get(key)

    def to_json(self) -> dict:
        doc = {
            "e_ally": self.e_ally,
            "e_id": self.e_id,
            "persistence": self.persistence,
            "prev_weight": self.prev_weight,
            "hp_shape_exponent": self.hp_shape_exponent,
            "resist_penalty": self.resist_penalty,
        }
        if self.table_overrides:
            doc["table_overrides"] = {
                k: t.to_json() for k, t in sorted(self.table_overrides.items())
            }
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ModelParams":
        overrides = None
        if doc.get("table_overrides"):
            overrides = {
                k: ConditionalTable.from_json(t)
                for k, t in doc["table_overrides"].items()
            }
        return cls(
            e_ally=doc["e_ally"],
            e_id=doc["e_id"],
            persistence=doc.get("persistence"),
            prev_weight=doc.get("prev_weight"),
            hp_shape_exponent=doc["hp_shape_exponent"],
            resist_penalty=doc["resist_penalty"],
            table_overrides=overrides,
        )


@dataclass(frozen=True)
class TargetModel:
    """Transition prior plus the six per-character factor tables of Eq-style
    target selection, built for a fixed roster size n."""

    n: int
    transition: ConditionalTable
    tables: Mapping[str, ConditionalTable] = field(repr=False)
    params: ModelParams = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tables", dict(self.tables))

    @property
    def slots(self) -> tuple[str, ...]:
        return self.transition.child.values


@dataclass(frozen=True)
class SkillModel:
    """Skill prior plus the seven per-character factor tables, conditioned on
    the chosen skill and the targeted flag. Roster-size independent."""

    skills: Domain
    prior: Distribution
    tables: Mapping[str, ConditionalTable] = field(repr=False)
    params: ModelParams = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tables", dict(self.tables))


def _rows_for(parents: tuple[Domain, ...]):
    return itertools.product(*(d.values for d in parents))


def _hp_skew(exponent: float, low: bool) -> Distribution:
    """HP-level shape: low=True favors wounded targets, else healthy ones."""
    if low:
        weights = [(10.0 - level) ** exponent for level in range(10)]
    else:
        weights = [(level + 1.0) ** exponent for level in range(10)]
    return normalize(weights, HP_LEVELS)


def _resist_row(element: str, penalty: float) -> Distribution:
    resisting = RESISTS_BY_ELEMENT[element]
    weights = [penalty if value in resisting else 1.0 for value in RESISTS.values]
    return normalize(weights, RESISTS)


def build_transition(params: ModelParams, n: int, slots: tuple[str, ...]) -> ConditionalTable:
    """P(target | previous target) with a 'none' row for the no-history case.

    With ``persistence`` p the previous target keeps p and the rest split
    (1-p)/(n-1) evenly; with ``prev_weight`` w the row is normalize({w, 1...}).
    """
    prev_domain = Domain("prev_target", slots + ("none",))
    child = Domain("target", slots)
    rows: dict[tuple[str, ...], Distribution] = {("none",): uniform(child)}
    for i, prev in enumerate(slots):
        if n == 1:
            rows[(prev,)] = Distribution(child, (1.0,))
        elif params.persistence is not None:
            p = params.persistence
            rest = (1.0 - p) / (n - 1)
            rows[(prev,)] = Distribution(
                child, tuple(p if j == i else rest for j in range(n))
            )
        else:
            w = params.prev_weight
            rows[(prev,)] = normalize(
                tuple(w if j == i else 1.0 for j in range(n)), child
            )
    return ConditionalTable(child, (prev_domain,), rows)


def build_target_model(params: ModelParams, n: int) -> TargetModel:
    """Assemble the target model for a roster of n alive characters."""
    if n < 1:
        raise InvalidParamsError(f"roster size {n} must be >= 1")
    slots = tuple(f"t{i}" for i in range(n))
    transition = build_transition(params, n, slots)

    tables: dict[str, ConditionalTable] = {}
    for factor in TARGET_FACTORS:
        key = f"target.{factor}"
        override = params.override(key)
        if override is not None:
            _check_factor_shape(override, factor, FACTOR_PARENTS[factor])
            tables[factor] = override
            continue
        child = FACTOR_CHILDREN[factor]
        parents = FACTOR_PARENTS[factor] + (TARGETED,)
        rows = {}
        for assignment in _rows_for(parents):
            *ctx, targeted = assignment
            if targeted == "false":
                rows[assignment] = uniform(child)
            else:
                rows[assignment] = _target_row(factor, tuple(ctx), params)
        tables[factor] = ConditionalTable(child, parents, rows)
    return TargetModel(n=n, transition=transition, tables=tables, params=params)


def _target_row(factor: str, ctx: tuple[str, ...], params: ModelParams) -> Distribution:
    """Targeted-case row of one Eq-1 factor for a parent context."""
    if factor == "ally":
        return Distribution(BOOL_ALLY, (params.e_ally, 1.0 - params.e_ally))
    if factor == "imminent_death":
        return Distribution(BOOL_ID, (1.0 - params.e_id, params.e_id))
    if factor == "hp_level":
        ally, cls = ctx
        if ally == "true" and cls in ("Tank", "Healer"):
            return _hp_skew(params.hp_shape_exponent, low=True)
        return uniform(HP_LEVELS)
    if factor == "distance":
        (ally,) = ctx
        if ally == "false":
            return Distribution(
                DISTANCE_ZONES,
                tuple(FOE_DISTANCE_WEIGHTS[z] for z in DISTANCE_ZONES.values),
            )
        return uniform(DISTANCE_ZONES)
    if factor == "delta_hp":
        ally, cls = ctx
        if (ally == "false" and cls == "Healer") or (ally == "true" and cls == "Tank"):
            return Distribution(
                DELTA_HP, tuple(SKEWED_DELTA[v] for v in DELTA_HP.values)
            )
        return uniform(DELTA_HP)
    if factor == "class":
        return uniform(CLASSES)
    raise KeyError(factor)


def build_skill_model(params: ModelParams) -> SkillModel:
    """Assemble the skill model: uniform prior over the 12 skills plus the
    seven factor tables conditioned on (skill, targeted)."""
    prior_override = params.override("skill.prior")
    if prior_override is not None:
        if prior_override.child != SKILLS or prior_override.parents:
            raise InvalidParamsError("skill.prior override must be a 0-parent table over skills")
        prior = prior_override.lookup(())
    else:
        prior = uniform(SKILLS)

    tables: dict[str, ConditionalTable] = {}
    for factor in SKILL_FACTORS:
        key = f"skill.{factor}"
        override = params.override(key)
        if override is not None:
            _check_factor_shape(override, factor, SKILL_FACTOR_PARENTS[factor], with_skill=True)
            tables[factor] = override
            continue
        child = FACTOR_CHILDREN[factor]
        parents = SKILL_FACTOR_PARENTS[factor] + (SKILLS, TARGETED)
        rows = {}
        for assignment in _rows_for(parents):
            *ctx, skill, targeted = assignment
            if targeted == "false":
                rows[assignment] = uniform(child)
            else:
                rows[assignment] = _skill_row(factor, tuple(ctx), skill, params)
        tables[factor] = ConditionalTable(child, parents, rows)
    return SkillModel(skills=SKILLS, prior=prior, tables=tables, params=params)


def _skill_row(
    factor: str, ctx: tuple[str, ...], skill: str, params: ModelParams
) -> Distribution:
    """Targeted-case row of one Eq-2 factor for a parent context and skill."""
    if factor == "ally":
        side = skill_side(skill)
        return point_mass(BOOL_ALLY, "true" if side == "ally" else "false")
    if factor == "imminent_death":
        p_true = SKILL_ID_TRUE.get(skill, SKILL_ID_DEFAULT)
        return Distribution(BOOL_ID, (1.0 - p_true, p_true))
    if factor == "hp_level":
        if skill in SKILL_HP_EXPONENTS:
            return _hp_skew(SKILL_HP_EXPONENTS[skill], low=True)
        if skill == "debuff_armor":
            return _hp_skew(DEBUFF_HP_EXPONENT, low=False)
        return uniform(HP_LEVELS)
    if factor == "distance":
        if skill == "root":
            return Distribution(
                DISTANCE_ZONES,
                tuple(ROOT_DISTANCE_WEIGHTS[z] for z in DISTANCE_ZONES.values),
            )
        return uniform(DISTANCE_ZONES)
    if factor == "delta_hp":
        return uniform(DELTA_HP)
    if factor == "class":
        return uniform(CLASSES)
    if factor == "resists":
        element = SKILL_ELEMENTS.get(skill)
        if element is None or skill_side(skill) == "ally":
            return uniform(RESISTS)
        return _resist_row(element, params.resist_penalty)
    raise KeyError(factor)


def _check_factor_shape(
    table: ConditionalTable,
    factor: str,
    ctx_parents: tuple[Domain, ...],
    with_skill: bool = False,
):
    expected = ctx_parents + ((SKILLS, TARGETED) if with_skill else (TARGETED,))
    if table.child != FACTOR_CHILDREN[factor] or table.parents != expected:
        raise InvalidParamsError(
            f"override for {factor!r} has wrong shape: parents "
            f"{[d.name for d in table.parents]}, child {table.child.name!r}"
        )


# ---------------------------------------------------------------------------
# Model bundle serialization: params + both table sets + skill classification.
# Floats survive the round trip bit-exactly (repr round-trips IEEE doubles).

BUNDLE_FORMAT = "bayes-arena-model"


def models_to_json(tm: TargetModel, sm: SkillModel) -> dict:
    return {
        "format": BUNDLE_FORMAT,
        "version": 1,
        "n": tm.n,
        "params": tm.params.to_json(),
        "skill_sides": {"ally": list(ALLY_SIDE_SKILLS), "foe": list(FOE_SIDE_SKILLS)},
        "target": {
            "transition": tm.transition.to_json(),
            "factors": {name: t.to_json() for name, t in sorted(tm.tables.items())},
        },
        "skill": {
            "prior": list(sm.prior.probs),
            "factors": {name: t.to_json() for name, t in sorted(sm.tables.items())},
        },
    }


def models_from_json(doc: dict) -> tuple[TargetModel, SkillModel]:
    if doc.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"not a {BUNDLE_FORMAT} document")
    params = ModelParams.from_json(doc["params"])
    tm = TargetModel(
        n=doc["n"],
        transition=ConditionalTable.from_json(doc["target"]["transition"]),
        tables={
            name: ConditionalTable.from_json(t)
            for name, t in doc["target"]["factors"].items()
        },
        params=params,
    )
    sm = SkillModel(
        skills=SKILLS,
        prior=Distribution(SKILLS, tuple(doc["skill"]["prior"])),
        tables={
            name: ConditionalTable.from_json(t)
            for name, t in doc["skill"]["factors"].items()
        },
        params=params,
    )
    return tm, sm


def save_models(path, tm: TargetModel, sm: SkillModel) -> None:
    with open(path, "w") as f:
        json.dump(models_to_json(tm, sm), f, sort_keys=True, indent=1)
        f.write("\n")


def load_models(path) -> tuple[TargetModel, SkillModel]:
    with open(path) as f:
        return models_from_json(json.load(f))


def rebuild_at_roster_size(tm: TargetModel, n: int) -> TargetModel:
    """Same factor tables and params, transition rebuilt for a new roster size.

    Used when characters die mid-episode: tables are roster-size independent,
    only the persistence prior needs the candidate count.
    """
    if n == tm.n:
        return tm
    slots = tuple(f"t{i}" for i in range(n))
    transition = build_transition(tm.params, n, slots)
    return TargetModel(n=n, transition=transition, tables=tm.tables, params=tm.params)
