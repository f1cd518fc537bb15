"""Shared builders: random model/snapshot generators and the recovery pair."""

from __future__ import annotations

import itertools
import random

import pytest

from bayes_arena.domains import (
    BOOL_ALLY,
    BOOL_ID,
    BattleSnapshot,
    CLASSES,
    CharacterState,
    DELTA_HP,
    DISTANCE_ZONES,
    HP_LEVELS,
    RESISTS,
    SKILLS,
    TARGETED,
)
from bayes_arena.model import (
    FACTOR_CHILDREN,
    FACTOR_PARENTS,
    ModelParams,
    SKILL_FACTORS,
    SKILL_FACTOR_PARENTS,
    TARGET_FACTORS,
    build_skill_model,
    build_target_model,
)
from bayes_arena.prob import ConditionalTable, Distribution, normalize, uniform
from bayes_arena.sim import World, builtin_setup


def random_table(rng, child, parents, floor=0.01):
    rows = {}
    for key in itertools.product(*(d.values for d in parents)):
        rows[key] = normalize([rng.random() + floor for _ in child.values], child)
    return ConditionalTable(child, tuple(parents), rows)


def random_models(rng, n):
    """Fully random factor tables (no zeros) for oracle-agreement fuzzing."""
    overrides = {}
    for f in TARGET_FACTORS:
        overrides[f"target.{f}"] = random_table(
            rng, FACTOR_CHILDREN[f], FACTOR_PARENTS[f] + (TARGETED,)
        )
    for f in SKILL_FACTORS:
        overrides[f"skill.{f}"] = random_table(
            rng, FACTOR_CHILDREN[f], SKILL_FACTOR_PARENTS[f] + (SKILLS, TARGETED)
        )
    params = ModelParams(
        persistence=rng.uniform(0.1, 0.9), table_overrides=overrides
    )
    return build_target_model(params, n), build_skill_model(params)


def random_snapshot(rng, n, with_prev=None):
    if with_prev is None:
        with_prev = rng.random() < 0.5
    chars = []
    for i in range(n):
        chars.append(
            CharacterState(
                id=f"c{i}",
                hp_level=rng.randrange(10),
                distance=rng.choice(DISTANCE_ZONES.values),
                ally=rng.random() < 0.5,
                delta_hp=rng.choice(DELTA_HP.values),
                imminent_death=rng.random() < 0.5,
                cls=rng.choice(CLASSES.values),
                resists=rng.choice(RESISTS.values),
            )
        )
    prev = f"c{rng.randrange(n)}" if with_prev else None
    return BattleSnapshot(tuple(chars), prev)


def uniform_table(child, parents):
    rows = {
        key: uniform(child)
        for key in itertools.product(*(d.values for d in parents))
    }
    return ConditionalTable(child, tuple(parents), rows)


def uniform_models(n, persistence=None):
    """Every factor table uniform; transition per persistence (default 1/n)."""
    overrides = {}
    for f in TARGET_FACTORS:
        overrides[f"target.{f}"] = uniform_table(
            FACTOR_CHILDREN[f], FACTOR_PARENTS[f] + (TARGETED,)
        )
    for f in SKILL_FACTORS:
        overrides[f"skill.{f}"] = uniform_table(
            FACTOR_CHILDREN[f], SKILL_FACTOR_PARENTS[f] + (SKILLS, TARGETED)
        )
    if persistence is None:
        persistence = 1.0 / n if n > 1 else 0.5
    params = ModelParams(persistence=persistence, table_overrides=overrides)
    return build_target_model(params, n), build_skill_model(params)


# ---------------------------------------------------------------------------
# Recovery-test generator: a model pair whose two factorizations describe one
# and the same joint distribution, so counting can recover every table.
#
# Consistency requirements: each skill-side table must be skill-independent
# and equal to what the target-side tables imply (the HP-trend table needs a
# class mixture because the skill model drops the class parent). Structural
# zeros gate the reachable parent space so every reachable row collects
# thousands of observations at 50k records and unreachable rows collect
# exactly none.

RECOVERY_N = 7
RECOVERY_SUPPORT_SKILLS = ("small_heal", "big_dd", "DOT", "root")
RECOVERY_CLASSES = ("Tank", "Contact")


def _gated(domain, support, rng=None, spread=0.5):
    """Distribution supported on ``support``; random-ish, zero elsewhere."""
    weights = []
    for v in domain.values:
        if v in support:
            base = 1.0
            if rng is not None:
                base = spread + rng.random()
            weights.append(base)
        else:
            weights.append(0.0)
    return normalize(weights, domain)


def make_recovery_pair(seed):
    rng = random.Random(seed)

    ally_rows = {
        ("true",): Distribution(BOOL_ALLY, (1.0, 0.0)),  # targeted => foe
        ("false",): Distribution(BOOL_ALLY, (0.5, 0.5)),
    }
    class_rows = {}
    for ally, targ in itertools.product(BOOL_ALLY.values, TARGETED.values):
        if ally == "true" and targ == "true":
            class_rows[(ally, targ)] = uniform(CLASSES)  # unreachable filler
        else:
            class_rows[(ally, targ)] = _gated(CLASSES, RECOVERY_CLASSES)

    def reachable(ally, targ, cls=None):
        if ally == "true" and targ == "true":
            return False
        return cls is None or cls in RECOVERY_CLASSES

    hp_rows, delta_rows, dist_rows = {}, {}, {}
    for ally, cls, targ in itertools.product(
        BOOL_ALLY.values, CLASSES.values, TARGETED.values
    ):
        if reachable(ally, targ, cls):
            hp_rows[(ally, cls, targ)] = normalize(
                [0.5 + rng.random() for _ in HP_LEVELS.values], HP_LEVELS
            )
            delta_rows[(ally, cls, targ)] = normalize(
                [0.5 + rng.random() for _ in DELTA_HP.values], DELTA_HP
            )
        else:
            hp_rows[(ally, cls, targ)] = uniform(HP_LEVELS)
            delta_rows[(ally, cls, targ)] = uniform(DELTA_HP)
    for ally, targ in itertools.product(BOOL_ALLY.values, TARGETED.values):
        if reachable(ally, targ):
            dist_rows[(ally, targ)] = normalize(
                [0.5 + rng.random() for _ in DISTANCE_ZONES.values], DISTANCE_ZONES
            )
        else:
            dist_rows[(ally, targ)] = uniform(DISTANCE_ZONES)
    id_rows = {
        ("true",): Distribution(BOOL_ID, (0.65, 0.35)),
        ("false",): Distribution(BOOL_ID, (0.8, 0.2)),
    }

    overrides = {
        "target.ally": ConditionalTable(BOOL_ALLY, (TARGETED,), ally_rows),
        "target.class": ConditionalTable(CLASSES, (BOOL_ALLY, TARGETED), class_rows),
        "target.hp_level": ConditionalTable(
            HP_LEVELS, (BOOL_ALLY, CLASSES, TARGETED), hp_rows
        ),
        "target.delta_hp": ConditionalTable(
            DELTA_HP, (BOOL_ALLY, CLASSES, TARGETED), delta_rows
        ),
        "target.distance": ConditionalTable(
            DISTANCE_ZONES, (BOOL_ALLY, TARGETED), dist_rows
        ),
        "target.imminent_death": ConditionalTable(BOOL_ID, (TARGETED,), id_rows),
    }

    # Skill-side tables: equal to the target-side ones for every skill.
    def lift(table, ctx_parents):
        parents = ctx_parents + (SKILLS, TARGETED)
        rows = {}
        for key in itertools.product(*(d.values for d in parents)):
            *ctx, _skill, targ = key
            rows[key] = table.rows[tuple(ctx) + (targ,)]
        return ConditionalTable(table.child, parents, rows)

    overrides["skill.ally"] = lift(overrides["target.ally"], ())
    overrides["skill.class"] = lift(overrides["target.class"], (BOOL_ALLY,))
    overrides["skill.hp_level"] = lift(
        overrides["target.hp_level"], (BOOL_ALLY, CLASSES)
    )
    overrides["skill.distance"] = lift(overrides["target.distance"], (BOOL_ALLY,))
    overrides["skill.imminent_death"] = lift(overrides["target.imminent_death"], ())

    # HP trend drops the class parent: mix the class-conditional rows.
    delta2_rows = {}
    for ally, skill, targ in itertools.product(
        BOOL_ALLY.values, SKILLS.values, TARGETED.values
    ):
        class_row = class_rows[(ally, targ)]
        mixed = [0.0] * len(DELTA_HP)
        for ci, cls in enumerate(CLASSES.values):
            w = class_row.probs[ci]
            if w == 0.0:
                continue
            row = delta_rows[(ally, cls, targ)]
            for vi in range(len(DELTA_HP)):
                mixed[vi] += w * row.probs[vi]
        delta2_rows[(ally, skill, targ)] = normalize(mixed, DELTA_HP)
    overrides["skill.delta_hp"] = ConditionalTable(
        DELTA_HP, (BOOL_ALLY, SKILLS, TARGETED), delta2_rows
    )

    resist_rows = {}
    for cls, skill, targ in itertools.product(
        CLASSES.values, SKILLS.values, TARGETED.values
    ):
        if cls in RECOVERY_CLASSES and skill in RECOVERY_SUPPORT_SKILLS:
            resist_rows[(cls, skill, targ)] = normalize(
                [0.5 + rng.random() for _ in RESISTS.values], RESISTS
            )
        else:
            resist_rows[(cls, skill, targ)] = uniform(RESISTS)
    overrides["skill.resists"] = ConditionalTable(
        RESISTS, (CLASSES, SKILLS, TARGETED), resist_rows
    )

    overrides["skill.prior"] = ConditionalTable(
        SKILLS, (), {(): _gated(SKILLS, RECOVERY_SUPPORT_SKILLS)}
    )

    params = ModelParams(persistence=0.35, table_overrides=overrides)
    return build_target_model(params, RECOVERY_N), build_skill_model(params)


@pytest.fixture(scope="session")
def setup_a_snapshot():
    return World(builtin_setup("A")).snapshot()


@pytest.fixture(scope="session")
def setup_b_snapshot():
    return World(builtin_setup("B")).snapshot()
