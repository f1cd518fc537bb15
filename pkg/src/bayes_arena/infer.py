"""Posterior evaluation and action selection.

The production path scores candidates in log space against the factored
models. The two brute_force_* functions answer the same questions through
the raw quotient formula — summing the joint, evaluated at the observed
state, over every non-observed variable in plain linear arithmetic — and
exist purely as test oracles for the factored path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .domains import BattleSnapshot, CharacterState, bool_label
from .model import SkillModel, TargetModel
from .prob import (
    AllZeroError,
    Distribution,
    LOG_ZERO,
    log_normalize,
    log_score,
    normalize,
)


class RosterMismatchError(ValueError):
    """Snapshot roster size does not match the target model's n."""


class TooLargeError(ValueError):
    """Brute-force oracle asked to enumerate beyond its intended scale."""


@dataclass(frozen=True)
class RankedActions:
    """Joint (target, skill) probabilities sorted best-first.

    Ties in probability fall back to target then skill domain order, so the
    ranking is deterministic.
    """

    entries: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        total = sum(p for _, _, p in self.entries)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"joint entries sum to {total!r}, not 1")

    def top(self) -> tuple[str, str, float]:
        return self.entries[0]


def _character_values(c: CharacterState) -> dict[str, str]:
    return {
        "hp_level": str(c.hp_level),
        "distance": c.distance,
        "ally": bool_label(c.ally),
        "delta_hp": c.delta_hp,
        "imminent_death": bool_label(c.imminent_death),
        "resists": c.resists,
        "class": c.cls,
    }


def _target_factors(
    tm: TargetModel, c: CharacterState, targeted: str
) -> list[float]:
    v = _character_values(c)
    ally, cls = v["ally"], v["class"]
    t = tm.tables
    return [
        t["hp_level"].rows[(ally, cls, targeted)].prob(v["hp_level"]),
        t["distance"].rows[(ally, targeted)].prob(v["distance"]),
        t["ally"].rows[(targeted,)].prob(ally),
        t["delta_hp"].rows[(ally, cls, targeted)].prob(v["delta_hp"]),
        t["imminent_death"].rows[(targeted,)].prob(v["imminent_death"]),
        t["class"].rows[(ally, targeted)].prob(cls),
    ]


def _skill_factors(
    sm: SkillModel, c: CharacterState, skill: str, targeted: str
) -> list[float]:
    v = _character_values(c)
    ally, cls = v["ally"], v["class"]
    t = sm.tables
    return [
        t["hp_level"].rows[(ally, cls, skill, targeted)].prob(v["hp_level"]),
        t["distance"].rows[(ally, skill, targeted)].prob(v["distance"]),
        t["ally"].rows[(skill, targeted)].prob(ally),
        t["delta_hp"].rows[(ally, skill, targeted)].prob(v["delta_hp"]),
        t["resists"].rows[(cls, skill, targeted)].prob(v["resists"]),
        t["imminent_death"].rows[(skill, targeted)].prob(v["imminent_death"]),
        t["class"].rows[(ally, skill, targeted)].prob(cls),
    ]


def _transition_row(tm: TargetModel, snapshot: BattleSnapshot) -> Distribution:
    """Transition row for the snapshot's previous target, mapped onto slots.

    Snapshot ids map to model slots by roster order; a missing previous
    target selects the uniform 'none' row (identical to marginalizing the
    previous target under its uniform prior).
    """
    if snapshot.prev_target is None:
        return tm.transition.rows[("none",)]
    prev_slot = tm.slots[snapshot.ids.index(snapshot.prev_target)]
    return tm.transition.rows[(prev_slot,)]


def target_posterior(tm: TargetModel, snapshot: BattleSnapshot) -> Distribution:
    """P(target | everything observed) under the factored target model."""
    chars = snapshot.characters
    if len(chars) != tm.n:
        raise RosterMismatchError(
            f"snapshot has {len(chars)} characters, model built for {tm.n}"
        )
    trans = _transition_row(tm, snapshot)
    # Per-character factor products for both values of the targeted flag;
    # candidate i combines its own targeted product with everyone else's
    # untargeted one.
    off_scores = [log_score(_target_factors(tm, c, "false")) for c in chars]
    on_scores = [log_score(_target_factors(tm, c, "true")) for c in chars]
    zero_off = {j for j, s in enumerate(off_scores) if s == LOG_ZERO}
    finite_off_sum = sum(s for s in off_scores if s != LOG_ZERO)

    scores = []
    for i in range(len(chars)):
        if trans.probs[i] == 0.0 or on_scores[i] == LOG_ZERO or zero_off - {i}:
            scores.append(LOG_ZERO)
            continue
        off_sum = finite_off_sum - (off_scores[i] if i not in zero_off else 0.0)
        scores.append(math.log(trans.probs[i]) + on_scores[i] + off_sum)
    return log_normalize(scores, snapshot.target_domain())


def skill_given_target(
    sm: SkillModel, snapshot: BattleSnapshot, target: str
) -> Distribution:
    """P(skill | target, everything observed). The target prior cancels."""
    chars = snapshot.characters
    if target not in snapshot.ids:
        raise KeyError(f"target {target!r} not alive in snapshot")
    scores = []
    for si, skill in enumerate(sm.skills.values):
        factors = [sm.prior.probs[si]]
        for c in chars:
            factors.extend(
                _skill_factors(sm, c, skill, bool_label(c.id == target))
            )
        scores.append(log_score(factors))
    return log_normalize(scores, sm.skills)


def skill_posterior(
    sm: SkillModel, snapshot: BattleSnapshot, target_dist: Distribution
) -> Distribution:
    """Mixture over targets: sum_t P(skill | t, obs) * P(t | obs).

    Summing instead of instantiating the most probable target keeps
    information from good (skill, target) pairs outside the argmax. A target
    whose conditional has no consistent skill contributes nothing; the error
    propagates only if that happens for every target with positive mass.
    """
    if tuple(target_dist.domain.values) != snapshot.ids:
        raise RosterMismatchError("target distribution does not match the roster")
    mix = [0.0] * len(sm.skills)
    any_consistent = False
    for ti, target in enumerate(snapshot.ids):
        weight = target_dist.probs[ti]
        if weight == 0.0:
            continue
        try:
            conditional = skill_given_target(sm, snapshot, target)
        except AllZeroError:
            continue
        any_consistent = True
        for si in range(len(mix)):
            mix[si] += weight * conditional.probs[si]
    if not any_consistent:
        raise AllZeroError("no skill is consistent with any positive-mass target")
    return normalize(mix, sm.skills)


def joint_posterior(
    tm: TargetModel, sm: SkillModel, snapshot: BattleSnapshot
) -> RankedActions:
    """Ranked P(target, skill | obs) = P(skill | target, obs) * P(target | obs)."""
    tdist = target_posterior(tm, snapshot)
    entries: list[tuple[str, str, float]] = []
    skill_index = {s: i for i, s in enumerate(sm.skills.values)}
    target_index = {t: i for i, t in enumerate(snapshot.ids)}
    for ti, target in enumerate(snapshot.ids):
        tp = tdist.probs[ti]
        if tp == 0.0:
            for skill in sm.skills.values:
                entries.append((target, skill, 0.0))
            continue
        conditional = skill_given_target(sm, snapshot, target)
        for si, skill in enumerate(sm.skills.values):
            entries.append((target, skill, tp * conditional.probs[si]))
    entries.sort(key=lambda e: (-e[2], target_index[e[0]], skill_index[e[1]]))
    return RankedActions(tuple(entries))


def select_action(
    ranked: RankedActions, available: Callable[[str, str], bool]
) -> Optional[tuple[str, str]]:
    """First (target, skill) pair in rank order that is currently castable."""
    for target, skill, _ in ranked.entries:
        if available(target, skill):
            return (target, skill)
    return None


# ---------------------------------------------------------------------------
# Brute-force oracles.
#
# P(Searched | Known) = sum_Free joint(Searched, Free, Known) / P(Known).
# The per-character variables are all Known (the snapshot observes them), so
# the enumeration runs over the searched target (and the previous target when
# it is not observed) with the joint evaluated at the observed assignment.
# Enumerating the unobserved-value combinations too would add ~1920^n terms
# that are each inconsistent with Known and contribute exactly zero.


def brute_force_target_posterior(
    tm: TargetModel, snapshot: BattleSnapshot
) -> Distribution:
    """Exact conditional on the target by direct linear-space summation."""
    chars = snapshot.characters
    n = len(chars)
    if n > 3:
        raise TooLargeError(f"oracle limited to 3 characters, got {n}")
    if n != tm.n:
        raise RosterMismatchError(
            f"snapshot has {n} characters, model built for {tm.n}"
        )
    if snapshot.prev_target is None:
        prev_slots = list(tm.slots)  # free: summed under the uniform prior
    else:
        prev_slots = [tm.slots[snapshot.ids.index(snapshot.prev_target)]]
    prev_prior = 1.0 / tm.n

    weights = []
    for i in range(n):
        total = 0.0
        for prev_slot in prev_slots:
            term = prev_prior * tm.transition.rows[(prev_slot,)].probs[i]
            for j, c in enumerate(chars):
                for f in _target_factors(tm, c, bool_label(j == i)):
                    term *= f
            total += term
        weights.append(total)
    return normalize(weights, snapshot.target_domain())


def brute_force_skill_posterior(
    sm: SkillModel, snapshot: BattleSnapshot, target_dist: Distribution
) -> Distribution:
    """Exact skill conditional, mixed over the supplied target distribution."""
    chars = snapshot.characters
    if len(chars) > 1:
        raise TooLargeError(f"oracle limited to 1 character, got {len(chars)}")
    if tuple(target_dist.domain.values) != snapshot.ids:
        raise RosterMismatchError("target distribution does not match the roster")
    m = len(sm.skills)
    mix = [0.0] * m
    for ti, target in enumerate(snapshot.ids):
        weight = target_dist.probs[ti]
        if weight == 0.0:
            continue
        terms = []
        for si in range(m):
            skill = sm.skills.values[si]
            term = sm.prior.probs[si] * (1.0 / len(chars))
            for c in chars:
                for f in _skill_factors(sm, c, skill, bool_label(c.id == target)):
                    term *= f
            terms.append(term)
        total = sum(terms)
        if total == 0.0:
            continue
        for si in range(m):
            mix[si] += weight * terms[si] / total
    return normalize(mix, sm.skills)
