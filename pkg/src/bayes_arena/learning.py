"""Table identification from played sessions.

Every learnable table is fit by counting decision records and Laplace
smoothing; the derived variables (HP trend, imminent death) are recomputed
deterministically by the perception module while the log replays, so no EM
is needed. sample_generative draws records straight from a model pair's
generative story and is the independent oracle for fit's recovery tests.
"""

from __future__ import annotations

import bisect
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .domains import BattleSnapshot, CharacterState, SKILLS, bool_label
from .infer import joint_posterior
from .model import (
    FACTOR_CHILDREN,
    FACTOR_PARENTS,
    ModelParams,
    SKILL_FACTORS,
    SKILL_FACTOR_PARENTS,
    SkillModel,
    TARGET_FACTORS,
    TARGETED,
    TargetModel,
    build_skill_model,
    build_target_model,
    rebuild_at_roster_size,
)
from .prob import ConditionalTable, Domain, kl_divergence, normalize, uniform

LOG_LOSS_FLOOR = 1e-12


class NoDataError(ValueError):
    """No records and no pseudocount to fall back on."""


class MalformedLogError(ValueError):
    """Episode log fails its invariants (legality, contiguity, replay)."""


@dataclass(frozen=True)
class DecisionRecord:
    """One druid decision: the perceived snapshot and the chosen action."""

    snapshot: BattleSnapshot
    chosen: tuple[str, str]  # (target id, skill name)

    def __post_init__(self):
        target, skill = self.chosen
        if target not in self.snapshot.ids:
            raise MalformedLogError(f"chosen target {target!r} not alive in snapshot")
        if skill not in SKILLS:
            raise MalformedLogError(f"unknown skill {skill!r}")


@dataclass(frozen=True)
class FitReport:
    """What the fit saw: volume, smoothing, and per-table row coverage."""

    records: int
    pseudocount: float
    coverage: Mapping[str, float] = field(default_factory=dict)
    row_counts: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    persistence_observations: int = 0
    learned_persistence: float = 0.5

    def to_json(self) -> dict:
        return {
            "records": self.records,
            "pseudocount": self.pseudocount,
            "coverage": dict(sorted(self.coverage.items())),
            "persistence_observations": self.persistence_observations,
            "learned_persistence": self.learned_persistence,
        }


def extract_records(log) -> list[DecisionRecord]:
    """Replay a log and return the druid's non-idle decisions.

    Replay recomputes every snapshot (and the interpolated variables in it)
    through the perception module and validates the recorded legal sets, so
    a tampered or diverging log raises MalformedLogError.
    """
    from .sim import replay

    _, decisions = replay(log, strict=True)
    records = []
    for snapshot, (skill, target) in decisions:
        records.append(DecisionRecord(snapshot=snapshot, chosen=(target, skill)))
    return records


# ---------------------------------------------------------------------------
# Counting


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


def _target_key(factor: str, v: Mapping[str, str], targ: str) -> tuple[str, ...]:
    ctx = tuple(v[d.name] for d in FACTOR_PARENTS[factor])
    return ctx + (targ,)


def _skill_key(factor: str, v: Mapping[str, str], skill: str, targ: str) -> tuple[str, ...]:
    ctx = tuple(v[d.name] for d in SKILL_FACTOR_PARENTS[factor])
    return ctx + (skill, targ)


def fit(
    records: Sequence[DecisionRecord], pseudocount: float = 1.0
) -> tuple[TargetModel, SkillModel, FitReport]:
    """Count and average: every learnable table row becomes
    (count + pseudocount) / (row total + pseudocount * |child domain|).

    The transition prior is reduced to one persistence scalar (how often the
    chosen target equals the previous one) so it stays roster-size
    independent; the skill prior is counted from the chosen skills.
    """
    if pseudocount < 0:
        raise ValueError("pseudocount must be >= 0")
    if not records and pseudocount == 0:
        raise NoDataError("no records and pseudocount 0")

    target_counts: dict[str, dict[tuple[str, ...], Counter]] = {
        f: defaultdict(Counter) for f in TARGET_FACTORS
    }
    skill_counts: dict[str, dict[tuple[str, ...], Counter]] = {
        f: defaultdict(Counter) for f in SKILL_FACTORS
    }
    prior_counts: Counter = Counter()
    same_prev = 0
    prev_total = 0
    roster_sizes: Counter = Counter()

    for record in records:
        target_id, skill = record.chosen
        roster_sizes[len(record.snapshot.characters)] += 1
        prior_counts[skill] += 1
        if record.snapshot.prev_target is not None:
            prev_total += 1
            same_prev += int(target_id == record.snapshot.prev_target)
        for c in record.snapshot.characters:
            v = _character_values(c)
            targ = bool_label(c.id == target_id)
            for factor in TARGET_FACTORS:
                target_counts[factor][_target_key(factor, v, targ)][v[factor]] += 1
            for factor in SKILL_FACTORS:
                skill_counts[factor][_skill_key(factor, v, skill, targ)][v[factor]] += 1

    overrides: dict[str, ConditionalTable] = {}
    coverage: dict[str, float] = {}
    row_counts: dict[str, dict[str, int]] = {}
    for factor in TARGET_FACTORS:
        parents = FACTOR_PARENTS[factor] + (TARGETED,)
        table, cov, counts = _table_from_counts(
            FACTOR_CHILDREN[factor], parents, target_counts[factor], pseudocount
        )
        overrides[f"target.{factor}"] = table
        coverage[f"target.{factor}"] = cov
        row_counts[f"target.{factor}"] = counts
    for factor in SKILL_FACTORS:
        parents = SKILL_FACTOR_PARENTS[factor] + (SKILLS, TARGETED)
        table, cov, counts = _table_from_counts(
            FACTOR_CHILDREN[factor], parents, skill_counts[factor], pseudocount
        )
        overrides[f"skill.{factor}"] = table
        coverage[f"skill.{factor}"] = cov
        row_counts[f"skill.{factor}"] = counts

    prior_table, prior_cov, prior_rows = _table_from_counts(
        SKILLS, (), {(): prior_counts}, pseudocount
    )
    overrides["skill.prior"] = prior_table
    coverage["skill.prior"] = prior_cov
    row_counts["skill.prior"] = prior_rows

    # Persistence via the same Laplace rule over {kept, switched}; clamped
    # into the open interval ModelParams requires.
    denom = prev_total + 2 * pseudocount
    persistence = (same_prev + pseudocount) / denom if denom > 0 else 0.5
    persistence = min(max(persistence, 1e-9), 1.0 - 1e-9)

    params = ModelParams(persistence=persistence, table_overrides=overrides)
    # Episodes start at full roster and shrink as characters die; the largest
    # size seen is the encounter's roster. Tables are size-independent anyway.
    n = max(roster_sizes) if roster_sizes else 1
    tm = build_target_model(params, n)
    sm = build_skill_model(params)
    report = FitReport(
        records=len(records),
        pseudocount=pseudocount,
        coverage=coverage,
        row_counts=row_counts,
        persistence_observations=prev_total,
        learned_persistence=persistence,
    )
    return tm, sm, report


def _table_from_counts(
    child: Domain,
    parents: tuple[Domain, ...],
    counts: Mapping[tuple[str, ...], Counter],
    pseudocount: float,
) -> tuple[ConditionalTable, float, dict[str, int]]:
    import itertools

    rows = {}
    observed = 0
    total_rows = 0
    row_counts: dict[str, int] = {}
    for key in itertools.product(*(d.values for d in parents)):
        total_rows += 1
        row = counts.get(key, Counter())
        row_total = sum(row.values())
        row_counts["|".join(key)] = row_total
        if row_total > 0:
            observed += 1
        denom = row_total + pseudocount * len(child)
        if denom == 0:
            rows[key] = uniform(child)
        else:
            rows[key] = normalize(
                tuple(row.get(v, 0) + pseudocount for v in child.values), child
            )
    table = ConditionalTable(child, parents, rows)
    return table, observed / total_rows, row_counts


# ---------------------------------------------------------------------------
# Generative sampling (the recovery oracle for fit)


class _RowSampler:
    """Cumulative-weight sampler over a table's rows."""

    def __init__(self, table: ConditionalTable):
        self.values = table.child.values
        self.cums = {}
        for key, dist in table.rows.items():
            cum, total = [], 0.0
            for p in dist.probs:
                total += p
                cum.append(total)
            self.cums[key] = cum

    def draw(self, rng: random.Random, key: tuple[str, ...]) -> str:
        cum = self.cums[key]
        x = rng.random() * cum[-1]
        return self.values[min(bisect.bisect_right(cum, x), len(cum) - 1)]


def sample_generative(
    tm: TargetModel, sm: SkillModel, count: int, seed: int
) -> list[DecisionRecord]:
    """Draw records exactly from the models' generative story.

    Previous target uniform, target from the transition row, skill from the
    prior, then every character variable from its targeted/untargeted row;
    the resist variable comes from the skill model (the only table that
    generates it). Deterministic per seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = random.Random(seed)
    n = tm.n
    ids = tuple(f"c{i}" for i in range(n))

    trans = _RowSampler(tm.transition)
    t_samplers = {f: _RowSampler(tm.tables[f]) for f in TARGET_FACTORS}
    resist_sampler = _RowSampler(sm.tables["resists"])
    prior_cum, total = [], 0.0
    for p in sm.prior.probs:
        total += p
        prior_cum.append(total)

    records = []
    for _ in range(count):
        prev_i = rng.randrange(n)
        t_slot = trans.draw(rng, (tm.slots[prev_i],))
        t_i = tm.slots.index(t_slot)
        x = rng.random() * prior_cum[-1]
        skill = SKILLS.values[min(bisect.bisect_right(prior_cum, x), len(SKILLS) - 1)]

        characters = []
        for i in range(n):
            targ = bool_label(i == t_i)
            ally = t_samplers["ally"].draw(rng, (targ,))
            cls = t_samplers["class"].draw(rng, (ally, targ))
            characters.append(
                CharacterState(
                    id=ids[i],
                    hp_level=int(t_samplers["hp_level"].draw(rng, (ally, cls, targ))),
                    distance=t_samplers["distance"].draw(rng, (ally, targ)),
                    ally=ally == "true",
                    delta_hp=t_samplers["delta_hp"].draw(rng, (ally, cls, targ)),
                    imminent_death=t_samplers["imminent_death"].draw(rng, (targ,)) == "true",
                    cls=cls,
                    resists=resist_sampler.draw(rng, (cls, skill, targ)),
                )
            )
        snapshot = BattleSnapshot(characters=tuple(characters), prev_target=ids[prev_i])
        records.append(DecisionRecord(snapshot=snapshot, chosen=(ids[t_i], skill)))
    return records


# ---------------------------------------------------------------------------
# Scoring and comparison


def evaluate(tm: TargetModel, sm: SkillModel, records: Sequence[DecisionRecord]) -> dict:
    """Top-1/top-3 accuracy of the joint ranking and mean log-loss of the
    chosen pair (floored at 1e-12). The transition is rebuilt per record's
    roster size; the factor tables are roster-size independent."""
    if not records:
        raise NoDataError("no records to evaluate")
    import math

    top1 = top3 = 0
    loss = 0.0
    for record in records:
        model = rebuild_at_roster_size(tm, len(record.snapshot.characters))
        ranked = joint_posterior(model, sm, record.snapshot)
        chosen_p = None
        for rank, (target, skill, p) in enumerate(ranked.entries):
            if (target, skill) == record.chosen:
                chosen_p = p
                top1 += int(rank == 0)
                top3 += int(rank < 3)
                break
        if chosen_p is None:
            raise MalformedLogError(f"chosen pair {record.chosen} not in ranking")
        loss += -math.log(max(chosen_p, LOG_LOSS_FLOOR))
    k = len(records)
    return {
        "records": k,
        "top1": top1 / k,
        "top3": top3 / k,
        "log_loss": loss / k,
    }


def model_divergence(
    a: tuple[TargetModel, SkillModel], b: tuple[TargetModel, SkillModel]
) -> dict:
    """Row-wise KL(a || b) for every table, reported per table as max/mean."""
    tm_a, sm_a = a
    tm_b, sm_b = b
    tables_a: dict[str, ConditionalTable] = {"target.transition": tm_a.transition}
    tables_b: dict[str, ConditionalTable] = {"target.transition": tm_b.transition}
    for f in TARGET_FACTORS:
        tables_a[f"target.{f}"] = tm_a.tables[f]
        tables_b[f"target.{f}"] = tm_b.tables[f]
    for f in SKILL_FACTORS:
        tables_a[f"skill.{f}"] = sm_a.tables[f]
        tables_b[f"skill.{f}"] = sm_b.tables[f]
    tables_a["skill.prior"] = ConditionalTable(SKILLS, (), {(): sm_a.prior})
    tables_b["skill.prior"] = ConditionalTable(SKILLS, (), {(): sm_b.prior})

    report = {}
    for name, ta in tables_a.items():
        tb = tables_b[name]
        if set(ta.rows) != set(tb.rows):
            from .prob import DomainMismatchError

            raise DomainMismatchError(f"table {name!r} has different rows")
        rows = {
            "|".join(key): kl_divergence(ta.rows[key], tb.rows[key])
            for key in ta.rows
        }
        values = list(rows.values())
        report[name] = {
            "max": max(values),
            "mean": sum(values) / len(values),
            "rows": rows,
        }
    return report
