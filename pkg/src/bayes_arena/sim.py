"""Deterministic tick-based PVE combat engine.

One action per tick, no cast times, no movement: distances are static per
scenario and aggro is a fixed assignment with a lowest-HP fallback. The
engine exists to generate battle states for the decision models, consume
their choices, and write replayable episode logs.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .domains import CLASSES, RESISTS, RESISTS_BY_ELEMENT, SKILLS
from .infer import joint_posterior, select_action
from .model import ModelParams, SkillModel, TargetModel, build_skill_model, build_target_model, rebuild_at_roster_size
from .perception import History, PerceptionConfig, RawCharacter, build_snapshot, distance_zone
from .prob import AllZeroError


class BadScenarioError(ValueError):
    """Scenario config is malformed or references unknown entities."""


class DeadActorError(RuntimeError):
    """An action or query was issued for a dead entity."""


class IllegalActionError(RuntimeError):
    """Action not in the actor's current legal set (policy bug or stale client)."""


@dataclass(frozen=True)
class SkillSpec:
    """Mechanics of one druid skill.

    kind: direct (instant heal/damage), over_time (per-tick heal/damage),
    flag (sets or clears a named flag), cc (movement lock), resource (mana).
    element is the damage element; the decision model's resist table uses its
    own tagging (debuff_armor counts as Nature there but deals no damage).
    """

    name: str
    side: str  # ally | foe
    kind: str  # direct | over_time | flag | cc | resource
    element: Optional[str] = None
    amount: int = 0
    duration_ticks: int = 0
    mana_cost: int = 0
    cooldown_ticks: int = 0
    flag_name: Optional[str] = None
    flag_op: str = "set"  # set | clear

    def __post_init__(self):
        if self.amount < 0:
            raise BadScenarioError(f"{self.name}: negative amount")
        if self.kind in ("over_time", "cc", "flag") and self.duration_ticks < 1:
            raise BadScenarioError(f"{self.name}: {self.kind} needs duration >= 1")


DEFAULT_SKILLS: dict[str, SkillSpec] = {
    s.name: s
    for s in (
        SkillSpec("small_heal", "ally", "direct", amount=20, mana_cost=15),
        SkillSpec("big_heal", "ally", "direct", amount=50, mana_cost=30, cooldown_ticks=2),
        SkillSpec("HOT", "ally", "over_time", amount=8, duration_ticks=5, mana_cost=20),
        SkillSpec("poison_abol", "ally", "flag", duration_ticks=1, mana_cost=10,
                  flag_name="poison", flag_op="clear"),
        SkillSpec("malediction_abol", "ally", "flag", duration_ticks=1, mana_cost=10,
                  flag_name="curse", flag_op="clear"),
        SkillSpec("buff_armor", "ally", "flag", duration_ticks=5, mana_cost=15,
                  flag_name="buff_armor"),
        SkillSpec("regen_mana", "ally", "resource", amount=30, cooldown_ticks=10),
        SkillSpec("small_dd", "foe", "direct", element="Nature", amount=15, mana_cost=10),
        SkillSpec("big_dd", "foe", "direct", element="Fire", amount=40, mana_cost=25,
                  cooldown_ticks=3),
        SkillSpec("DOT", "foe", "over_time", element="Nature", amount=6,
                  duration_ticks=6, mana_cost=15),
        SkillSpec("debuff_armor", "foe", "flag", duration_ticks=5, mana_cost=10,
                  flag_name="debuff_armor"),
        SkillSpec("root", "foe", "cc", element="Nature", duration_ticks=3,
                  mana_cost=12, cooldown_ticks=6, flag_name="root"),
    )
}

BUFF_ARMOR_FACTOR = 0.8  # incoming physical damage with buff_armor up
DEBUFF_ARMOR_FACTOR = 1.2  # incoming physical damage with debuff_armor up


@dataclass
class Effect:
    name: str
    kind: str  # hot | dot | flag
    amount: int = 0  # per-tick points for hot/dot
    remaining: int = 0


@dataclass
class Entity:
    """One combatant: raw character stats plus effects/cooldowns/aggro."""

    id: str
    ally: bool
    cls: str
    resists: str
    hp: int
    hp_max: int
    distance_m: float
    policy: str = "idle"  # attacker | healer | druid | idle
    aggro: Optional[str] = None
    attack_points: int = 0
    heal_points: int = 0
    mana: int = 0
    mana_max: int = 0
    mana_regen: int = 0
    effects: list[Effect] = field(default_factory=list)
    cooldowns: dict[str, int] = field(default_factory=dict)

    def has_effect(self, name: str) -> bool:
        return any(e.name == name for e in self.effects)

    def alive(self) -> bool:
        return self.hp > 0

    def raw(self) -> RawCharacter:
        return RawCharacter(
            id=self.id,
            hp=self.hp,
            hp_max=self.hp_max,
            distance_m=self.distance_m,
            ally=self.ally,
            cls=self.cls,
            resists=self.resists,
        )


def builtin_setup(which: str) -> dict:
    """The two example encounters: 2 foes, 4 allies, and the druid.

    A: the main tank is about to die under both foes' attacks.
    B: the additional foe is also about to die while it beats on the tank.
    """
    if which not in ("A", "B"):
        raise BadScenarioError(f"unknown builtin setup {which!r}")

    def char(id, ally, cls, resists, hp, hp_max, dist, policy, **kw):
        doc = {
            "id": id, "ally": ally, "class": cls, "resists": resists,
            "hp": hp, "hp_max": hp_max, "distance_m": dist, "policy": policy,
            "recent_hp": kw.pop("recent_hp", [hp, hp, hp]),
        }
        doc.update(kw)
        return doc

    mt_hp, mt_recent = (12, [28, 20, 12]) if which == "A" else (35, [51, 43, 35])
    add_hp, add_recent = (60, [60, 60, 60]) if which == "A" else (12, [28, 20, 12])
    return {
        "name": which,
        "prev_target": "Lich",
        "focus_foe": "Lich",
        "perception": PerceptionConfig().to_json(),
        "roster": [
            char("Lich", False, "Tank", "FireIce", 300, 300, 30.0, "attacker",
                 aggro="MT", attack_points=8),
            char("Add", False, "Contact", "Nothing", add_hp, 100, 26.0, "attacker",
                 aggro="MT", attack_points=6, recent_hp=add_recent),
            char("MT", True, "Tank", "Nothing", mt_hp, 100, 28.0, "attacker",
                 attack_points=5, recent_hp=mt_recent, attackers=["Lich", "Add"]),
            char("Warrior", True, "Contact", "Nothing", 80, 100, 27.0, "attacker",
                 attack_points=7),
            char("Hunter", True, "Ranged", "Nothing", 90, 100, 12.0, "attacker",
                 attack_points=9),
            char("Priest", True, "Healer", "Nothing", 95, 100, 10.0, "healer",
                 heal_points=15),
            char("Druid", True, "Healer", "Nothing", 100, 100, 0.0, "druid",
                 mana=100, mana_max=100, mana_regen=2),
        ],
    }


def load_scenario(source) -> dict:
    """Accept 'A'/'B', a path to a scenario JSON file, or an inline dict."""
    if isinstance(source, dict):
        return source
    if source in ("A", "B"):
        return builtin_setup(source)
    try:
        with open(source) as f:
            return json.load(f)
    except OSError as exc:
        raise BadScenarioError(f"cannot read scenario {source!r}: {exc}") from exc


class World:
    """Mutable battle state. One writer at a time; see run_episode."""

    def __init__(self, scenario: dict, seed: int = 0):
        self.scenario = copy.deepcopy(scenario)
        self.seed = seed
        self.rng = random.Random(seed)
        self.tick = 0
        self.perception = PerceptionConfig.from_json(scenario.get("perception"))
        self.skills = dict(DEFAULT_SKILLS)
        for name, doc in (scenario.get("skills") or {}).items():
            self.skills[name] = SkillSpec(**doc)
        self.focus_foe: Optional[str] = scenario.get("focus_foe")
        self.prev_target: Optional[str] = scenario.get("prev_target")

        self.entities: list[Entity] = []
        for doc in scenario.get("roster", []):
            try:
                self.entities.append(
                    Entity(
                        id=doc["id"],
                        ally=doc["ally"],
                        cls=doc["class"],
                        resists=doc.get("resists", "Nothing"),
                        hp=doc["hp"],
                        hp_max=doc["hp_max"],
                        distance_m=doc["distance_m"],
                        policy=doc.get("policy", "idle"),
                        aggro=doc.get("aggro"),
                        attack_points=doc.get("attack_points", 0),
                        heal_points=doc.get("heal_points", 0),
                        mana=doc.get("mana", 0),
                        mana_max=doc.get("mana_max", doc.get("mana", 0)),
                        mana_regen=doc.get("mana_regen", 0),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise BadScenarioError(f"bad roster entry {doc!r}: {exc}") from exc
        if not self.entities:
            raise BadScenarioError("scenario roster is empty")
        ids = [e.id for e in self.entities]
        if len(set(ids)) != len(ids):
            raise BadScenarioError(f"duplicate entity ids {ids}")
        for e in self.entities:
            if e.cls not in CLASSES or e.resists not in RESISTS:
                raise BadScenarioError(f"{e.id}: bad class/resists")
        druids = [e for e in self.entities if e.policy == "druid"]
        if len(druids) != 1:
            raise BadScenarioError("scenario needs exactly one druid-policy entity")
        self.druid_id = druids[0].id

        self.history = History(window=self.perception.window)
        self._seed_history()

    def _seed_history(self) -> None:
        window = self.perception.window
        series = {}
        for doc in self.scenario["roster"]:
            recent = list(doc.get("recent_hp") or [doc["hp"]] * window)
            if recent[-1] != doc["hp"]:
                raise BadScenarioError(
                    f"{doc['id']}: recent_hp must end at current hp"
                )
            while len(recent) < window:
                recent.insert(0, recent[0])
            series[doc["id"]] = recent[-window:]
        attackers = {
            doc["id"]: doc.get("attackers", []) for doc in self.scenario["roster"]
        }
        for k in range(window):
            tick = k - (window - 1)
            hp_map = {eid: series[eid][k] for eid in series}
            self.history.push(tick, hp_map, attackers if k == window - 1 else None)

    # -- queries ------------------------------------------------------------

    def entity(self, eid: str) -> Entity:
        for e in self.entities:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def alive_entities(self) -> list[Entity]:
        return [e for e in self.entities if e.alive()]

    def druid(self) -> Entity:
        return self.entity(self.druid_id)

    def outcome(self) -> Optional[str]:
        foes = [e for e in self.alive_entities() if not e.ally]
        allies = [e for e in self.alive_entities() if e.ally]
        if not foes:
            return "win"
        if not allies or not self.druid().alive():
            return "loss"
        return None

    def snapshot(self):
        """Perceive the current alive roster (roster order preserved)."""
        raw = [e.raw() for e in self.alive_entities()]
        return build_snapshot(raw, self.history, self.prev_target, self.perception)

    # -- actions ------------------------------------------------------------

    def legal_actions(self, actor_id: str) -> list[tuple[str, str]]:
        """(skill, target-id) pairs the actor can cast right now.

        Gates: target alive, side match, mana, cooldown, target not beyond
        Far range, and no duplicate of an effect that is already running.
        """
        actor = self.entity(actor_id)
        if not actor.alive():
            raise DeadActorError(actor_id)
        pairs = []
        for skill_name in SKILLS.values:
            spec = self.skills[skill_name]
            if spec.mana_cost > actor.mana:
                continue
            if actor.cooldowns.get(skill_name, 0) > 0:
                continue
            for target in self.alive_entities():
                if (spec.side == "ally") != target.ally:
                    continue
                if distance_zone(target.distance_m) == "VeryFar":
                    continue
                if spec.kind in ("over_time", "cc") or (
                    spec.kind == "flag" and spec.flag_op == "set"
                ):
                    if target.has_effect(spec.flag_name or spec.name):
                        continue
                pairs.append((skill_name, target.id))
        return pairs

    def apply_action(self, actor_id: str, skill_name: str, target_id: str) -> list[dict]:
        """Cast a skill; returns the events it produced."""
        if (skill_name, target_id) not in self.legal_actions(actor_id):
            raise IllegalActionError(f"{actor_id}: ({skill_name}, {target_id}) not legal")
        actor = self.entity(actor_id)
        target = self.entity(target_id)
        spec = self.skills[skill_name]
        actor.mana -= spec.mana_cost
        if spec.cooldown_ticks:
            actor.cooldowns[skill_name] = spec.cooldown_ticks

        events: list[dict] = []
        if spec.kind == "direct" and spec.side == "ally":
            healed = min(target.hp_max - target.hp, spec.amount)
            target.hp += healed
            events.append({"type": "heal", "source": actor_id, "target": target_id,
                           "skill": skill_name, "amount": healed})
        elif spec.kind == "direct":
            events += self._deal_spell_damage(actor_id, target, spec, skill_name)
        elif spec.kind == "over_time":
            per_tick = self._elemental_amount(spec, target)
            kind = "hot" if spec.side == "ally" else "dot"
            target.effects.append(Effect(skill_name, kind, per_tick, spec.duration_ticks))
            events.append({"type": "effect_applied", "source": actor_id,
                           "target": target_id, "name": skill_name,
                           "ticks": spec.duration_ticks, "per_tick": per_tick})
        elif spec.kind in ("flag", "cc"):
            flag = spec.flag_name or skill_name
            if spec.flag_op == "clear":
                removed = target.has_effect(flag)
                target.effects = [e for e in target.effects if e.name != flag]
                events.append({"type": "cleanse", "source": actor_id,
                               "target": target_id, "flag": flag, "removed": removed})
            else:
                target.effects.append(Effect(flag, "flag", 0, spec.duration_ticks))
                events.append({"type": "effect_applied", "source": actor_id,
                               "target": target_id, "name": flag,
                               "ticks": spec.duration_ticks})
        elif spec.kind == "resource":
            gained = min(actor.mana_max - actor.mana, spec.amount)
            actor.mana += gained
            events.append({"type": "mana", "source": actor_id, "target": actor_id,
                           "skill": skill_name, "amount": gained})
        events += self._reap()
        return events

    def _elemental_amount(self, spec: SkillSpec, target: Entity) -> int:
        """Per-hit points after the resist rule: halved, rounded down."""
        amount = spec.amount
        if spec.element and target.resists in RESISTS_BY_ELEMENT.get(spec.element, ()):
            amount //= 2
        return amount

    def _deal_spell_damage(self, source_id: str, target: Entity, spec: SkillSpec,
                           skill_name: str) -> list[dict]:
        dmg = self._elemental_amount(spec, target)
        target.hp = max(0, target.hp - dmg)
        return [{"type": "damage", "source": source_id, "target": target.id,
                 "skill": skill_name, "amount": dmg}]

    def _physical_attack(self, attacker: Entity, victim: Entity) -> list[dict]:
        dmg = float(attacker.attack_points)
        if victim.has_effect("buff_armor"):
            dmg *= BUFF_ARMOR_FACTOR
        if victim.has_effect("debuff_armor"):
            dmg *= DEBUFF_ARMOR_FACTOR
        dealt = int(dmg)
        victim.hp = max(0, victim.hp - dealt)
        self._attackers_this_tick.setdefault(victim.id, set()).add(attacker.id)
        return [{"type": "damage", "source": attacker.id, "target": victim.id,
                 "skill": "attack", "amount": dealt}]

    def _reap(self) -> list[dict]:
        """Drop dead entities and re-point any aggro that referenced them."""
        events = []
        dead = [e for e in self.entities if not e.alive()]
        if not dead:
            return events
        for e in dead:
            events.append({"type": "death", "target": e.id})
        self.entities = [e for e in self.entities if e.alive()]
        alive_ids = {e.id for e in self.entities}
        for e in self.entities:
            if e.aggro is not None and e.aggro not in alive_ids:
                e.aggro = self._lowest_hp_ally_id()
        if self.focus_foe is not None and self.focus_foe not in alive_ids:
            foes = [e for e in self.entities if not e.ally]
            self.focus_foe = foes[0].id if foes else None
        return events

    def _lowest_hp_ally_id(self) -> Optional[str]:
        allies = [e for e in self.entities if e.ally and e.alive()]
        if not allies:
            return None
        return min(allies, key=lambda e: e.hp).id

    # -- tick ---------------------------------------------------------------

    def tick_once(self) -> list[dict]:
        """Advance one tick: periodic effects, timers, regen, scripted actors."""
        events: list[dict] = []
        self._attackers_this_tick: dict[str, set[str]] = {}

        for e in list(self.entities):
            if not e.alive():
                continue
            for eff in e.effects:
                if eff.kind == "hot":
                    healed = min(e.hp_max - e.hp, eff.amount)
                    e.hp += healed
                    events.append({"type": "heal", "source": eff.name, "target": e.id,
                                   "skill": eff.name, "amount": healed})
                elif eff.kind == "dot":
                    e.hp = max(0, e.hp - eff.amount)
                    events.append({"type": "damage", "source": eff.name,
                                   "target": e.id, "skill": eff.name,
                                   "amount": eff.amount})
        events += self._reap()

        for e in self.entities:
            for eff in e.effects:
                eff.remaining -= 1
            expired = [eff for eff in e.effects if eff.remaining <= 0]
            for eff in expired:
                events.append({"type": "effect_expired", "target": e.id,
                               "name": eff.name})
            e.effects = [eff for eff in e.effects if eff.remaining > 0]
            for skill_name in list(e.cooldowns):
                e.cooldowns[skill_name] -= 1
                if e.cooldowns[skill_name] <= 0:
                    del e.cooldowns[skill_name]
            if e.mana_regen and e.mana < e.mana_max:
                e.mana = min(e.mana_max, e.mana + e.mana_regen)

        for e in list(self.entities):
            if not e.alive() or e.policy in ("druid", "idle"):
                continue
            events += self._run_scripted(e)
            events += self._reap()

        self.tick += 1
        self.history.push(
            self.tick,
            {e.id: e.hp for e in self.entities},
            {k: v for k, v in self._attackers_this_tick.items()},
        )
        return events

    def _run_scripted(self, e: Entity) -> list[dict]:
        if e.policy == "attacker":
            victim_id = None
            if e.ally:
                victim_id = self.focus_foe
            else:
                victim_id = e.aggro if e.aggro else self._lowest_hp_ally_id()
            if victim_id is None:
                return []
            try:
                victim = self.entity(victim_id)
            except KeyError:
                return []
            if not victim.alive():
                return []
            return self._physical_attack(e, victim)
        if e.policy == "healer":
            allies = [a for a in self.entities if a.ally and a.alive()]
            if not allies:
                return []
            worst = min(allies, key=lambda a: (a.hp / a.hp_max, self.entities.index(a)))
            if worst.hp / worst.hp_max >= 0.5:
                return []
            healed = min(worst.hp_max - worst.hp, e.heal_points)
            worst.hp += healed
            return [{"type": "heal", "source": e.id, "target": worst.id,
                     "skill": "heal", "amount": healed}]
        return []

    def state_digest(self) -> dict:
        """Canonical terminal-state document used by replay verification."""
        return {
            "tick": self.tick,
            "entities": [
                {
                    "id": e.id, "hp": e.hp, "mana": e.mana,
                    "effects": [[eff.name, eff.kind, eff.amount, eff.remaining]
                                for eff in e.effects],
                    "cooldowns": dict(sorted(e.cooldowns.items())),
                }
                for e in self.entities
            ],
            "prev_target": self.prev_target,
        }


# ---------------------------------------------------------------------------
# Druid policies


class BotPolicy:
    """Plays the decision model: rank joint pairs, take the best legal one.

    mode 'argmax' walks the ranking greedily; mode 'sample' draws from the
    joint posterior restricted to legal pairs (uniform fallback if every
    legal pair has zero posterior mass).
    """

    def __init__(self, tm: TargetModel, sm: SkillModel, mode: str = "argmax"):
        if mode not in ("argmax", "sample"):
            raise ValueError(f"unknown bot mode {mode!r}")
        self.tm = tm
        self.sm = sm
        self.mode = mode
        self.name = "bot" if mode == "argmax" else "bot-sample"
        self.last_ranked = None

    @classmethod
    def from_params(cls, params: ModelParams, n: int, mode: str = "argmax"):
        return cls(build_target_model(params, n), build_skill_model(params), mode)

    def decide(self, world: World, snapshot, legal: list[tuple[str, str]]):
        if not legal:
            return None
        tm = rebuild_at_roster_size(self.tm, len(snapshot.characters))
        try:
            ranked = joint_posterior(tm, self.sm, snapshot)
        except AllZeroError:
            return None
        self.last_ranked = ranked
        legal_pairs = {(target, skill) for skill, target in legal}
        if self.mode == "argmax":
            choice = select_action(ranked, lambda t, s: (t, s) in legal_pairs)
            if choice is None:
                return None
            target, skill = choice
            return (skill, target)
        weights = [p for t, s, p in ranked.entries if (t, s) in legal_pairs]
        pairs = [(t, s) for t, s, p in ranked.entries if (t, s) in legal_pairs]
        if sum(weights) <= 0.0:
            weights = [1.0] * len(pairs)
        target, skill = world.rng.choices(pairs, weights=weights, k=1)[0]
        return (skill, target)


class ScriptedRandomPolicy:
    """Uniform choice over the legal set; idles only when nothing is legal."""

    name = "scripted-random"

    def decide(self, world: World, snapshot, legal):
        if not legal:
            return None
        return world.rng.choice(legal)


class ExternalQueuePolicy:
    """Replays a fixed action sequence; missing entries mean idle."""

    name = "external"

    def __init__(self, actions: Iterable[Optional[tuple[str, str]]]):
        self.queue = list(actions)
        self.cursor = 0

    def decide(self, world: World, snapshot, legal):
        if self.cursor >= len(self.queue):
            return None
        action = self.queue[self.cursor]
        self.cursor += 1
        return action


# ---------------------------------------------------------------------------
# Episodes and logs


@dataclass
class EpisodeLog:
    scenario: dict
    seed: int
    policy: str
    records: list[dict] = field(default_factory=list)
    outcome: Optional[str] = None
    final_state: Optional[dict] = None

    def decision_count(self) -> int:
        return sum(1 for r in self.records if r["action"] is not None)


def run_episode(world: World, policy, max_ticks: int, log_policy_name: Optional[str] = None) -> EpisodeLog:
    """Drive the druid with ``policy`` until win, loss, or timeout.

    Pure function of (scenario, seed, policy trace): reruns produce
    byte-identical logs.
    """
    if max_ticks < 1:
        raise ValueError("max_ticks must be >= 1")
    log = EpisodeLog(
        scenario=copy.deepcopy(world.scenario),
        seed=world.seed,
        policy=log_policy_name or policy.name,
    )
    for _ in range(max_ticks):
        snapshot = world.snapshot()
        legal = world.legal_actions(world.druid_id)
        action = policy.decide(world, snapshot, legal)
        events: list[dict] = []
        if action is not None:
            skill_name, target_id = action
            events += world.apply_action(world.druid_id, skill_name, target_id)
            world.prev_target = target_id
        events += world.tick_once()
        log.records.append(
            {
                "tick": world.tick - 1,
                "snapshot": snapshot.to_json(),
                "actor": policy.name,
                "action": None if action is None else
                    {"skill": action[0], "target": action[1]},
                "legal": [list(pair) for pair in legal],
                "events": events,
            }
        )
        if world.outcome() is not None:
            break
    log.outcome = world.outcome() or "timeout"
    log.final_state = world.state_digest()
    return log


def _json_line(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def write_log(log: EpisodeLog, path) -> None:
    with open(path, "w") as f:
        f.write(_json_line({"scenario": log.scenario, "seed": log.seed,
                            "policy": log.policy}) + "\n")
        for record in log.records:
            f.write(_json_line(record) + "\n")
        f.write(_json_line({"outcome": log.outcome,
                            "final_state": log.final_state}) + "\n")


def read_log(path) -> EpisodeLog:
    with open(path) as f:
        lines = [line for line in f.read().splitlines() if line.strip()]
    if len(lines) < 2:
        raise ValueError(f"log {path} too short")
    header = json.loads(lines[0])
    terminal = json.loads(lines[-1])
    if "scenario" not in header or "outcome" not in terminal:
        raise ValueError(f"log {path} missing header or terminal line")
    return EpisodeLog(
        scenario=header["scenario"],
        seed=header["seed"],
        policy=header.get("policy", "external"),
        records=[json.loads(line) for line in lines[1:-1]],
        outcome=terminal["outcome"],
        final_state=terminal.get("final_state"),
    )


def replay(log: EpisodeLog, strict: bool = True) -> tuple[World, list]:
    """Re-run a log from its scenario; returns the world and the replayed
    (snapshot, action) sequence for the druid's decision ticks.

    With strict=True, any divergence from the recorded legal sets, actions,
    or terminal state raises.
    """
    from .learning import MalformedLogError  # local import avoids a cycle

    world = World(log.scenario, seed=log.seed)
    decisions = []
    for record in log.records:
        snapshot = world.snapshot()
        legal = world.legal_actions(world.druid_id)
        logged_legal = {tuple(p) for p in record["legal"]}
        if strict and logged_legal != set(legal):
            raise MalformedLogError(
                f"tick {record['tick']}: legal set diverged on replay"
            )
        action = record["action"]
        if action is not None:
            pair = (action["skill"], action["target"])
            if pair not in logged_legal:
                raise MalformedLogError(
                    f"tick {record['tick']}: logged action {pair} outside legal set"
                )
            world.apply_action(world.druid_id, *pair)
            world.prev_target = action["target"]
            decisions.append((snapshot, pair))
        world.tick_once()
    if strict and log.final_state is not None:
        if world.state_digest() != log.final_state:
            raise MalformedLogError("terminal state diverged on replay")
    return world, decisions
