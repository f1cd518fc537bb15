"""Discretization of raw world state into the model's variables.

HP points become 10 levels, meters become 4 zones, and the two variables a
human player reads off the screen without thinking — the recent HP trend and
"that one is about to die" — are interpolated from a short history window of
HP values and attacker sets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Iterable, Optional

from .domains import BattleSnapshot, CharacterState, CLASSES, RESISTS

CONTACT_RANGE_M = 5.0
CLOSE_RANGE_M = 20.0
FAR_RANGE_M = 40.0  # beyond this nothing reaches, even the longest spell


class InvalidHpError(ValueError):
    """HP outside [0, hp_max] or hp_max not positive."""


class UnknownCharacterError(KeyError):
    """History holds no samples for the requested character."""


@dataclass(frozen=True)
class PerceptionConfig:
    """Interpolation thresholds, overridable per scenario."""

    window: int = 3  # history ticks kept for trend estimation
    theta: float = 0.02  # |HP slope| (fraction of max per tick) that counts as a trend
    tau: float = 5.0  # projected ticks-to-death that counts as imminent
    low_hp: float = 0.15  # HP fraction that is imminent regardless of trend

    @classmethod
    def from_json(cls, doc: Optional[dict]) -> "PerceptionConfig":
        doc = doc or {}
        return cls(
            window=doc.get("window", 3),
            theta=doc.get("theta", 0.02),
            tau=doc.get("tau", 5.0),
            low_hp=doc.get("low_hp", 0.15),
        )

    def to_json(self) -> dict:
        return {
            "window": self.window,
            "theta": self.theta,
            "tau": self.tau,
            "low_hp": self.low_hp,
        }


@dataclass(frozen=True)
class RawCharacter:
    """Pre-discretization character state as the simulator reports it."""

    id: str
    hp: int
    hp_max: int
    distance_m: float
    ally: bool
    cls: str
    resists: str

    def __post_init__(self):
        if self.hp_max <= 0 or not 0 <= self.hp <= self.hp_max:
            raise InvalidHpError(f"{self.id}: hp {self.hp}/{self.hp_max}")
        if self.cls not in CLASSES:
            raise ValueError(f"unknown class {self.cls!r}")
        if self.resists not in RESISTS:
            raise ValueError(f"unknown resists {self.resists!r}")


@dataclass
class History:
    """Ring buffer of (tick, hp per character, attackers per character).

    Owned by a single session's simulation loop; perception only reads it.
    """

    window: int = 3
    entries: Deque[tuple[int, dict[str, int], dict[str, frozenset[str]]]] = field(
        default_factory=deque
    )

    def push(
        self,
        tick: int,
        hp_by_id: dict[str, int],
        attackers_by_id: Optional[dict[str, Iterable[str]]] = None,
    ) -> None:
        if self.entries and tick != self.entries[-1][0] + 1:
            raise ValueError(
                f"non-contiguous tick {tick} after {self.entries[-1][0]}"
            )
        attackers = {
            k: frozenset(v) for k, v in (attackers_by_id or {}).items()
        }
        self.entries.append((tick, dict(hp_by_id), attackers))
        while len(self.entries) > self.window:
            self.entries.popleft()

    def hp_series(self, char_id: str) -> list[int]:
        series = [hp[char_id] for _, hp, _ in self.entries if char_id in hp]
        if not series:
            raise UnknownCharacterError(char_id)
        return series

    def attackers(self, char_id: str) -> frozenset[str]:
        for _, hp, attackers in reversed(self.entries):
            if char_id in hp:
                return attackers.get(char_id, frozenset())
        raise UnknownCharacterError(char_id)


def discretize_hp(hp: int, hp_max: int) -> int:
    """HP points to level 0..9, full health clamped into the top level."""
    if hp_max <= 0 or not 0 <= hp <= hp_max:
        raise InvalidHpError(f"hp {hp}/{hp_max}")
    return min(9, (10 * hp) // hp_max)


def distance_zone(distance_m: float) -> str:
    """Meters from the druid to one of the four zones (right-inclusive)."""
    if distance_m < 0:
        raise ValueError(f"negative distance {distance_m}")
    if distance_m <= CONTACT_RANGE_M:
        return "Contact"
    if distance_m <= CLOSE_RANGE_M:
        return "Close"
    if distance_m <= FAR_RANGE_M:
        return "Far"
    return "VeryFar"


def _slope_points_per_tick(history: History, char_id: str) -> float:
    series = history.hp_series(char_id)
    if len(series) < 2:
        return 0.0
    return (series[-1] - series[0]) / (len(series) - 1)


def delta_hp(
    history: History, char_id: str, hp_max: int, config: PerceptionConfig = PerceptionConfig()
) -> str:
    """Recent HP trend: wounded (minus), stable (zero), or healed (plus).

    The slope is the endpoint difference over the window, as a fraction of
    max HP per tick; a 3-sample window makes anything fancier than endpoints
    indistinguishable from them.
    """
    slope = _slope_points_per_tick(history, char_id) / hp_max
    if slope < -config.theta:
        return "minus"
    if slope > config.theta:
        return "plus"
    return "zero"


def imminent_death(
    history: History,
    char_id: str,
    hp: int,
    hp_max: int,
    config: PerceptionConfig = PerceptionConfig(),
) -> bool:
    """Will this character die soon, as a human would judge it.

    True when HP is critically low outright, or when the current loss rate
    projects death within tau ticks while someone is still attacking.
    """
    history.hp_series(char_id)  # raises UnknownCharacterError when absent
    if hp / hp_max <= config.low_hp:
        return True
    loss_rate = max(0.0, -_slope_points_per_tick(history, char_id))
    if loss_rate > 0.0 and hp / loss_rate <= config.tau:
        return bool(history.attackers(char_id))
    return False


def build_snapshot(
    raw: list[RawCharacter],
    history: History,
    prev_target: Optional[str] = None,
    config: PerceptionConfig = PerceptionConfig(),
) -> BattleSnapshot:
    """Discretize a roster of alive characters into a BattleSnapshot."""
    if not raw:
        raise ValueError("empty roster")
    characters = []
    for r in raw:
        characters.append(
            CharacterState(
                id=r.id,
                hp_level=discretize_hp(r.hp, r.hp_max),
                distance=distance_zone(r.distance_m),
                ally=r.ally,
                delta_hp=delta_hp(history, r.id, r.hp_max, config),
                imminent_death=imminent_death(history, r.id, r.hp, r.hp_max, config),
                cls=r.cls,
                resists=r.resists,
            )
        )
    alive_ids = {r.id for r in raw}
    if prev_target is not None and prev_target not in alive_ids:
        prev_target = None
    return BattleSnapshot(characters=tuple(characters), prev_target=prev_target)
