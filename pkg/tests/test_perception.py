import pytest
from hypothesis import given
from hypothesis import strategies as st

from bayes_arena.perception import (
    History,
    InvalidHpError,
    PerceptionConfig,
    RawCharacter,
    UnknownCharacterError,
    build_snapshot,
    delta_hp,
    discretize_hp,
    distance_zone,
    imminent_death,
)
from bayes_arena.sim import World, builtin_setup


def history_of(series, attackers=(), char_id="c"):
    h = History(window=len(series))
    for k, hp in enumerate(series):
        att = {char_id: list(attackers)} if k == len(series) - 1 else None
        h.push(k, {char_id: hp}, att)
    return h


class TestDiscretizeHp:
    @pytest.mark.parametrize("hp,hp_max,level", [
        (0, 100, 0), (100, 100, 9), (55, 100, 5),
        (1, 100, 0), (99, 100, 9), (10, 100, 1), (9, 100, 0),
    ])
    def test_examples(self, hp, hp_max, level):
        assert discretize_hp(hp, hp_max) == level

    def test_rejects_bad_input(self):
        with pytest.raises(InvalidHpError):
            discretize_hp(-1, 100)
        with pytest.raises(InvalidHpError):
            discretize_hp(101, 100)
        with pytest.raises(InvalidHpError):
            discretize_hp(0, 0)

    @given(st.integers(10, 10_000))
    def test_monotone_and_surjective(self, hp_max):
        levels = [discretize_hp(hp, hp_max) for hp in range(hp_max + 1)]
        assert levels == sorted(levels)
        assert set(levels) == set(range(10))


class TestDistanceZone:
    @pytest.mark.parametrize("m,zone", [
        (0, "Contact"), (3, "Contact"), (5.0, "Contact"),
        (5.1, "Close"), (20.0, "Close"), (25, "Far"), (40.0, "Far"),
        (40.1, "VeryFar"), (50, "VeryFar"),
    ])
    def test_boundaries_right_inclusive(self, m, zone):
        assert distance_zone(m) == zone

    @given(st.floats(0, 100), st.floats(0, 100))
    def test_monotone(self, a, b):
        order = ["Contact", "Close", "Far", "VeryFar"]
        if a > b:
            a, b = b, a
        assert order.index(distance_zone(a)) <= order.index(distance_zone(b))


class TestDeltaHp:
    def test_flat_is_zero(self):
        assert delta_hp(history_of([100, 100, 100]), "c", 100) == "zero"

    def test_losing_is_minus(self):
        assert delta_hp(history_of([100, 90, 80]), "c", 100) == "minus"

    def test_gaining_is_plus(self):
        assert delta_hp(history_of([80, 85, 90]), "c", 100) == "plus"

    def test_below_threshold_is_zero(self):
        # slope -1/tick on 100 max: 0.01 < theta 0.02
        assert delta_hp(history_of([102, 101, 100]), "c", 100) == "zero"

    def test_unknown_character(self):
        with pytest.raises(UnknownCharacterError):
            delta_hp(history_of([1, 2, 3]), "nobody", 100)

    @given(st.lists(st.integers(0, 100), min_size=2, max_size=5))
    def test_antisymmetric_under_time_reversal(self, series):
        fwd = delta_hp(history_of(series), "c", 100)
        back = delta_hp(history_of(list(reversed(series))), "c", 100)
        assert {"minus": "plus", "plus": "minus", "zero": "zero"}[fwd] == back


class TestImminentDeath:
    def test_low_fraction_clause(self):
        assert imminent_death(history_of([10, 10, 10]), "c", 10, 100) is True

    def test_healthy_and_unattacked(self):
        assert imminent_death(history_of([100, 100, 100]), "c", 100, 100) is False

    def test_loss_rate_clause_needs_attacker(self):
        dying = history_of([50, 40, 30], attackers=["foe"])
        assert imminent_death(dying, "c", 30, 100) is True
        unattacked = history_of([50, 40, 30])
        assert imminent_death(unattacked, "c", 30, 100) is False

    def test_slow_loss_not_imminent(self):
        # losing 3/tick at 30 hp: 10 ticks to death > tau 5
        h = history_of([36, 33, 30], attackers=["foe"])
        assert imminent_death(h, "c", 30, 100) is False

    def test_monotone_in_hp(self):
        h = history_of([60, 50, 40], attackers=["foe"])
        flags = [imminent_death(h, "c", hp, 100) for hp in range(100, 0, -1)]
        # once true while hp falls, never flips back
        first_true = flags.index(True)
        assert all(flags[first_true:])


class TestBuildSnapshot:
    def test_setup_a_flags(self):
        snap = World(builtin_setup("A")).snapshot()
        flagged = [c.id for c in snap.characters if c.imminent_death]
        assert flagged == ["MT"]
        mt = snap.character("MT")
        assert mt.delta_hp == "minus" and mt.hp_level == 1

    def test_setup_b_flags(self):
        snap = World(builtin_setup("B")).snapshot()
        flagged = {c.id for c in snap.characters if c.imminent_death}
        assert flagged == {"MT", "Add"}

    def test_single_full_health(self):
        raw = [RawCharacter("solo", 100, 100, 0.0, True, "Healer", "Nothing")]
        snap = build_snapshot(raw, history_of([100, 100, 100], char_id="solo"))
        c = snap.characters[0]
        assert (c.hp_level, c.delta_hp, c.imminent_death) == (9, "zero", False)

    def test_dead_prev_target_dropped(self):
        raw = [RawCharacter("solo", 100, 100, 0.0, True, "Healer", "Nothing")]
        snap = build_snapshot(raw, history_of([100, 100, 100], char_id="solo"),
                              prev_target="ghost")
        assert snap.prev_target is None

    def test_empty_roster_rejected(self):
        with pytest.raises(ValueError):
            build_snapshot([], History())


class TestHistory:
    def test_contiguous_ticks_enforced(self):
        h = History(window=3)
        h.push(0, {"c": 1})
        with pytest.raises(ValueError):
            h.push(2, {"c": 1})

    def test_window_capacity(self):
        h = History(window=2)
        for k in range(5):
            h.push(k, {"c": k})
        assert h.hp_series("c") == [3, 4]

    def test_config_round_trip(self):
        config = PerceptionConfig(window=4, theta=0.05, tau=3.0, low_hp=0.2)
        assert PerceptionConfig.from_json(config.to_json()) == config
