import json

import pytest

from bayes_arena.domains import (
    ALLY_SIDE_SKILLS,
    BOOL_ALLY,
    FOE_SIDE_SKILLS,
    RESISTS,
    TARGETED,
)
from bayes_arena.model import (
    InvalidParamsError,
    ModelParams,
    build_skill_model,
    build_target_model,
    models_from_json,
    models_to_json,
    rebuild_at_roster_size,
)
from bayes_arena.prob import ConditionalTable, uniform


class TestModelParams:
    def test_defaults_valid(self):
        p = ModelParams()
        assert p.persistence == 0.4 and p.prev_weight is None

    def test_exactly_one_transition_form(self):
        with pytest.raises(InvalidParamsError):
            ModelParams(persistence=0.4, prev_weight=2.0)
        with pytest.raises(InvalidParamsError):
            ModelParams(persistence=None, prev_weight=None)

    @pytest.mark.parametrize("kw", [
        {"e_ally": 1.2}, {"e_id": -0.1},
        {"persistence": 0.0}, {"persistence": 1.0},
        {"persistence": None, "prev_weight": 0.0},
        {"hp_shape_exponent": -1.0}, {"resist_penalty": 0.0},
        {"resist_penalty": 1.5},
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(InvalidParamsError):
            ModelParams(**kw)


class TestTransition:
    def test_persistence_row(self):
        tm = build_target_model(ModelParams(persistence=0.4), 7)
        row = tm.transition.rows[("t0",)]
        assert row.probs[0] == pytest.approx(0.4)
        assert all(p == pytest.approx(0.1) for p in row.probs[1:])

    def test_prev_weight_row(self):
        tm = build_target_model(
            ModelParams(persistence=None, prev_weight=2.0), 7
        )
        row = tm.transition.rows[("t3",)]
        assert row.probs[3] == pytest.approx(0.25)
        assert row.probs[0] == pytest.approx(0.125)

    def test_no_prev_uniform(self):
        tm = build_target_model(ModelParams(), 7)
        assert all(
            p == pytest.approx(1 / 7) for p in tm.transition.rows[("none",)].probs
        )

    def test_single_candidate(self):
        tm = build_target_model(ModelParams(), 1)
        assert tm.transition.rows[("t0",)].probs == (1.0,)
        assert tm.transition.rows[("none",)].probs == (1.0,)


class TestTargetTables:
    def test_soft_evidence_rows(self):
        tm = build_target_model(ModelParams(e_ally=0.6, e_id=0.9), 7)
        ally_row = tm.tables["ally"].rows[("true",)]
        assert ally_row.as_dict() == {"false": pytest.approx(0.6),
                                      "true": pytest.approx(0.4)}
        id_row = tm.tables["imminent_death"].rows[("true",)]
        assert id_row.as_dict()["true"] == pytest.approx(0.9)

    def test_untargeted_rows_all_uniform(self):
        tm = build_target_model(ModelParams(), 5)
        for name, table in tm.tables.items():
            for key, dist in table.rows.items():
                if key[-1] == "false":
                    assert dist.probs == uniform(table.child).probs, (name, key)

    def test_hp_skew_only_for_ally_tank_and_healer(self):
        tm = build_target_model(ModelParams(hp_shape_exponent=2.0), 7)
        hp = tm.tables["hp_level"]
        skewed = hp.rows[("true", "Tank", "true")]
        assert skewed.probs[0] > skewed.probs[9]
        assert skewed.probs[0] == pytest.approx(100 / 385)
        assert hp.rows[("true", "Ranged", "true")].probs == uniform(hp.child).probs
        assert hp.rows[("false", "Tank", "true")].probs == uniform(hp.child).probs

    def test_foe_distance_shape(self):
        tm = build_target_model(ModelParams(), 7)
        row = tm.tables["distance"].rows[("false", "true")]
        assert row.as_dict() == {
            "Contact": pytest.approx(0.1), "Close": pytest.approx(0.2),
            "Far": pytest.approx(0.5), "VeryFar": pytest.approx(0.2),
        }

    def test_delta_skew_cells(self):
        tm = build_target_model(ModelParams(), 7)
        delta = tm.tables["delta_hp"]
        for key in (("false", "Healer", "true"), ("true", "Tank", "true")):
            assert delta.rows[key].as_dict()["minus"] == pytest.approx(0.6)
        assert delta.rows[("false", "Tank", "true")].probs == uniform(delta.child).probs


class TestSkillTables:
    def test_uniform_prior(self):
        sm = build_skill_model(ModelParams())
        assert all(p == pytest.approx(1 / 12) for p in sm.prior.probs)

    def test_hard_side_rows(self):
        sm = build_skill_model(ModelParams())
        ally = sm.tables["ally"]
        for skill in ALLY_SIDE_SKILLS:
            assert ally.rows[(skill, "true")].as_dict() == {"false": 0.0, "true": 1.0}
        for skill in FOE_SIDE_SKILLS:
            assert ally.rows[(skill, "true")].as_dict() == {"false": 1.0, "true": 0.0}

    def test_resist_penalty_weighting(self):
        sm = build_skill_model(ModelParams(resist_penalty=0.1))
        row = sm.tables["resists"].rows[("Tank", "small_dd", "true")]
        # Nature-containing resist values carry weight 0.1 against 1 elsewhere
        assert row.prob("Nature") == pytest.approx(0.1 / 4.4)
        assert row.prob("Nothing") == pytest.approx(1 / 4.4)
        assert row.prob("FireIce") == pytest.approx(1 / 4.4)
        # ally-side skills carry no element: uniform over the 8 values
        heal_row = sm.tables["resists"].rows[("Tank", "big_heal", "true")]
        assert heal_row.probs == uniform(RESISTS).probs

    def test_heal_hp_skews(self):
        sm = build_skill_model(ModelParams())
        hp = sm.tables["hp_level"]
        big = hp.rows[("true", "Tank", "big_heal", "true")]
        small = hp.rows[("true", "Tank", "small_heal", "true")]
        debuff = hp.rows[("false", "Tank", "debuff_armor", "true")]
        assert big.probs[0] > small.probs[0] > 0.1
        assert debuff.probs[9] > debuff.probs[0]

    def test_skill_id_rows(self):
        sm = build_skill_model(ModelParams())
        idt = sm.tables["imminent_death"]
        assert idt.rows[("big_heal", "true")].prob("true") == pytest.approx(0.7)
        assert idt.rows[("big_dd", "true")].prob("true") == pytest.approx(0.7)
        assert idt.rows[("small_heal", "true")].prob("true") == pytest.approx(0.4)
        assert idt.rows[("DOT", "true")].prob("true") == pytest.approx(0.3)


class TestOverrides:
    def test_override_replaces_default(self):
        base = build_target_model(ModelParams(), 3)
        table = base.tables["imminent_death"]
        flipped = ConditionalTable(
            table.child, table.parents,
            {key: uniform(table.child) for key in table.rows},
        )
        params = ModelParams(table_overrides={"target.imminent_death": flipped})
        tm = build_target_model(params, 3)
        assert tm.tables["imminent_death"].rows[("true",)].probs == (0.5, 0.5)

    def test_bad_override_shape_rejected(self):
        bad = ConditionalTable(BOOL_ALLY, (TARGETED,), {
            ("false",): uniform(BOOL_ALLY), ("true",): uniform(BOOL_ALLY)})
        with pytest.raises(InvalidParamsError):
            build_skill_model(ModelParams(table_overrides={"skill.ally": bad}))


class TestSerialization:
    def test_bundle_round_trip_bit_exact(self):
        params = ModelParams(e_ally=0.37, e_id=0.81, persistence=0.29,
                             hp_shape_exponent=1.7, resist_penalty=0.13)
        tm = build_target_model(params, 7)
        sm = build_skill_model(params)
        doc = json.loads(json.dumps(models_to_json(tm, sm)))
        tm2, sm2 = models_from_json(doc)
        assert tm2.n == tm.n
        for name in tm.tables:
            for key in tm.tables[name].rows:
                assert tm2.tables[name].rows[key].probs == tm.tables[name].rows[key].probs
        for name in sm.tables:
            for key in sm.tables[name].rows:
                assert sm2.tables[name].rows[key].probs == sm.tables[name].rows[key].probs
        assert sm2.prior.probs == sm.prior.probs
        assert tm2.params.e_ally == params.e_ally

    def test_rebuild_at_roster_size(self):
        tm = build_target_model(ModelParams(persistence=0.4), 7)
        small = rebuild_at_roster_size(tm, 3)
        assert small.n == 3
        assert small.tables is not None
        row = small.transition.rows[("t0",)]
        assert row.probs == pytest.approx((0.4, 0.3, 0.3))
        assert rebuild_at_roster_size(tm, 7) is tm
