import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayes_arena.prob import (
    AllZeroError,
    ConditionalTable,
    Distribution,
    Domain,
    DomainMismatchError,
    FactorOutOfRangeError,
    LOG_ZERO,
    NegativeOrNaNError,
    TableShapeError,
    UnknownParentValueError,
    argmax,
    kl_divergence,
    log_normalize,
    log_score,
    normalize,
    table_from_json_str,
    table_to_json_str,
    uniform,
)

D3 = Domain("d3", ("a", "b", "c"))
D2 = Domain("d2", ("x", "y"))
TARGETS7 = Domain("t7", tuple(f"t{i}" for i in range(7)))


class TestNormalize:
    def test_proportional_scaling(self):
        dist = normalize([2, 2, 4], D3)
        assert dist.probs == (0.25, 0.25, 0.5)

    def test_already_normalized_prior_row(self):
        # persistence 0.4 over the previous target, 0.1 for the other six
        weights = [0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
        dist = normalize(weights, TARGETS7)
        assert dist.probs == pytest.approx(tuple(weights), abs=1e-15)

    def test_all_zero(self):
        with pytest.raises(AllZeroError):
            normalize([0, 0, 0], D3)

    def test_negative_and_nan(self):
        with pytest.raises(NegativeOrNaNError):
            normalize([1, -0.5, 1], D3)
        with pytest.raises(NegativeOrNaNError):
            normalize([1, float("nan"), 1], D3)
        with pytest.raises(NegativeOrNaNError):
            normalize([1, float("inf"), 1], D3)

    def test_length_mismatch(self):
        with pytest.raises(DomainMismatchError):
            normalize([1, 1], D3)

    @given(st.lists(st.floats(0.001, 1000), min_size=3, max_size=3),
           st.floats(1e-6, 1e6))
    def test_scale_invariance(self, weights, k):
        a = normalize(weights, D3)
        b = normalize([k * w for w in weights], D3)
        for x, y in zip(a.probs, b.probs):
            assert abs(x - y) <= 1e-12

    @given(st.lists(st.floats(0.001, 1000), min_size=3, max_size=3))
    def test_argmax_stability(self, weights):
        dist = normalize(weights, D3)
        best = max(range(3), key=lambda i: (weights[i], -i))
        assert argmax(dist) == D3.values[best]


class TestUniform:
    def test_seven_targets(self):
        dist = uniform(TARGETS7)
        assert all(p == pytest.approx(1 / 7) for p in dist.probs)

    def test_two(self):
        assert uniform(D2).probs == (0.5, 0.5)

    def test_degenerate(self):
        assert uniform(Domain("one", ("only",))).probs == (1.0,)


class TestArgmax:
    def test_simple(self):
        assert argmax(Distribution(D3, (0.1, 0.7, 0.2))) == "b"

    def test_tie_breaks_by_domain_order(self):
        assert argmax(Distribution(D2, (0.5, 0.5))) == "x"

    def test_single(self):
        assert argmax(Distribution(Domain("one", ("only",)), (1.0,))) == "only"


class TestLogScore:
    def test_ones(self):
        assert log_score([1.0, 1.0, 1.0]) == 0.0

    def test_product(self):
        assert log_score([0.5, 0.5]) == pytest.approx(math.log(0.25))

    def test_zero_factor_is_sentinel(self):
        assert log_score([0.3, 0.0, 0.9]) == LOG_ZERO

    def test_out_of_range(self):
        with pytest.raises(FactorOutOfRangeError):
            log_score([1.5])
        with pytest.raises(FactorOutOfRangeError):
            log_score([-0.1])

    def test_no_underflow_at_scale(self):
        score = log_score([1e-300] * 10_000)
        assert math.isfinite(score)
        assert score == pytest.approx(10_000 * math.log(1e-300))

    @given(st.lists(st.floats(1e-12, 1.0), min_size=1, max_size=8))
    @settings(max_examples=200)
    def test_exp_matches_direct_product(self, factors):
        product = math.prod(factors)
        if product == 0.0:
            return
        assert math.exp(log_score(factors)) == pytest.approx(product, rel=1e-9)


class TestLogNormalize:
    def test_sentinel_becomes_exact_zero(self):
        dist = log_normalize([0.0, LOG_ZERO, 0.0], D3)
        assert dist.probs == (0.5, 0.0, 0.5)

    def test_all_sentinel(self):
        with pytest.raises(AllZeroError):
            log_normalize([LOG_ZERO, LOG_ZERO], D2)

    def test_extreme_shift(self):
        dist = log_normalize([-1e6, -1e6 + math.log(3)], D2)
        assert dist.probs[1] == pytest.approx(0.75)


class TestKl:
    def test_identity(self):
        p = Distribution(D2, (0.3, 0.7))
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-7)

    def test_hard_zero_in_q_is_finite(self):
        p = Distribution(D2, (1.0, 0.0))
        q = Distribution(D2, (0.5, 0.5))
        assert kl_divergence(p, q) == pytest.approx(math.log(2), abs=1e-7)

    def test_smoothing_keeps_reverse_finite(self):
        p = Distribution(D2, (0.5, 0.5))
        q = Distribution(D2, (1.0, 0.0))
        value = kl_divergence(p, q)
        assert math.isfinite(value)
        assert value > 1.0  # q gives ~1e-9 to an outcome p considers even

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatchError):
            kl_divergence(Distribution(D2, (0.5, 0.5)), Distribution(D3, (1, 0, 0)))

    def test_fuzz_nonnegative(self):
        rng = random.Random(0)
        for _ in range(1000):
            k = rng.randrange(2, 9)
            dom = Domain("f", tuple(str(i) for i in range(k)))
            p = normalize([rng.random() + 1e-9 for _ in range(k)], dom)
            q = normalize([rng.random() + 1e-9 for _ in range(k)], dom)
            assert kl_divergence(p, q) >= 0.0
            assert kl_divergence(p, p) <= 1e-7


class TestDistribution:
    def test_rejects_unnormalized(self):
        with pytest.raises(Exception):
            Distribution(D2, (0.5, 0.6))

    def test_rejects_out_of_range(self):
        with pytest.raises(NegativeOrNaNError):
            Distribution(D2, (-0.1, 1.1))


class TestConditionalTable:
    def table(self):
        rows = {
            ("x",): Distribution(D3, (0.6, 0.3, 0.1)),
            ("y",): Distribution(D3, (0.2, 0.2, 0.6)),
        }
        return ConditionalTable(D3, (D2,), rows)

    def test_lookup(self):
        assert self.table().lookup(("x",)).probs == (0.6, 0.3, 0.1)

    def test_lookup_unknown_parent_value(self):
        with pytest.raises(UnknownParentValueError):
            self.table().lookup(("zzz",))

    def test_missing_row_rejected(self):
        with pytest.raises(TableShapeError):
            ConditionalTable(D3, (D2,), {("x",): uniform(D3)})

    def test_extra_row_rejected(self):
        rows = {
            ("x",): uniform(D3),
            ("y",): uniform(D3),
            ("zzz",): uniform(D3),
        }
        with pytest.raises(TableShapeError):
            ConditionalTable(D3, (D2,), rows)

    def test_every_row_must_sum_to_one(self):
        with pytest.raises(Exception):
            ConditionalTable(
                D3, (D2,),
                {("x",): uniform(D3),
                 ("y",): Distribution(D3, (0.5, 0.5, 0.5))},
            )

    def test_zero_parent_table(self):
        t = ConditionalTable(D3, (), {(): uniform(D3)})
        assert t.lookup(()).probs == uniform(D3).probs

    def test_domain_order_is_serialization_order(self):
        doc = self.table().to_json()
        assert doc["child"]["values"] == ["a", "b", "c"]
        assert list(doc["rows"]) == ["x", "y"]

    def test_json_round_trip_bit_exact(self):
        rng = random.Random(3)
        rows = {
            (v,): normalize([rng.random() for _ in D3.values], D3)
            for v in D2.values
        }
        table = ConditionalTable(D3, (D2,), rows)
        back = table_from_json_str(table_to_json_str(table))
        for key in table.rows:
            assert back.rows[key].probs == table.rows[key].probs
