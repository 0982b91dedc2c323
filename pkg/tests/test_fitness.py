import numpy as np
import pytest

from latticefold.errors import NonFinite
from latticefold.fitness import (
    DEFAULT_FITNESS,
    FitnessConfig,
    Verdict,
    fitness,
    penalty,
    prefer,
)
from latticefold.neutronics import NeutronicsResult

_PP = np.ones(264)


def res(k, fq, fdh):
    return NeutronicsResult(k_eff=k, fq=fq, fdh=fdh, pin_power=_PP)


class TestPenalty:
    def test_inside_window_is_zero(self):
        assert penalty(1.05) == 0.0
        assert penalty(1.02) == 0.0
        assert penalty(1.08) == 0.0

    def test_high_side(self):
        assert abs(penalty(1.10) - 100 * (1.10 - 1.08)) < 1e-12

    def test_low_side(self):
        assert abs(penalty(1.00) - 100 * (1.02 - 1.00)) < 1e-12

    def test_piecewise_linear_slopes(self):
        eps = 1e-6
        lo_slope = (penalty(1.02 - 2 * eps) - penalty(1.02 - eps)) / eps
        hi_slope = (penalty(1.08 + 2 * eps) - penalty(1.08 + eps)) / eps
        assert lo_slope == pytest.approx(100.0, rel=1e-6)
        assert hi_slope == pytest.approx(100.0, rel=1e-6)

    def test_continuity_at_boundaries(self):
        for edge in (1.02, 1.08):
            assert penalty(edge + 1e-12) < 1e-9
            assert penalty(edge - 1e-12) < 1e-9

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            penalty(float("nan"))


class TestFitness:
    def test_ideal_targets(self):
        val = fitness(res(1.05, 1.0, 1.0))
        assert abs(val.total - 1.0) < 1e-12
        assert val.penalty == 0.0

    def test_barrier_plateau_arithmetic(self):
        val = fitness(res(1.157, 1.7, 1.5))
        expected = 0.6 * 1.7 + 0.4 * 1.5 + 100 * (1.157 - 1.08)
        assert abs(val.total - expected) < 1e-12
        assert round(val.total, 2) == 9.32

    def test_window_violation_decomposition(self):
        val = fitness(res(1.10, 1.2, 1.1))
        assert abs(val.total - (0.72 + 0.44 + 2.0)) < 1e-12
        assert abs(val.penalty - 2.0) < 1e-12
        assert abs(val.peaking_term - 1.16) < 1e-12
        assert val.total == val.peaking_term + val.penalty

    def test_monotone_in_each_argument(self):
        base = fitness(res(1.05, 1.3, 1.2)).total
        assert fitness(res(1.05, 1.4, 1.2)).total > base
        assert fitness(res(1.05, 1.3, 1.3)).total > base
        assert fitness(res(1.12, 1.3, 1.2)).total > base
        assert fitness(res(0.99, 1.3, 1.2)).total > base

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            fitness(res(float("inf"), 1.0, 1.0))


class TestPrefer:
    def test_clear_winner(self):
        assert prefer(res(1.05, 1.0, 1.0), res(1.157, 1.7, 1.5)) is Verdict.A_WINS

    def test_identical_results_tie(self):
        a = res(1.06, 1.3, 1.2)
        assert prefer(a, a) is Verdict.TIE

    def test_equal_totals_from_different_triples(self):
        # 0.6*2.0 + 0.4*1.0 == 0.6*1.0 + 0.4*2.5 == 1.6 exactly
        a = res(1.05, 2.0, 1.0)
        b = res(1.04, 1.0, 2.5)
        assert fitness(a).total == fitness(b).total == 1.6
        assert prefer(a, b) is Verdict.TIE

    def test_antisymmetric_over_random_pairs(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            a = res(rng.uniform(0.9, 1.3), rng.uniform(1, 3), rng.uniform(1, 2))
            b = res(rng.uniform(0.9, 1.3), rng.uniform(1, 3), rng.uniform(1, 2))
            ab, ba = prefer(a, b), prefer(b, a)
            if ab is Verdict.A_WINS:
                assert ba is Verdict.B_WINS
            elif ab is Verdict.B_WINS:
                assert ba is Verdict.A_WINS
            else:
                assert ba is Verdict.TIE
            # consistent with the scalar ordering
            fa, fb = fitness(a).total, fitness(b).total
            assert (ab is Verdict.A_WINS) == (fa < fb)


class TestConfigValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            FitnessConfig(w_q=0.7, w_dh=0.4)

    def test_target_inside_window(self):
        with pytest.raises(ValueError):
            FitnessConfig(k_target=1.10)

    def test_defaults(self):
        cfg = DEFAULT_FITNESS
        assert (cfg.w_q, cfg.w_dh, cfg.k_lo, cfg.k_hi) == (0.6, 0.4, 1.02, 1.08)
        assert cfg.penalty_weight == 100.0 and cfg.k_target == 1.05
