import itertools
import math

import numpy as np
import pytest

from latticefold.lattice import N_FUEL, all_fuel_layout, gd_count, random_layout
from latticefold.neutronics import NeutronicsResult
from latticefold.policy import (
    DpoConfig,
    PolicyParams,
    PreferencePair,
    bernoulli_log_prob,
    dpo_loss,
    dpo_step,
    load_checkpoint,
    log_prob,
    pretrain_mle,
    run_online_dpo,
    sample,
    save_checkpoint,
    uniform_params,
)
from latticefold.seeding import derive_rng

PROMPT = "Reactor Core Design (k=1.05000, fq=1.0000, fdh=1.0000):"


def _pair(rng, params=None):
    w = random_layout(int(rng.integers(10, 30)), rng)
    l = random_layout(int(rng.integers(10, 30)), rng)
    return PreferencePair(winner=w, loser=l, prompt=PROMPT, winner_fitness=1.0, loser_fitness=2.0)


class TestSample:
    def test_degenerate_logits_give_all_fuel(self):
        params = PolicyParams(logits=np.full(N_FUEL, -1e9))
        for s in range(5):
            trace = sample(params, 1.0, np.random.default_rng(s))
            assert trace.layout == all_fuel_layout()

    def test_uniform_logits_binomial_mean(self):
        params = uniform_params()
        rng = np.random.default_rng(11)
        counts = [gd_count(sample(params, 1.0, rng).layout) for _ in range(1000)]
        sigma = math.sqrt(N_FUEL * 0.25)
        assert abs(np.mean(counts) - N_FUEL / 2) < 3 * sigma / math.sqrt(1000)

    def test_seeded_determinism(self):
        params = pretrain_mle([([random_layout(16, derive_rng(1, i)) for i in range(50)], 1.0)])
        a = sample(params, 1.0, np.random.default_rng(3))
        b = sample(params, 1.0, np.random.default_rng(3))
        assert a.layout == b.layout and a.log_prob == b.log_prob

    def test_trace_log_prob_is_t1_semantics(self):
        params = pretrain_mle([([random_layout(16, derive_rng(2, i)) for i in range(50)], 1.0)])
        trace = sample(params, 2.5, np.random.default_rng(4))
        assert trace.log_prob == pytest.approx(log_prob(params, trace.layout), abs=1e-12)

    def test_temperature_must_be_positive(self):
        with pytest.raises(ValueError):
            sample(uniform_params(), 0.0, np.random.default_rng(0))


class TestLogProb:
    def test_uniform_logits_value(self):
        layout = random_layout(30, np.random.default_rng(5))
        expected = N_FUEL * math.log(0.5)
        assert log_prob(uniform_params(), layout) == pytest.approx(expected, abs=1e-9)
        assert round(expected, 2) == -182.99

    def test_peaked_logits_approach_zero(self):
        logits = np.full(N_FUEL, -50.0)
        params = PolicyParams(logits=logits)
        assert log_prob(params, all_fuel_layout()) > -1e-15

    def test_reduced_fixture_normalizes(self):
        # brute-force over every outcome of small Bernoulli vectors
        rng = np.random.default_rng(6)
        for n in (2, 6, 10):
            logits = rng.normal(0, 2, size=n)
            total = 0.0
            for bits in itertools.product((0.0, 1.0), repeat=n):
                total += math.exp(bernoulli_log_prob(logits, np.array(bits)))
            assert abs(total - 1.0) < 1e-10


class TestPretrain:
    def test_empty_corpora_is_uniform(self):
        params = pretrain_mle([])
        assert np.all(params.logits == 0.0)

    def test_repeated_layout_frequency(self):
        n = 37
        layout = random_layout(16, np.random.default_rng(7))
        params = pretrain_mle([([layout] * n, 1.0)])
        probs = params.gd_probabilities()
        vec = layout.gd_vector().astype(bool)
        assert np.allclose(probs[vec], (n + 1) / (n + 2), atol=1e-12)
        assert np.allclose(probs[~vec], 1 / (n + 2), atol=1e-12)

    def test_large_uniform_corpus_expected_inventory(self):
        corpus = [random_layout(16, derive_rng(8, i)) for i in range(10000)]
        params = pretrain_mle([(corpus, 1.0)])
        assert abs(params.expected_inventory() - 16.0) < 1.0
        assert np.all(np.abs(params.gd_probabilities() - 16 / 264) < 0.03)

    def test_weighted_mixture(self):
        a = [all_fuel_layout()]
        b = [random_layout(264, np.random.default_rng(9))]
        params = pretrain_mle([(a, 1.0), (b, 3.0)])
        # p = (3*1 + 1) / (4 + 2) at every position
        assert np.allclose(params.gd_probabilities(), 4 / 6, atol=1e-12)

    def test_pretrained_sampling_recovers_inventory(self):
        corpus = [random_layout(16, derive_rng(10, i)) for i in range(2000)]
        params = pretrain_mle([(corpus, 1.0)])
        rng = np.random.default_rng(12)
        counts = [gd_count(sample(params, 1.0, rng).layout) for _ in range(1000)]
        assert abs(np.mean(counts) - 16.0) < 1.0


class TestDpoLoss:
    def test_zero_margin_is_ln2(self):
        layout = random_layout(16, np.random.default_rng(13))
        pair = PreferencePair(layout, layout, PROMPT, 1.0, 2.0)
        assert dpo_loss(uniform_params(), pair, beta=0.01) == pytest.approx(math.log(2), abs=1e-12)

    def test_unit_scaled_margin(self):
        # margin 100 at beta 0.01 -> -log sigmoid(1)
        rng = np.random.default_rng(14)
        w = random_layout(20, rng)
        l = random_layout(20, rng)
        delta = np.asarray(w.gd_vector() - l.gd_vector())
        logits = np.zeros(N_FUEL)
        # construct logits with margin exactly 100: margin = delta . logits
        support = np.nonzero(delta)[0]
        logits[support] = 100.0 * delta[support] / np.sum(delta[support] ** 2)
        params = PolicyParams(logits=logits)
        pair = PreferencePair(w, l, PROMPT, 1.0, 2.0)
        assert dpo_loss(params, pair, beta=0.01) == pytest.approx(
            math.log(1 + math.exp(-1.0)), abs=1e-9
        )

    def test_saturates_to_zero(self):
        rng = np.random.default_rng(15)
        w = random_layout(20, rng)
        l = random_layout(20, rng)
        delta = w.gd_vector() - l.gd_vector()
        params = PolicyParams(logits=np.clip(1e4 * delta, -1e4, 1e4))
        pair = PreferencePair(w, l, PROMPT, 1.0, 2.0)
        assert dpo_loss(params, pair, beta=0.01) < 1e-8


class TestDpoStep:
    def test_identical_layouts_no_update(self):
        layout = random_layout(16, np.random.default_rng(16))
        pair = PreferencePair(layout, layout, PROMPT, 1.0, 2.0)
        params = uniform_params()
        out = dpo_step(params, pair, DpoConfig(seed=0))
        assert np.array_equal(out.logits, params.logits)

    def test_gradient_matches_finite_differences(self):
        # oracle: central differences of the loss; error measured in the
        # vector max norm relative to the gradient magnitude
        rng = np.random.default_rng(17)
        cfg = DpoConfig(seed=0)
        h = 1e-5
        for _ in range(10):
            pair = _pair(rng)
            logits = rng.normal(0, 1.5, size=N_FUEL)
            params = PolicyParams(logits=logits)
            analytic = (params.logits - dpo_step(params, pair, cfg).logits) / cfg.learning_rate
            active = np.nonzero(pair.winner.gd_vector() - pair.loser.gd_vector())[0]
            probe = list(active[:5]) + [int(a) for a in rng.integers(0, N_FUEL, 3)]
            fd = np.zeros(len(probe))
            for pos, idx in enumerate(probe):
                up = logits.copy()
                up[idx] += h
                dn = logits.copy()
                dn[idx] -= h
                fd[pos] = (
                    dpo_loss(PolicyParams(logits=up), pair, cfg.beta)
                    - dpo_loss(PolicyParams(logits=dn), pair, cfg.beta)
                ) / (2 * h)
            err = np.abs(analytic[probe] - fd).max()
            scale = max(np.abs(analytic).max(), np.abs(fd).max())
            assert err / scale < 1e-6

    def test_margin_strictly_increases(self):
        rng = np.random.default_rng(18)
        for lr in (0.01, 0.5, 25.0):
            pair = _pair(rng)
            params = PolicyParams(logits=rng.normal(0, 1, size=N_FUEL))
            before = log_prob(params, pair.winner) - log_prob(params, pair.loser)
            stepped = dpo_step(params, pair, DpoConfig(learning_rate=lr, seed=0))
            after = log_prob(stepped, pair.winner) - log_prob(stepped, pair.loser)
            assert after > before

    def test_loss_decreases_at_default_rate(self):
        rng = np.random.default_rng(19)
        cfg = DpoConfig(seed=0)
        for _ in range(10):
            pair = _pair(rng)
            params = PolicyParams(logits=rng.normal(0, 1, size=N_FUEL))
            before = dpo_loss(params, pair, cfg.beta)
            after = dpo_loss(dpo_step(params, pair, cfg), pair, cfg.beta)
            assert after < before


class TestRunOnlineDpo:
    def test_budget_accounting(self):
        params = uniform_params()
        cfg = DpoConfig(steps=6, seed=1)
        out = run_online_dpo(params, cfg=cfg)
        assert out.evaluator_calls == 12
        assert len(out.log) == 12
        assert len(out.steps) == 6

    def test_constant_evaluator_all_ties(self):
        fixed = NeutronicsResult(k_eff=1.05, fq=1.3, fdh=1.2, pin_power=np.ones(264))

        def evaluator(layout, tier, seed):
            return fixed

        params = pretrain_mle([([random_layout(16, derive_rng(20, i)) for i in range(20)], 1.0)])
        out = run_online_dpo(params, evaluator=evaluator, cfg=DpoConfig(steps=8, seed=2))
        assert np.array_equal(out.params.logits, params.logits)
        assert all(step["winner"] is None for step in out.steps)
        assert out.evaluator_calls == 16

    def test_guide_tube_safety_and_validity(self):
        out = run_online_dpo(uniform_params(), cfg=DpoConfig(steps=3, seed=3))
        from latticefold.lattice import deserialize

        for rec in out.log:
            deserialize(rec["layout"])  # raises if any GT cell is wrong

    def test_rerun_identical(self):
        cfg = DpoConfig(steps=4, seed=4)
        a = run_online_dpo(uniform_params(), cfg=cfg)
        b = run_online_dpo(uniform_params(), cfg=cfg)
        assert [r["layout"] for r in a.log] == [r["layout"] for r in b.log]
        assert np.array_equal(a.params.logits, b.params.logits)

    def test_candidates_per_step_fixed_at_two(self):
        with pytest.raises(ValueError):
            DpoConfig(candidates_per_step=3)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        params = pretrain_mle([([random_layout(16, derive_rng(21, i)) for i in range(30)], 1.0)])
        path = tmp_path / "policy.json"
        save_checkpoint(params, path, metadata={"note": "test"})
        loaded = load_checkpoint(path)
        assert np.allclose(loaded.logits, params.logits, atol=0)
        assert loaded.variant == params.variant

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            PolicyParams(logits=np.zeros(10))
        with pytest.raises(ValueError):
            PolicyParams(logits=np.full(N_FUEL, np.nan))
