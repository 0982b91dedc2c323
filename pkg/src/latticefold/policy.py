"""Generative layout policy and its training loops.

The policy keeps one Gd-versus-fuel logit per free lattice position
and samples positions independently; guide tubes are forced after
sampling.  Pretraining is closed-form weighted maximum likelihood on
layout corpora.  Online preference optimization samples two candidates
per step, lets the evaluator pick the winner and ascends the
likelihood margin between winner and loser.

With this natural parameterization the pair margin
log p(winner) - log p(loser) is linear in the logits, so a preference
step increases the margin for any positive learning rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit as _sigmoid

from .fitness import DEFAULT_FITNESS, FitnessConfig, FitnessValue, Verdict, fitness, prefer, ranking_key
from .lattice import (
    FUEL_COORDS,
    N_FUEL,
    N_SIDE,
    LatticeLayout,
    PinKind,
    apply_gt_correction,
    format_prompt,
    gd_count,
    serialize,
)
from .neutronics import BuiltinEvaluator, FidelityTier, NeutronicsResult
from .seeding import derive_rng, derive_seed

VARIANT = "per-position-bernoulli"


def _logsigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def bernoulli_log_prob(logits: np.ndarray, indicators: np.ndarray) -> float:
    """Joint log-likelihood of a 0/1 vector under independent Bernoullis."""
    return float(np.sum(indicators * _logsigmoid(logits) + (1.0 - indicators) * _logsigmoid(-logits)))


@dataclass(frozen=True)
class PolicyParams:
    logits: np.ndarray
    variant: str = VARIANT

    def __post_init__(self):
        arr = np.asarray(self.logits, dtype=np.float64).copy()
        if arr.shape != (N_FUEL,):
            raise ValueError(f"logits must have shape ({N_FUEL},)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("logits must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "logits", arr)

    def gd_probabilities(self) -> np.ndarray:
        return _sigmoid(self.logits)

    def expected_inventory(self) -> float:
        return float(self.gd_probabilities().sum())


def uniform_params() -> PolicyParams:
    return PolicyParams(logits=np.zeros(N_FUEL))


@dataclass(frozen=True)
class SampleTrace:
    layout: LatticeLayout
    log_prob: float


def sample(params: PolicyParams, temperature: float, rng: np.random.Generator) -> SampleTrace:
    """Draw one layout; log_prob is recorded at temperature-1 semantics."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    probs = _sigmoid(params.logits / temperature)
    draws = rng.random(N_FUEL) < probs
    grid = np.zeros((N_SIDE, N_SIDE), dtype=np.int8)
    for i, (r, c) in enumerate(FUEL_COORDS):
        if draws[i]:
            grid[r, c] = PinKind.GD
    layout = apply_gt_correction(grid)
    return SampleTrace(layout=layout, log_prob=bernoulli_log_prob(params.logits, draws.astype(np.float64)))


def log_prob(params: PolicyParams, layout: LatticeLayout) -> float:
    return bernoulli_log_prob(params.logits, layout.gd_vector())


def pretrain_mle(corpora: list[tuple[list[LatticeLayout], float]]) -> PolicyParams:
    """Weighted per-position frequencies with add-one smoothing."""
    counts = np.zeros(N_FUEL)
    total = 0.0
    for layouts, weight in corpora:
        for layout in layouts:
            counts += weight * layout.gd_vector()
            total += weight
    p = (counts + 1.0) / (total + 2.0)
    return PolicyParams(logits=np.log(p / (1.0 - p)))


@dataclass(frozen=True)
class PreferencePair:
    winner: LatticeLayout
    loser: LatticeLayout
    prompt: str
    winner_fitness: float
    loser_fitness: float

    def __post_init__(self):
        if not self.winner_fitness < self.loser_fitness:
            raise ValueError("winner must have strictly lower fitness")


@dataclass(frozen=True)
class DpoConfig:
    beta: float = 0.01
    # Sized for the 264-logit tabular policy: logits must move O(1) within
    # 500 steps for the sampling distribution to shift visibly.
    learning_rate: float = 25.0
    steps: int = 500
    candidates_per_step: int = 2
    temperature: float = 1.0
    fidelity: FidelityTier = FidelityTier.HIGH
    seed: int = 0

    def __post_init__(self):
        if self.beta <= 0 or self.temperature <= 0:
            raise ValueError("beta and temperature must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.candidates_per_step != 2:
            raise ValueError("pairwise preference updates need exactly 2 candidates per step")


def dpo_loss(params: PolicyParams, pair: PreferencePair, beta: float) -> float:
    margin = log_prob(params, pair.winner) - log_prob(params, pair.loser)
    return float(np.logaddexp(0.0, -beta * margin))


def dpo_step(params: PolicyParams, pair: PreferencePair, cfg: DpoConfig) -> PolicyParams:
    """One analytic gradient-descent step on the preference loss."""
    w = pair.winner.gd_vector()
    l = pair.loser.gd_vector()
    margin = log_prob(params, pair.winner) - log_prob(params, pair.loser)
    grad = -_sigmoid(-cfg.beta * margin) * cfg.beta * (w - l)
    return PolicyParams(logits=params.logits - cfg.learning_rate * grad, variant=params.variant)


@dataclass
class DpoRunResult:
    params: PolicyParams
    best_layout: LatticeLayout
    best_result: NeutronicsResult
    best_fitness: FitnessValue
    steps: list[dict]
    log: list[dict]
    evaluator_calls: int


def run_online_dpo(
    params: PolicyParams,
    evaluator=None,
    fitness_cfg: FitnessConfig = DEFAULT_FITNESS,
    cfg: DpoConfig = DpoConfig(),
) -> DpoRunResult:
    """Online preference loop: sample two, evaluate both, reinforce the winner.

    Ties skip the update but still consume budget, so evaluator calls
    total steps * 2 exactly.
    """
    if evaluator is None:
        evaluator = BuiltinEvaluator()
    rng = derive_rng(cfg.seed, 3)
    prompt = format_prompt(fitness_cfg.k_target, 1.0, 1.0)
    log: list[dict] = []
    step_log: list[dict] = []
    best = None
    evals = 0

    for step in range(cfg.steps):
        traces = [sample(params, cfg.temperature, rng) for _ in range(cfg.candidates_per_step)]
        results = []
        for trace in traces:
            res = evaluator(trace.layout, cfg.fidelity, derive_seed(cfg.seed, 4, evals))
            results.append(res)
            evals += 1

        cand_records = []
        for ci, (trace, res) in enumerate(zip(traces, results)):
            text = serialize(trace.layout)
            fit = fitness(res, fitness_cfg)
            cand_records.append(
                {
                    "eval_index": evals - cfg.candidates_per_step + ci,
                    "step": step,
                    "candidate": ci,
                    "layout": text,
                    "k_eff": res.k_eff,
                    "fq": res.fq,
                    "fdh": res.fdh,
                    "fitness": fit.total,
                    "gd_count": gd_count(trace.layout),
                }
            )
            key = ranking_key(res, text, fitness_cfg)
            if best is None or key < best[0]:
                best = (key, trace.layout, res, fit)

        verdict = prefer(results[0], results[1], fitness_cfg)
        loss = None
        winner = None
        if verdict is not Verdict.TIE:
            wi, li = (0, 1) if verdict is Verdict.A_WINS else (1, 0)
            pair = PreferencePair(
                winner=traces[wi].layout,
                loser=traces[li].layout,
                prompt=prompt,
                winner_fitness=cand_records[wi]["fitness"],
                loser_fitness=cand_records[li]["fitness"],
            )
            loss = dpo_loss(params, pair, cfg.beta)
            params = dpo_step(params, pair, cfg)
            winner = wi
        log.extend(cand_records)
        step_log.append(
            {
                "step": step,
                "winner": winner,
                "loss": loss,
                "expected_inventory": params.expected_inventory(),
            }
        )

    return DpoRunResult(
        params=params,
        best_layout=best[1],
        best_result=best[2],
        best_fitness=best[3],
        steps=step_log,
        log=log,
        evaluator_calls=evals,
    )


def save_checkpoint(params: PolicyParams, path: str | Path, metadata: dict | None = None) -> None:
    payload = {
        "variant": params.variant,
        "logits": [float(v) for v in params.logits],
        "metadata": metadata or {},
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_checkpoint(path: str | Path) -> PolicyParams:
    payload = json.loads(Path(path).read_text())
    return PolicyParams(logits=np.array(payload["logits"], dtype=np.float64), variant=payload["variant"])
