"""Composite design fitness and the pairwise preference verdict.

Lower is better: a weighted sum of the two peaking factors plus a
linear penalty on the distance of k_eff from the acceptable
criticality window.  Both the GA and the preference-optimization loop
rank candidates with this single scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NonFinite
from .neutronics import NeutronicsResult


@dataclass(frozen=True)
class FitnessConfig:
    w_q: float = 0.6
    w_dh: float = 0.4
    k_lo: float = 1.02
    k_hi: float = 1.08
    penalty_weight: float = 100.0
    k_target: float = 1.05

    def __post_init__(self):
        if abs(self.w_q + self.w_dh - 1.0) > 1e-12:
            raise ValueError("peaking weights must sum to 1")
        if not self.k_lo < self.k_target < self.k_hi:
            raise ValueError("need k_lo < k_target < k_hi")
        if self.penalty_weight <= 0:
            raise ValueError("penalty weight must be positive")


DEFAULT_FITNESS = FitnessConfig()


@dataclass(frozen=True)
class FitnessValue:
    total: float
    penalty: float
    peaking_term: float


class Verdict(Enum):
    A_WINS = "a"
    B_WINS = "b"
    TIE = "tie"


def penalty(k: float, cfg: FitnessConfig = DEFAULT_FITNESS) -> float:
    """Linear cost of leaving the [k_lo, k_hi] window; zero inside."""
    if not math.isfinite(k):
        raise NonFinite(f"k is not finite: {k!r}")
    return cfg.penalty_weight * max(0.0, cfg.k_lo - k, k - cfg.k_hi)


def fitness(res: NeutronicsResult, cfg: FitnessConfig = DEFAULT_FITNESS) -> FitnessValue:
    for name, value in (("k_eff", res.k_eff), ("fq", res.fq), ("fdh", res.fdh)):
        if not math.isfinite(value):
            raise NonFinite(f"{name} is not finite: {value!r}")
    peaking = cfg.w_q * res.fq + cfg.w_dh * res.fdh
    pen = penalty(res.k_eff, cfg)
    return FitnessValue(total=peaking + pen, penalty=pen, peaking_term=peaking)


def prefer(a: NeutronicsResult, b: NeutronicsResult, cfg: FitnessConfig = DEFAULT_FITNESS) -> Verdict:
    """Strictly lower total fitness wins; exact equality is a tie."""
    fa = fitness(a, cfg).total
    fb = fitness(b, cfg).total
    if fa < fb:
        return Verdict.A_WINS
    if fb < fa:
        return Verdict.B_WINS
    return Verdict.TIE


def ranking_key(res: NeutronicsResult, layout_text: str, cfg: FitnessConfig = DEFAULT_FITNESS):
    """Deterministic total order used wherever ties must be broken: by
    fitness, then closeness of k to the target, then serialized layout."""
    return (fitness(res, cfg).total, abs(res.k_eff - cfg.k_target), layout_text)
