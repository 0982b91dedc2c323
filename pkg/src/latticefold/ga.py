"""Fixed-inventory genetic algorithm baseline.

Individuals are sets of exactly 16 Gd positions on the 264 fuel cells.
Variation operators preserve the count: crossover keeps the shared
positions and splits the symmetric difference between the children,
mutation moves one rod to an empty slot.  The run stops when the
evaluator call count reaches the configured budget exactly; every call
is logged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fitness import DEFAULT_FITNESS, FitnessConfig, FitnessValue, fitness, ranking_key
from .lattice import FUEL_COORDS, LatticeLayout, layout_from_gd_positions, serialize
from .neutronics import BuiltinEvaluator, FidelityTier, NeutronicsResult
from .seeding import derive_rng, derive_seed

GD_INVENTORY = 16


@dataclass
class Individual:
    positions: frozenset[tuple[int, int]]
    result: NeutronicsResult | None = None
    fit: FitnessValue | None = None
    key: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.positions) != GD_INVENTORY:
            raise ValueError(f"individual must hold exactly {GD_INVENTORY} positions")

    def layout(self) -> LatticeLayout:
        return layout_from_gd_positions(self.positions)


@dataclass(frozen=True)
class GaConfig:
    population: int = 50
    p_crossover: float = 0.5
    p_mutation: float = 0.2
    tournament_k: int = 3
    eval_budget: int = 1000
    elitism: int = 1
    fidelity: FidelityTier = FidelityTier.HIGH
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.eval_budget < self.population:
            raise ValueError("eval_budget must cover the initial population")
        if not (0 <= self.p_crossover <= 1 and 0 <= self.p_mutation <= 1):
            raise ValueError("operator probabilities must lie in [0, 1]")
        if self.tournament_k < 1 or self.tournament_k > self.population:
            raise ValueError("tournament size must lie in [1, population]")
        if self.elitism < 0 or self.elitism >= self.population:
            raise ValueError("elitism must lie in [0, population)")


def random_individual(rng: np.random.Generator) -> Individual:
    picks = rng.choice(len(FUEL_COORDS), size=GD_INVENTORY, replace=False)
    return Individual(positions=frozenset(FUEL_COORDS[i] for i in picks))


def cx_set(a: Individual, b: Individual, rng: np.random.Generator) -> tuple[Individual, Individual]:
    """Count-preserving crossover: shared rods stay, the rest is split."""
    shared = a.positions & b.positions
    diff = sorted(a.positions ^ b.positions)
    order = rng.permutation(len(diff))
    half = len(diff) // 2
    child_a = shared | {diff[i] for i in order[:half]}
    child_b = shared | {diff[i] for i in order[half:]}
    return Individual(positions=frozenset(child_a)), Individual(positions=frozenset(child_b))


def mut_swap(ind: Individual, rng: np.random.Generator) -> Individual:
    """Move one uniformly chosen rod to a uniformly chosen empty fuel slot."""
    members = sorted(ind.positions)
    empties = [c for c in FUEL_COORDS if c not in ind.positions]
    out = set(ind.positions)
    out.remove(members[int(rng.integers(0, len(members)))])
    out.add(empties[int(rng.integers(0, len(empties)))])
    return Individual(positions=frozenset(out))


def select_tournament(pop: list[Individual], k: int, rng: np.random.Generator) -> Individual:
    idx = rng.choice(len(pop), size=k, replace=False)
    best = min((pop[i] for i in idx), key=lambda ind: ind.key)
    return best


@dataclass
class GaRunResult:
    best: Individual
    log: list[dict]
    evaluator_calls: int
    generations: int


def run_ga(
    cfg: GaConfig,
    evaluator=None,
    fitness_cfg: FitnessConfig = DEFAULT_FITNESS,
) -> GaRunResult:
    """Generational loop with elitism under a strict evaluation budget."""
    if evaluator is None:
        evaluator = BuiltinEvaluator()
    rng = derive_rng(cfg.seed, 1)
    log: list[dict] = []
    evals = 0

    def assess(ind: Individual, generation: int) -> Individual:
        nonlocal evals
        layout = ind.layout()
        res = evaluator(layout, cfg.fidelity, derive_seed(cfg.seed, 2, evals))
        text = serialize(layout)
        ind.result = res
        ind.fit = fitness(res, fitness_cfg)
        ind.key = ranking_key(res, text, fitness_cfg)
        log.append(
            {
                "eval_index": evals,
                "generation": generation,
                "layout": text,
                "k_eff": res.k_eff,
                "fq": res.fq,
                "fdh": res.fdh,
                "fitness": ind.fit.total,
                "gd_count": len(ind.positions),
            }
        )
        evals += 1
        return ind

    population = [assess(random_individual(rng), 0) for _ in range(cfg.population)]
    best = min(population, key=lambda ind: ind.key)

    generation = 0
    while evals < cfg.eval_budget:
        generation += 1
        n_next = min(cfg.population, cfg.eval_budget - evals)
        offspring = [
            Individual(positions=select_tournament(population, cfg.tournament_k, rng).positions)
            for _ in range(n_next)
        ]
        for j in range(1, n_next, 2):
            if rng.random() < cfg.p_crossover:
                offspring[j - 1], offspring[j] = cx_set(offspring[j - 1], offspring[j], rng)
        for j in range(n_next):
            if rng.random() < cfg.p_mutation:
                offspring[j] = mut_swap(offspring[j], rng)
        offspring = [assess(ind, generation) for ind in offspring]

        if n_next == cfg.population:
            elites = sorted(population, key=lambda ind: ind.key)[: cfg.elitism]
            population = sorted(offspring, key=lambda ind: ind.key)
            for elite in elites:
                if elite.key < population[-1].key:
                    population[-1] = elite
                    population.sort(key=lambda ind: ind.key)
        else:
            # Budget-truncated tail generation: fold the partial brood in.
            population = sorted(population + offspring, key=lambda ind: ind.key)[: cfg.population]
        gen_best = min(population, key=lambda ind: ind.key)
        if gen_best.key < best.key:
            best = gen_best

    return GaRunResult(best=best, log=log, evaluator_calls=evals, generations=generation)
