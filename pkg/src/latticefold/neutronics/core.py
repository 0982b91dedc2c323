"""Two-group diffusion evaluation of assembly layouts.

Produces k_eff, the sub-pin peak power factor (fq), the pin-integrated
hot-channel factor (fdh) and the normalized per-pin power map.  Two
fidelity tiers mirror a coarse/noisy versus fine/deterministic split of
a Monte Carlo campaign: the low tier solves on one cell per pin and
adds seeded statistical noise, the high tier refines the mesh, runs the
iteration deep and reports the deterministic answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DegenerateMaterial, NoConvergence
from ..lattice import N_SIDE, LatticeLayout, PinKind, gt_pattern, random_layout
from .backend import get_kernels

_GT_MASK = np.zeros((N_SIDE, N_SIDE), dtype=bool)
for _r, _c in gt_pattern():
    _GT_MASK[_r, _c] = True


@dataclass(frozen=True)
class TwoGroupXS:
    """Fast/thermal group constants for one pin material (cm, 1/cm)."""

    d1: float
    d2: float
    sa1: float
    sa2: float
    nu_sf1: float
    nu_sf2: float
    ss12: float

    def __post_init__(self):
        for name in ("d1", "d2", "sa1", "sa2", "nu_sf1", "nu_sf2", "ss12"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.d1 <= 0 or self.d2 <= 0:
            raise ValueError("diffusion coefficients must be positive")
        if self.sa2 <= 0:
            raise ValueError("thermal absorption must be positive")

    def as_row(self) -> np.ndarray:
        return np.array(
            [self.d1, self.d2, self.sa1, self.sa2, self.nu_sf1, self.nu_sf2, self.ss12]
        )


@dataclass(frozen=True)
class XsLibrary:
    """Per-pin-kind cross sections; the guide tube is a water channel."""

    fuel: TwoGroupXS
    gd: TwoGroupXS
    guide_tube: TwoGroupXS

    def __post_init__(self):
        if self.guide_tube.nu_sf1 != 0 or self.guide_tube.nu_sf2 != 0:
            raise ValueError("guide-tube entry must be non-fissile")

    def as_table(self) -> np.ndarray:
        """(3, 7) array indexed by PinKind code."""
        return np.stack([self.fuel.as_row(), self.gd.as_row(), self.guide_tube.as_row()])


# Shipped defaults, tuned so random-layout sweeps reproduce the expected
# reactivity topology: 16 Gd pins always sit above the k=1.08 ceiling while
# inventories near 24-32 can reach the 1.02-1.08 operating window.
DEFAULT_LIBRARY = XsLibrary(
    fuel=TwoGroupXS(1.4, 0.4, 0.010, 0.090, 0.007, 0.160, 0.018),
    gd=TwoGroupXS(1.4, 0.4, 0.010, 0.750, 0.005, 0.050, 0.018),
    guide_tube=TwoGroupXS(1.8, 0.3, 0.0004, 0.010, 0.0, 0.0, 0.045),
)

PITCH_CM = 1.26


@dataclass(frozen=True)
class SolverConfig:
    mesh_per_pin: int
    k_tolerance: float
    source_tolerance: float
    max_iterations: int = 20000
    pitch: float = PITCH_CM
    boundary: str = "reflective"

    def __post_init__(self):
        if self.mesh_per_pin not in (1, 2, 4):
            raise ValueError("mesh_per_pin must be 1, 2 or 4")
        if self.k_tolerance <= 0 or self.source_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.boundary != "reflective":
            raise ValueError("only reflective boundaries are supported")


@dataclass(frozen=True)
class NoiseModel:
    """Statistical-uncertainty emulation for the low tier."""

    sigma_k: float = 0.003
    sigma_rel: float = 0.02


DEFAULT_NOISE = NoiseModel()


class FidelityTier(Enum):
    """Evaluation precision class.

    LOW solves one cell per pin to a loose eigenvalue tolerance and
    perturbs the summary statistics with seeded Gaussian noise.  HIGH
    refines to 2x2 cells per pin and drives the fission source to a
    very tight tolerance, well past the 1e-7 eigenvalue criterion, so
    symmetry-equivalent layouts agree to ~1e-10 in k.
    """

    LOW = "low"
    HIGH = "high"

    def solver_config(self) -> SolverConfig:
        if self is FidelityTier.LOW:
            return SolverConfig(mesh_per_pin=1, k_tolerance=1e-5, source_tolerance=1e-6)
        return SolverConfig(mesh_per_pin=2, k_tolerance=1e-7, source_tolerance=1e-12)

    @property
    def noisy(self) -> bool:
        return self is FidelityTier.LOW

    @classmethod
    def from_name(cls, name: str) -> "FidelityTier":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown fidelity {name!r}, expected low or high") from None


@dataclass(frozen=True, eq=False)
class NeutronicsResult:
    """Summary of one evaluation; pin_power is mean-1 over fuel pins."""

    k_eff: float
    fq: float
    fdh: float
    pin_power: np.ndarray


def analytic_kinf(xs: TwoGroupXS) -> float:
    """Zero-leakage multiplication factor of a single material."""
    denom = (xs.sa1 + xs.ss12) * xs.sa2
    if denom == 0:
        raise DegenerateMaterial("removal rates vanish; k_inf undefined")
    return (xs.nu_sf1 * xs.sa2 + xs.nu_sf2 * xs.ss12) / denom


def solve_material_grid(mat: np.ndarray, lib: XsLibrary, cfg: SolverConfig) -> NeutronicsResult:
    """Solve an arbitrary (17, 17) material-code grid.

    Exists so tests can run non-layout fixtures (e.g. a fully
    homogeneous grid with the guide-tube pattern overridden); regular
    callers go through solve_diffusion.
    """
    mat = np.ascontiguousarray(mat, dtype=np.uint8)
    if mat.shape != (N_SIDE, N_SIDE):
        raise ValueError(f"material grid shape {mat.shape}")
    table = lib.as_table()
    # Group removal must be positive or the within-group operator loses
    # positive definiteness under reflective boundaries.
    present = np.unique(mat)
    if np.any(table[present, 2] + table[present, 6] <= 0):
        raise DegenerateMaterial("a present material has zero fast removal")

    kern = get_kernels()
    k, power, iters, status = kern.solve_two_group(
        mat,
        table,
        cfg.mesh_per_pin,
        cfg.pitch,
        cfg.k_tolerance,
        cfg.source_tolerance,
        cfg.max_iterations,
    )
    if status == kern.STATUS_DEGENERATE:
        raise DegenerateMaterial("singular group operator or zero fission source")
    if status == kern.STATUS_NO_CONVERGENCE:
        raise NoConvergence(f"power iteration hit the {cfg.max_iterations}-sweep limit")

    m = cfg.mesh_per_pin
    pin_power = power.reshape(N_SIDE, m, N_SIDE, m).sum(axis=(1, 3))
    fuel_pins = mat != PinKind.GUIDE_TUBE
    pins = pin_power[fuel_pins]
    pins = pins / pins.mean()
    fdh = float(pins.max())

    fuel_cells = np.repeat(np.repeat(fuel_pins, m, axis=0), m, axis=1)
    cells = power[fuel_cells]
    fq = float(cells.max() / cells.mean())
    return NeutronicsResult(k_eff=float(k), fq=fq, fdh=fdh, pin_power=pins)


def solve_diffusion(layout: LatticeLayout, lib: XsLibrary, cfg: SolverConfig) -> NeutronicsResult:
    """Deterministic eigenvalue solve of one layout."""
    return solve_material_grid(layout.grid, lib, cfg)


def evaluate(
    layout: LatticeLayout,
    tier: FidelityTier,
    seed: int,
    lib: XsLibrary = DEFAULT_LIBRARY,
    noise: NoiseModel = DEFAULT_NOISE,
) -> NeutronicsResult:
    """Tiered evaluation; (layout, tier, seed) fully determines the result."""
    res = solve_diffusion(layout, lib, tier.solver_config())
    if not tier.noisy:
        return res
    rng = np.random.default_rng(seed)
    k = res.k_eff + rng.normal(0.0, noise.sigma_k)
    fq = max(1.0, res.fq * (1.0 + rng.normal(0.0, noise.sigma_rel)))
    fdh = max(1.0, res.fdh * (1.0 + rng.normal(0.0, noise.sigma_rel)))
    return NeutronicsResult(k_eff=float(k), fq=float(fq), fdh=float(fdh), pin_power=res.pin_power)


class BuiltinEvaluator:
    """Callable evaluator over the in-process diffusion solver."""

    def __init__(self, lib: XsLibrary = DEFAULT_LIBRARY, noise: NoiseModel = DEFAULT_NOISE):
        self.lib = lib
        self.noise = noise

    def __call__(self, layout: LatticeLayout, tier: FidelityTier, seed: int) -> NeutronicsResult:
        return evaluate(layout, tier, seed, lib=self.lib, noise=self.noise)

    def close(self):
        pass


CALIBRATION_LEVELS = (0, 8, 16, 24, 32, 40)


@dataclass(frozen=True)
class LevelStats:
    inventory: int
    k_min: float
    k_median: float
    k_max: float


@dataclass(frozen=True)
class CalibrationReport:
    levels: tuple[LevelStats, ...]
    targets: dict[str, bool]
    passed: bool

    def level(self, inventory: int) -> LevelStats:
        for st in self.levels:
            if st.inventory == inventory:
                return st
        raise KeyError(inventory)


def calibrate(
    lib: XsLibrary = DEFAULT_LIBRARY,
    samples_per_level: int = 100,
    seed: int = 0,
) -> CalibrationReport:
    """Sweep random layouts across Gd inventories and check the k topology.

    Targets (high tier, deterministic): the clean-fuel median sits in
    [1.25, 1.45]; every 16-Gd sample stays above 1.08; the 16-Gd median
    lands in [1.10, 1.20]; and some 24-32 Gd sample reaches the
    1.02-1.08 operating window.
    """
    if samples_per_level < 1:
        raise ValueError("samples_per_level must be >= 1")
    ks: dict[int, np.ndarray] = {}
    for level in CALIBRATION_LEVELS:
        vals = np.empty(samples_per_level)
        for i in range(samples_per_level):
            rng = np.random.default_rng(np.random.SeedSequence([seed, level, i]))
            layout = random_layout(level, rng)
            vals[i] = evaluate(layout, FidelityTier.HIGH, 0, lib=lib).k_eff
        ks[level] = vals

    window = np.concatenate([ks[24], ks[32]])
    targets = {
        "inventory0_median_in_band": 1.25 <= float(np.median(ks[0])) <= 1.45,
        "all_16gd_above_barrier": bool(ks[16].min() > 1.08),
        "median_16gd_in_band": 1.10 <= float(np.median(ks[16])) <= 1.20,
        "window_reachable_24_32": bool(np.any((window >= 1.02) & (window <= 1.08))),
    }
    levels = tuple(
        LevelStats(
            inventory=level,
            k_min=float(ks[level].min()),
            k_median=float(np.median(ks[level])),
            k_max=float(ks[level].max()),
        )
        for level in CALIBRATION_LEVELS
    )
    return CalibrationReport(levels=levels, targets=targets, passed=all(targets.values()))
