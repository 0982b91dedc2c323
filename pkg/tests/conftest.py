import numpy as np
import pytest

from latticefold.lattice import N_SIDE
from latticefold.neutronics import DEFAULT_LIBRARY, SolverConfig, solve_material_grid


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    """Trigger JIT compilation once so timed tests measure solves only."""
    grid = np.zeros((N_SIDE, N_SIDE), dtype=np.uint8)
    cfg = SolverConfig(mesh_per_pin=1, k_tolerance=1e-5, source_tolerance=1e-6)
    solve_material_grid(grid, DEFAULT_LIBRARY, cfg)
