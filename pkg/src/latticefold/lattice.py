"""17x17 assembly geometry and the text codec for layouts.

A layout assigns one of three pin kinds to each lattice cell.  25 cells
(24 control-rod thimbles plus the central instrument tube) are fixed
water-filled guide tubes; the remaining 264 cells carry either plain
fuel or Gd-poisoned fuel.  Layouts serialize to a 17-line character
grid (``f``/``g``/``c``) that round-trips losslessly.
"""

from __future__ import annotations

import math
from enum import IntEnum

import numpy as np

from .errors import BadCharacter, BadShape, GtMismatch, InventoryOutOfRange, NonFinite

N_SIDE = 17
N_CELLS = N_SIDE * N_SIDE          # 289
CENTER = (8, 8)


class PinKind(IntEnum):
    FUEL = 0
    GD = 1
    GUIDE_TUBE = 2

    @property
    def token(self) -> str:
        return "fgc"[self.value]


_TOKEN_TO_KIND = {"f": PinKind.FUEL, "g": PinKind.GD, "c": PinKind.GUIDE_TUBE}

# Standard Westinghouse-type 17x17 thimble positions, 0-indexed, plus the
# central instrument tube.  Closed under the dihedral symmetries about (8,8).
_GT_COORDS = (
    (2, 5), (2, 8), (2, 11),
    (3, 3), (3, 13),
    (5, 2), (5, 5), (5, 8), (5, 11), (5, 14),
    (8, 2), (8, 5), (8, 8), (8, 11), (8, 14),
    (11, 2), (11, 5), (11, 8), (11, 11), (11, 14),
    (13, 3), (13, 13),
    (14, 5), (14, 8), (14, 11),
)

_GT_SET = frozenset(_GT_COORDS)

# Raster-ordered fuel-capable coordinates; index into this list is the
# canonical position used by pin-power vectors and policy logits.
FUEL_COORDS: tuple[tuple[int, int], ...] = tuple(
    (r, c) for r in range(N_SIDE) for c in range(N_SIDE) if (r, c) not in _GT_SET
)
N_FUEL = len(FUEL_COORDS)          # 264
FUEL_INDEX = {coord: i for i, coord in enumerate(FUEL_COORDS)}

_GT_MASK = np.zeros((N_SIDE, N_SIDE), dtype=bool)
for _r, _c in _GT_COORDS:
    _GT_MASK[_r, _c] = True


def gt_pattern() -> frozenset[tuple[int, int]]:
    """The fixed set of 25 guide-tube coordinates."""
    return _GT_SET


class LatticeLayout:
    """Immutable 17x17 grid of pin kinds with the guide tubes in place."""

    __slots__ = ("_grid",)

    def __init__(self, grid: np.ndarray):
        arr = np.asarray(grid, dtype=np.int8)
        if arr.shape != (N_SIDE, N_SIDE):
            raise BadShape(f"grid shape {arr.shape}, expected {(N_SIDE, N_SIDE)}")
        if arr.min() < 0 or arr.max() > 2:
            raise BadCharacter("grid values must be PinKind codes 0..2")
        gt_cells = arr == PinKind.GUIDE_TUBE
        if not np.array_equal(gt_cells, _GT_MASK):
            raise GtMismatch("guide-tube cells disagree with the fixed pattern")
        arr = arr.copy()
        arr.setflags(write=False)
        self._grid = arr

    @property
    def grid(self) -> np.ndarray:
        """Read-only (17, 17) int8 array of PinKind codes."""
        return self._grid

    def kind_at(self, row: int, col: int) -> PinKind:
        return PinKind(int(self._grid[row, col]))

    def gd_vector(self) -> np.ndarray:
        """0/1 Gd indicators over the 264 fuel positions, raster order."""
        flat = self._grid.reshape(-1)
        free = flat[~_GT_MASK.reshape(-1)]
        return (free == PinKind.GD).astype(np.float64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeLayout):
            return NotImplemented
        return np.array_equal(self._grid, other._grid)

    def __hash__(self) -> int:
        return hash(self._grid.tobytes())

    def __repr__(self) -> str:
        return f"LatticeLayout(gd={gd_count(self)})"


def all_fuel_layout() -> LatticeLayout:
    grid = np.zeros((N_SIDE, N_SIDE), dtype=np.int8)
    grid[_GT_MASK] = PinKind.GUIDE_TUBE
    return LatticeLayout(grid)


def layout_from_gd_positions(positions) -> LatticeLayout:
    """Layout with Gd at the given coords and fuel everywhere else."""
    grid = np.zeros((N_SIDE, N_SIDE), dtype=np.int8)
    grid[_GT_MASK] = PinKind.GUIDE_TUBE
    for r, c in positions:
        if (r, c) in _GT_SET:
            raise GtMismatch(f"Gd position {(r, c)} collides with a guide tube")
        grid[r, c] = PinKind.GD
    return LatticeLayout(grid)


def serialize(layout: LatticeLayout) -> str:
    """Raster-scan the grid into 17 newline-terminated rows of 17 tokens."""
    rows = []
    for r in range(N_SIDE):
        rows.append("".join("fgc"[v] for v in layout.grid[r]))
    return "\n".join(rows) + "\n"


def deserialize(text: str) -> LatticeLayout:
    """Parse serialized text back into a layout, validating strictly."""
    lines = text.splitlines()
    if len(lines) != N_SIDE:
        raise BadShape(f"expected {N_SIDE} lines, got {len(lines)}")
    grid = np.empty((N_SIDE, N_SIDE), dtype=np.int8)
    for r, line in enumerate(lines):
        if len(line) != N_SIDE:
            raise BadShape(f"line {r} has {len(line)} characters, expected {N_SIDE}")
        for c, ch in enumerate(line):
            kind = _TOKEN_TO_KIND.get(ch)
            if kind is None:
                raise BadCharacter(f"bad symbol {ch!r} at row {r}, col {c}")
            grid[r, c] = kind
    gt_cells = grid == PinKind.GUIDE_TUBE
    if not np.array_equal(gt_cells, _GT_MASK):
        raise GtMismatch("guide-tube cells disagree with the fixed pattern")
    return LatticeLayout(grid)


def apply_gt_correction(grid: np.ndarray) -> LatticeLayout:
    """Force the 25 guide-tube cells, leaving every other cell untouched.

    Idempotent; accepts any (17, 17) array of PinKind codes, e.g. raw
    policy samples that may have placed fuel or Gd on a thimble cell.
    """
    arr = np.asarray(grid, dtype=np.int8)
    if arr.shape != (N_SIDE, N_SIDE):
        raise BadShape(f"grid shape {arr.shape}, expected {(N_SIDE, N_SIDE)}")
    out = arr.copy()
    out[_GT_MASK] = PinKind.GUIDE_TUBE
    out[~_GT_MASK & (out == PinKind.GUIDE_TUBE)] = PinKind.FUEL
    return LatticeLayout(out)


def format_prompt(k: float, fq: float, fdh: float) -> str:
    """Conditioning string with fixed 5/4/4 decimal places."""
    for name, value in (("k", k), ("fq", fq), ("fdh", fdh)):
        if not math.isfinite(value):
            raise NonFinite(f"{name} is not finite: {value!r}")
    return f"Reactor Core Design (k={k:.5f}, fq={fq:.4f}, fdh={fdh:.4f}):"


def random_layout(inventory: int, rng: np.random.Generator) -> LatticeLayout:
    """Uniformly place `inventory` Gd pins on the 264 fuel positions."""
    if not 0 <= inventory <= N_FUEL:
        raise InventoryOutOfRange(f"inventory {inventory} not in [0, {N_FUEL}]")
    picks = rng.choice(N_FUEL, size=inventory, replace=False)
    return layout_from_gd_positions(FUEL_COORDS[i] for i in picks)


def gd_count(layout: LatticeLayout) -> int:
    return int(np.count_nonzero(layout.grid == PinKind.GD))
