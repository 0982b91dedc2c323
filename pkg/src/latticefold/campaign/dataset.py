"""Layout corpus generation with the id-coupled seed rule.

Record i is drawn and evaluated with seed = i + 1, so a dataset is a
pure function of (n, inventory, tier) and regenerates byte-identically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..lattice import LatticeLayout, deserialize, format_prompt, gd_count, random_layout, serialize
from ..neutronics import BuiltinEvaluator, FidelityTier


def dataset_record(record_id: int, inventory: int, tier: FidelityTier, evaluator) -> dict:
    seed = record_id + 1
    layout = random_layout(inventory, np.random.default_rng(seed))
    res = evaluator(layout, tier, seed)
    return {
        "id": record_id,
        "seed": seed,
        "prompt": format_prompt(res.k_eff, res.fq, res.fdh),
        "layout": serialize(layout),
        "k_eff": res.k_eff,
        "fq": res.fq,
        "fdh": res.fdh,
        "fidelity": tier.value,
        "gd_count": gd_count(layout),
    }


def generate_dataset(
    n: int,
    inventory: int,
    tier: FidelityTier,
    out_path: str | Path,
    evaluator=None,
) -> int:
    """Write n JSONL records; returns the number of evaluator calls."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if evaluator is None:
        evaluator = BuiltinEvaluator()
    out_path = Path(out_path)
    with out_path.open("w") as fh:
        for record_id in range(n):
            fh.write(json.dumps(dataset_record(record_id, inventory, tier, evaluator)) + "\n")
    return n


def load_dataset_layouts(path: str | Path) -> list[LatticeLayout]:
    layouts = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                layouts.append(deserialize(json.loads(line)["layout"]))
    return layouts
