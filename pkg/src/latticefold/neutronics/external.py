"""Line-delimited JSON protocol for out-of-process evaluators.

Lets a real transport code stand in for the built-in diffusion solver.
One request per line on stdin, one response per line on stdout, order
preserving:

    request  {"id": int, "layout": "<17x17 token text>", "fidelity": "low"|"high", "seed": int}
    response {"id": int, "k_eff": float, "fq": float, "fdh": float, "pin_power": [264 floats]}

A non-zero worker exit or a malformed reply line is surfaced as an
EvaluatorError for the request in flight.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import sys

import numpy as np

from ..errors import EvaluatorError, LatticefoldError
from ..lattice import N_FUEL, LatticeLayout, deserialize, serialize
from .core import DEFAULT_LIBRARY, DEFAULT_NOISE, FidelityTier, NeutronicsResult, evaluate


class ExternalEvaluator:
    """Client side: drives a worker subprocess over pipes."""

    def __init__(self, command: str):
        self.command = command
        self._proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        self._next_id = 0

    def __call__(self, layout: LatticeLayout, tier: FidelityTier, seed: int) -> NeutronicsResult:
        if self._proc.poll() is not None:
            raise EvaluatorError(f"worker exited with status {self._proc.returncode}")
        req = {
            "id": self._next_id,
            "layout": serialize(layout),
            "fidelity": tier.value,
            "seed": int(seed),
        }
        self._next_id += 1
        try:
            self._proc.stdin.write(json.dumps(req) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except OSError as exc:
            raise EvaluatorError(f"worker pipe failed: {exc}") from exc
        if not line:
            code = self._proc.poll()
            raise EvaluatorError(f"worker closed its output (exit status {code})")
        try:
            reply = json.loads(line)
            result = NeutronicsResult(
                k_eff=float(reply["k_eff"]),
                fq=float(reply["fq"]),
                fdh=float(reply["fdh"]),
                pin_power=np.asarray(reply["pin_power"], dtype=np.float64),
            )
            if int(reply["id"]) != req["id"]:
                raise EvaluatorError(
                    f"worker answered id {reply['id']} to request {req['id']}"
                )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise EvaluatorError(f"malformed worker reply: {line!r}") from exc
        if result.pin_power.shape != (N_FUEL,):
            raise EvaluatorError(f"pin_power must have {N_FUEL} entries")
        return result

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve_stdio(lib=DEFAULT_LIBRARY, noise=DEFAULT_NOISE, stdin=None, stdout=None) -> int:
    """Worker side: answer protocol requests with the built-in solver.

    Returns the exit status: 0 after a clean end of input, 1 if a
    request line could not be honored.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            layout = deserialize(req["layout"])
            tier = FidelityTier.from_name(req["fidelity"])
            res = evaluate(layout, tier, int(req["seed"]), lib=lib, noise=noise)
            reply = {
                "id": int(req["id"]),
                "k_eff": res.k_eff,
                "fq": res.fq,
                "fdh": res.fdh,
                "pin_power": [float(v) for v in res.pin_power],
            }
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, LatticefoldError) as exc:
            print(f"evaluator worker: {exc}", file=sys.stderr)
            return 1
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
    return 0
