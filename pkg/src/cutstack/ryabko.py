"""Ryabko-style hidden-state process and its return-time estimator.

A countable-state chain either climbs one state or resets to 0, each
with probability 1/2.  The observable emits 0 at state 0 and otherwise
symbol 1 with the state's own bias p_j (else 2).  The state is not
shown, but it is reconstructible at return times: whenever a 0 is
followed by exactly j nonzero symbols, the chain sits at state j, so the
observations at those offsets are i.i.d. with bias p_j.  That makes
every p_j estimable to any precision from one observed path, even
though one-step prediction on such processes can be made to fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class RyabkoError(ValueError):
    pass


@dataclass(frozen=True)
class RyabkoSpec:
    """Bias prefix p_1..p_J and the policy for states beyond it."""

    p: tuple[Fraction, ...]
    overflow: str = "extend"  # "extend": reuse p_J above state J; "fail": raise

    def __init__(self, p, overflow="extend"):
        probs = tuple(Fraction(v) for v in p)
        if not probs:
            raise RyabkoError("need at least one bias")
        if any(v < 0 or v > 1 for v in probs):
            raise RyabkoError("biases must lie in [0,1]")
        if overflow not in ("extend", "fail"):
            raise RyabkoError(f"unknown overflow policy {overflow!r}")
        object.__setattr__(self, "p", probs)
        object.__setattr__(self, "overflow", overflow)


def sample_ryabko(spec: RyabkoSpec, seed: int, length: int) -> str:
    """Seeded path of the observable, as a '0'/'1'/'2' string.

    The chain starts at state 0; state at step i is the climb length
    since the last reset.
    """
    if length < 1:
        raise RyabkoError("length must be >= 1")
    rng = np.random.default_rng(seed)
    climb = rng.integers(0, 2, size=length, dtype=np.int64)
    climb[0] = 0  # start at state 0
    idx = np.arange(length)
    reset_at = np.where(climb == 0, idx, 0)
    last_reset = np.maximum.accumulate(reset_at)
    state = idx - last_reset
    max_state = int(state.max())
    if max_state > len(spec.p) and spec.overflow == "fail":
        raise RyabkoError(
            f"state {max_state} exceeds supplied bias prefix {len(spec.p)}")
    biases = np.array([0.0] + [float(v) for v in spec.p], dtype=np.float64)
    lookup = np.minimum(state, len(spec.p))
    u = rng.random(length)
    x = np.where(state == 0, 0, np.where(u < biases[lookup], 1, 2))
    return "".join("012"[v] for v in x)


def return_time_indices(bits: str, j: int) -> list[int]:
    """1-based positions i with X_i = 0 followed by exactly >= j nonzero
    symbols (so the hidden state at i+j is j); requires i+j in range."""
    if j < 0:
        raise RyabkoError("offset must be >= 0")
    arr = np.frombuffer(bits.encode(), dtype=np.uint8)
    n = len(arr)
    zpos = np.flatnonzero(arr == ord("0")) + 1  # 1-based
    if j == 0:
        return [int(v) for v in zpos]
    nxt = np.append(zpos[1:], n + 1)
    keep = (nxt > zpos + j) & (zpos + j <= n)
    return [int(v) for v in zpos[keep]]


def freeze_size(precision_k: int) -> int:
    """Sample count before answering at precision 1/k; the Hoeffding bound
    2*exp(-4*ln(20k)) keeps the per-(j,k) failure probability <= 1/(10k^2)."""
    return math.ceil(2 * precision_k * precision_k * math.log(20 * precision_k))


def estimate_emission_probability(bits: str, j: int, precision_k: int
                                  ) -> Fraction | None:
    """Frequency of symbol 1 at the state-j return offsets, frozen at the
    first freeze_size(k) observations; None until enough have arrived."""
    if j < 1:
        raise RyabkoError("state must be >= 1")
    if precision_k < 1:
        raise RyabkoError("precision must be >= 1")
    need = freeze_size(precision_k)
    idx = return_time_indices(bits, j)
    if len(idx) < need:
        return None
    obs = [bits[i + j - 1] for i in idx[:need]]
    return Fraction(sum(1 for c in obs if c == "1"), need)
