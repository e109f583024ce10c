"""Counter-based random substreams for reproducible Monte Carlo.

Every stochastic draw in a campaign comes from a Philox generator keyed by
(seed, trial, vehicle, slot, purpose).  Streams are independent of execution
order, so trials can run in parallel and still reproduce bit-identically.
"""

from __future__ import annotations

import numpy as np

_PURPOSES = {
    "init": 0,      # initial speed draw
    "prior": 1,     # noisy prior means handed to the trackers
    "truth": 2,     # ground-truth process noise
    "obs": 3,       # observation noise
    "pf": 4,        # particle-filter proposal/resampling draws
    "mc": 5,        # free-standing Monte Carlo checks
}


def substream(seed: int, trial: int = 0, vehicle: int = 0, slot: int = 0,
              purpose: str = "mc") -> np.random.Generator:
    """Return the Philox generator for one (trial, vehicle, slot, purpose) cell."""
    key = np.random.SeedSequence(
        [int(seed), int(trial), int(vehicle), int(slot), _PURPOSES[purpose]]
    )
    return np.random.Generator(np.random.Philox(key))
