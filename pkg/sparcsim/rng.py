"""Counter-based random streams.

Every trial draws from its own Philox stream keyed by the master seed, with
the (trial, point) pair in the high counter words. A trial's draws therefore
depend only on (seed, trial, point), never on which worker runs it or when.
"""

import numpy as np

# Reserved trial slot for the offline state-evolution Monte Carlo.
SE_STREAM = 2**64 - 1


def trial_rng(seed, trial, point=0):
    """Generator for one Monte Carlo trial.

    Draw order inside a trial is fixed by the harness: message bits, then
    channel gains, then noise.
    """
    if seed < 0 or trial < 0 or point < 0:
        raise ValueError(f"seed, trial and point must be non-negative, got {seed}, {trial}, {point}")
    counter = np.array([0, 0, trial, point], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


def se_rng(seed, point=0):
    return trial_rng(seed, SE_STREAM, point)
