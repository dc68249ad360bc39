"""Counter-based mismatch draws keyed by (seed, trial).

Each trial owns a Philox stream whose key is ``(seed, trial)``; the draw
index within the stream is the transistor index. Trials can therefore be
evaluated in any order or on any worker and still see identical samples.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed & MASK64, trial & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def mismatch(seed: int, trials, n: int, sigma: float) -> np.ndarray:
    """Normal(0, sigma) draws shaped ``(len(trials), n)``."""
    trials = list(trials)
    out = np.zeros((len(trials), n))
    if sigma == 0:
        return out
    for i, t in enumerate(trials):
        out[i] = trial_stream(seed, t).normal(0.0, sigma, size=n)
    return out
