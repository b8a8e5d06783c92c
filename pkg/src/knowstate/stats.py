"""Exact binomial tails, Wilson intervals, sphere sampling and the trial harness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Iterable, Optional

import numpy as np

from .quantum import Axis, Direction

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling-series coefficients 1/12, 1/360, 1/1260, 1/1680, 1/1188
_S0, _S1, _S2, _S3, _S4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n), for integer n >= 1."""
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n <= 15
    if small.any():
        ns = n[small]
        out[small] = [math.lgamma(v + 1.0) - (v + 0.5) * math.log(v) + v - _LN_SQRT_2PI
                      for v in ns]
    big = ~small
    if big.any():
        nb = n[big]
        nn = nb * nb
        out[big] = np.where(
            nb > 500, (_S0 - _S1 / nn) / nb,
            np.where(nb > 80, (_S0 - (_S1 - _S2 / nn) / nn) / nb,
                     np.where(nb > 35, (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / nb,
                              (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / nb)))
    return out


def _bd0(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """x log(x/m) + m - x, evaluated without cancellation near x == m."""
    x = np.asarray(x, dtype=float)
    m = np.broadcast_to(np.asarray(m, dtype=float), x.shape)
    out = np.empty_like(x)
    near = np.abs(x - m) < 0.1 * (x + m)
    far = ~near
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out[far] = x[far] * np.log(x[far] / m[far]) + m[far] - x[far]
    if near.any():
        xs, ms = x[near], m[near]
        v = (xs - ms) / (xs + ms)
        s = (xs - ms) * v
        ej = 2.0 * xs * v
        v2 = v * v
        for j in range(1, 1000):
            ej = ej * v2
            s1 = s + ej / (2 * j + 1)
            if np.array_equal(s1, s):
                break
            s = s1
        out[near] = s
    return out


def binomial_log_pmf(n: int, ks: np.ndarray, p: float) -> np.ndarray:
    """log P[X = k] via the saddle-point (Loader) decomposition."""
    ks = np.asarray(ks, dtype=float)
    q = 1.0 - p
    out = np.empty_like(ks)
    lo = ks == 0
    hi = ks == n
    mid = ~(lo | hi)
    with np.errstate(divide="ignore"):
        out[lo] = n * math.log1p(-p) if p < 1 else -np.inf
        out[hi] = n * math.log(p) if p > 0 else -np.inf
    if mid.any():
        if p == 0.0 or p == 1.0:
            out[mid] = -np.inf
        else:
            k = ks[mid]
            nk = n - k
            lc = (_stirlerr(np.array([n]))[0] - _stirlerr(k) - _stirlerr(nk)
                  - _bd0(k, n * p) - _bd0(nk, n * q))
            lf = 2 * _LN_SQRT_2PI + np.log(k) + np.log1p(-k / n)
            out[mid] = lc - 0.5 * lf
    return out


def binomial_tail(n: int, k: int, p: float) -> float:
    """Exact P[X >= k] for X ~ Binomial(n, p)."""
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise TypeError("n and k must be integers")
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if k == 0:
        return 1.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    logs = binomial_log_pmf(int(n), np.arange(k, n + 1), p)
    top = logs.max()
    if top == -np.inf:
        return 0.0
    terms = np.sort(np.exp(logs - top))
    return min(1.0, math.exp(top) * math.fsum(terms))


def binomial_cdf(n: int, k: int, p: float) -> float:
    """P[X <= k]; summed directly, not as ``1 - tail``."""
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    # P[X <= k] for Bin(n, p) equals P[Y >= n-k] for Y ~ Bin(n, 1-p)
    return binomial_tail(n, n - k, 1.0 - p)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials <= 0 or not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, trials > 0; got {successes}/{trials}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    n = trials
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (phat + z2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom
    low = 0.0 if successes == 0 else max(0.0, min(phat, centre - half))
    high = 1.0 if successes == trials else min(1.0, max(phat, centre + half))
    return low, high


confidence_interval = wilson_interval


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True)
class TrialEstimate:
    trials: int
    successes: int
    estimate: float
    low: float
    high: float
    level: float = 0.95

    @classmethod
    def from_counts(cls, successes: int, trials: int, level: float = 0.95) -> "TrialEstimate":
        low, high = wilson_interval(successes, trials, level)
        return cls(trials, successes, successes / trials, low, high, level)

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    def as_dict(self) -> dict:
        return {"trials": self.trials, "successes": self.successes,
                "estimate": self.estimate, "ci_low": self.low, "ci_high": self.high,
                "level": self.level}


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    """Child stream for trial ``index``; depends only on (seed, index)."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))))


def run_trials(experiment: Callable[[np.random.Generator], bool], trials: int,
               master_seed: int, level: float = 0.95,
               order: Optional[Iterable[int]] = None) -> TrialEstimate:
    """Run ``experiment`` once per trial, each on its own child stream.

    ``order`` permutes the execution order of trial indices; the result
    does not depend on it.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    indices = range(trials) if order is None else list(order)
    if order is not None and sorted(indices) != list(range(trials)):
        raise ValueError("order must be a permutation of range(trials)")
    successes = 0
    for i in indices:
        successes += bool(experiment(trial_rng(master_seed, i)))
    return TrialEstimate.from_counts(successes, trials, level)


def uniform_direction(rng: np.random.Generator) -> Direction:
    z = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    s = math.sqrt(max(0.0, 1.0 - z * z))
    return Direction.from_vector((s * math.cos(phi), s * math.sin(phi), z))


def uniform_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized form of :func:`uniform_direction`; returns an (n, 3) array."""
    z = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    v = np.column_stack((s * np.cos(phi), s * np.sin(phi), z))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def uniform_axis(rng: np.random.Generator) -> Axis:
    return Axis(uniform_direction(rng))
