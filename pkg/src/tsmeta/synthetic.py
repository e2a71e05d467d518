"""Seeded synthetic series families for experiments and tests."""

from __future__ import annotations

import numpy as np

from .core import TimeSeries

FAMILIES = ("trend_seasonal", "ar1", "random_walk")


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), 0x5E41E5]))


def trend_seasonal(rng: np.random.Generator, n: int, period: int) -> np.ndarray:
    level = rng.uniform(50, 200)
    t = np.arange(n)
    slope = rng.uniform(-0.2, 0.6) * level / 100
    amp = rng.uniform(0.05, 0.2) * level
    phase = rng.uniform(0, 2 * np.pi)
    shape = np.sin(2 * np.pi * t / period + phase) + 0.3 * rng.normal() * np.cos(4 * np.pi * t / period)
    noise = rng.normal(0, rng.uniform(0.01, 0.04) * level, n)
    return level + slope * t + amp * shape + noise


def ar1(rng: np.random.Generator, n: int, period: int) -> np.ndarray:
    level = rng.uniform(50, 200)
    phi = rng.uniform(0.3, 0.9)
    sd = rng.uniform(0.02, 0.05) * level
    x = np.empty(n)
    x[0] = rng.normal(0, sd / np.sqrt(1 - phi ** 2))
    for t in range(1, n):
        x[t] = phi * x[t - 1] + rng.normal(0, sd)
    return level + x


def random_walk(rng: np.random.Generator, n: int, period: int) -> np.ndarray:
    level = rng.uniform(100, 300)
    sd = rng.uniform(0.01, 0.03) * level
    drift = rng.uniform(-0.3, 0.3) * sd
    return level + np.cumsum(rng.normal(drift, sd, n))


_GENERATORS = {"trend_seasonal": trend_seasonal, "ar1": ar1, "random_walk": random_walk}


def make_series(family: str, seed: int, index: int, period: int = 12,
                n_range: tuple[int, int] = (72, 120)) -> TimeSeries:
    rng = _rng(seed, index)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    y = _GENERATORS[family](rng, n, period)
    low = y.min()
    if low <= 0:
        y = y - low + 0.5 * np.abs(y).max() + 1.0
    return TimeSeries.from_values(y, period=period, id=f"{family}_{index:04d}")


def generate_corpus(n_series: int, seed: int = 0, period: int = 12,
                    n_range: tuple[int, int] = (72, 120)) -> list[TimeSeries]:
    """Families cycle in a fixed order so every family gets a third of the corpus."""
    return [make_series(FAMILIES[i % len(FAMILIES)], seed, i, period, n_range)
            for i in range(n_series)]


def periodic(rng: np.random.Generator, n: int, period: int) -> np.ndarray:
    cycle = rng.uniform(50, 150, period)
    return cycle[np.arange(n) % period]


def ramp(rng: np.random.Generator, n: int, period: int) -> np.ndarray:
    return rng.uniform(50, 150) + rng.uniform(0.5, 3.0) * np.arange(n) + rng.normal(0, 0.2, n)


def ar_noise(rng: np.random.Generator, n: int, period: int) -> np.ndarray:
    return ar1(rng, n, period)


LABELLED_FAMILIES = {"periodic": "SEASONAL_NAIVE", "ramp": "HOLT_LINEAR", "ar_noise": "ARIMA"}
_LABELLED = {"periodic": periodic, "ramp": ramp, "ar_noise": ar_noise}


def labelled_series(n_series: int, seed: int = 0, period: int = 12) -> list[tuple[TimeSeries, str]]:
    """Series whose intended best model is fixed by the generating family."""
    out = []
    names = list(_LABELLED)
    for i in range(n_series):
        fam = names[i % len(names)]
        rng = _rng(seed, i)
        n = int(rng.integers(60, 121))
        y = _LABELLED[fam](rng, n, period)
        out.append((TimeSeries.from_values(y, period=period, id=f"{fam}_{i:04d}"), LABELLED_FAMILIES[fam]))
    return out
