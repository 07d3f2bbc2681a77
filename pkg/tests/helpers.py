"""Randomised instance generators shared by unit and acceptance tests."""

from __future__ import annotations

import numpy as np

ALPHAS = (0.1, 0.05, 0.2, 0.5)


def random_instance(rng: np.random.Generator, n: int):
    """Random intervals and outcomes from one of several families.

    Families cover continuous data, coarse grids with many ties and nested
    configurations, and informative forecasts with heteroscedastic noise.
    """
    family = int(rng.integers(0, 4))
    if family == 0:
        lower = rng.normal(0, 2, n)
        upper = lower + rng.exponential(2, n) + 1e-3
        y = rng.normal(0, 3, n)
    elif family == 1:
        lower = rng.integers(-3, 3, n).astype(float)
        upper = lower + rng.integers(1, 4, n)
        y = rng.integers(-5, 6, n).astype(float)
    elif family == 2:
        centre = rng.normal(0, 0.3, n)
        half = rng.uniform(0.2, 3, n)
        lower, upper = centre - half, centre + half
        y = rng.normal(0, 1.5, n)
    else:
        mu = rng.normal(0, 1, n)
        sd = rng.uniform(0.5, 2, n)
        shift = rng.normal(0, 0.5, n)
        lower, upper = mu + shift - 1.6 * sd, mu + shift + 1.6 * sd
        y = mu + sd * rng.standard_normal(n)
    return lower, upper, y


def random_suite(seed: int, count: int, n_range=(2, 500)):
    """``count`` instances ``(lower, upper, y, alpha)`` with n drawn uniformly."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        lower, upper, y = random_instance(rng, n)
        alpha = ALPHAS[int(rng.integers(0, len(ALPHAS)))]
        yield lower, upper, y, alpha


def small_grid_instance(rng: np.random.Generator, n: int):
    """Tiny instance on an integer grid: ties in bounds and in outcomes."""
    lower = rng.integers(0, 4, n).astype(float)
    upper = lower + rng.integers(1, 4, n)
    y = rng.integers(0, 6, n).astype(float)
    return lower, upper, y
