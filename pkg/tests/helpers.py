"""Independent oracles used to cross-check the package implementations.

Everything here is deliberately written with different algorithms than the
library: trapezoid integration instead of Gauss-Hermite quadrature, an
iterative Pascal recurrence instead of math.comb, exact rationals for the
overflow expectation, and brute-force enumeration for ranking order.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np


def trapezoid_mi(points: np.ndarray, pmf: np.ndarray, sigma: float) -> float:
    """Mutual information of a discrete input over AWGN by direct integration."""
    points = np.asarray(points, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    span = float(points.max() - points.min())
    y = np.linspace(points.min() - 12.0 * sigma, points.max() + 12.0 * sigma,
                    20001 + int(span / sigma) * 40)
    dens = np.exp(-((y[None, :] - points[:, None]) ** 2) / (2.0 * sigma * sigma))
    dens /= sigma * np.sqrt(2.0 * np.pi)
    mix = pmf @ dens
    h_y = -np.trapezoid(np.where(mix > 0, mix * np.log(mix), 0.0), y)
    h_y_given_x = 0.5 * np.log(2.0 * np.pi * np.e * sigma * sigma)
    return float((h_y - h_y_given_x) / np.log(2.0))


def pascal_binomial(n: int, k: int) -> int:
    """Binomial coefficient via the multiplicative recurrence."""
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    value = 1
    for i in range(k):
        value = value * (n - i) // (i + 1)
    return value


def exact_excess_expectation(n: int) -> Fraction:
    """Expected one-sided surplus of a fair binomial(n, 1/2) around n/2.

    Computed as an explicit sum over outcomes, entirely in rationals.
    """
    half = n // 2
    total = Fraction(0)
    for ones in range(half + 1, n + 1):
        total += Fraction(pascal_binomial(n, ones) * (ones - half), 2**n)
    return total


def words_in_rank_order(n: int, w: int) -> list[tuple[int, ...]]:
    """All weight-w length-n binary words sorted by expected matcher index.

    Index order corresponds to colexicographic order of the reversed
    support: the all-left-zeros word (ones packed at the right end) is
    index 0 and the ones-first word is last.
    """

    def key(positions: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sorted((n - 1 - i for i in positions), reverse=True))

    def word(positions: tuple[int, ...]) -> tuple[int, ...]:
        bits = [0] * n
        for i in positions:
            bits[i] = 1
        return tuple(bits)

    ordered = sorted(combinations(range(n), w), key=key)
    return [word(p) for p in ordered]
