"""Enumerative fixed-weight distribution matcher.

Maps k uniform bits to binary words of length n and Hamming weight w, where
k is the largest integer with 2^k <= C(n, w). A word c_1..c_n has rank

    i(c) = sum over positions k with c_k = 1 of C(n - k, w_k),

w_k being the weight of the suffix starting at position k. Rank 0 is the
word with all ones packed at the end; ranks grow toward ones packed at the
front. Unranking walks Pascal's triangle with one binary search per one,
so a word is produced in exactly w searches.

All arithmetic is exact: indices and binomials are Python integers, and
each matcher caches the Pascal-column values its searches touch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import OutOfCodebookError, ParameterError, RangeError, WeightError

__all__ = [
    "DmCode",
    "dm_code",
    "binomial",
    "weight_for",
    "rank",
    "unrank",
    "unrank_counted",
    "dm_encode",
    "dm_decode",
    "rate_loss",
    "dm_complexity_bound",
    "dm_pair_complexity_bound",
]


def binomial(n: int, k: int) -> int:
    """Exact C(n, k); zero when k < 0 or k > n."""
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def weight_for(n: int, p: float) -> int:
    """Target weight round(n*p), ties rounding half up."""
    return int(math.floor(n * p + 0.5))


@dataclass(frozen=True)
class DmCode:
    """Parameters of one fixed-weight matcher: length n, weight w, input size k.

    `columns[r][t]` holds C(t, r) for r = 0..w, t = 0..n; the table is what
    rank and the unranking binary searches read.
    """

    n: int
    w: int
    k: int
    columns: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def num_words(self) -> int:
        return self.columns[self.w][self.n]


@lru_cache(maxsize=64)
def dm_code(n: int, w: int) -> DmCode:
    """Build (and cache) the matcher for length n and weight w."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not 0 <= w <= n:
        raise ParameterError(f"w must be in [0, {n}], got {w}")
    columns: list[tuple[int, ...]] = [tuple([1] * (n + 1))]
    for r in range(1, w + 1):
        prev = columns[r - 1]
        col = [0] * (n + 1)
        for t in range(1, n + 1):
            col[t] = col[t - 1] + prev[t - 1]
        columns.append(tuple(col))
    k = columns[w][n].bit_length() - 1
    return DmCode(n=n, w=w, k=k, columns=tuple(columns))


def _validated_bits(word: Sequence[int], code: DmCode) -> np.ndarray:
    bits = np.asarray(word, dtype=np.int64)
    if bits.ndim != 1 or bits.size != code.n:
        raise ParameterError(f"word must have length {code.n}, got shape {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ParameterError("word elements must be 0 or 1")
    weight = int(bits.sum())
    if weight != code.w:
        raise WeightError(f"word has weight {weight}, matcher requires {code.w}")
    return bits


def rank(word: Sequence[int], code: DmCode) -> int:
    """Index of a weight-w word in [0, C(n, w))."""
    bits = _validated_bits(word, code)
    total = 0
    remaining = code.w
    # walk left to right; w_k is the suffix weight including position k
    for i in np.flatnonzero(bits):
        t = code.n - int(i) - 1
        total += code.columns[remaining][t] if t >= remaining else 0
        remaining -= 1
    return total


def unrank_counted(index: int, code: DmCode) -> tuple[np.ndarray, int]:
    """Unrank with an instrumented comparison counter.

    Returns (word, comparisons), where comparisons is the number of
    binomial-versus-remainder tests the binary searches performed.
    """
    if not isinstance(index, int) or isinstance(index, bool):
        raise ParameterError(f"index must be an integer, got {index!r}")
    if index < 0 or index >= code.num_words:
        raise RangeError(f"index {index} outside [0, {code.num_words})")
    bits = np.zeros(code.n, dtype=np.uint8)
    rem = index
    upper = code.n  # exclusive bound on t, tightens after each placed one
    comparisons = 0
    for r in range(code.w, 0, -1):
        col = code.columns[r]
        lo, hi = r - 1, upper - 1  # C(r-1, r) = 0 <= rem keeps lo valid
        while lo < hi:
            mid = (lo + hi + 1) // 2
            comparisons += 1
            if col[mid] <= rem:
                lo = mid
            else:
                hi = mid - 1
        rem -= col[lo]
        bits[code.n - lo - 1] = 1
        upper = lo
    if rem != 0:
        raise RangeError(f"index {index} has no weight-{code.w} decomposition")
    return bits, comparisons


def unrank(index: int, code: DmCode) -> np.ndarray:
    """The unique word with rank(word, code) == index."""
    return unrank_counted(index, code)[0]


def dm_encode(info_bits: Sequence[int], code: DmCode) -> np.ndarray:
    """Map k uniform bits (least significant first) to a fixed-weight word."""
    bits = np.asarray(info_bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size != code.k:
        raise ParameterError(f"info must have {code.k} bits, got shape {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ParameterError("info elements must be 0 or 1")
    value = 0
    for i in range(code.k - 1, -1, -1):
        value = (value << 1) | int(bits[i])
    return unrank(value, code)


def dm_decode(word: Sequence[int], code: DmCode) -> np.ndarray:
    """Recover the k info bits of an encoder output.

    Weight-valid words whose rank is >= 2^k were never produced by
    dm_encode and raise OutOfCodebookError.
    """
    value = rank(word, code)
    if value >> code.k:
        raise OutOfCodebookError(
            f"rank {value} >= 2^{code.k}; word is outside the encoder image"
        )
    return np.array([(value >> i) & 1 for i in range(code.k)], dtype=np.uint8)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p)))


def rate_loss(n: int, p: float) -> float:
    """Gap H(p) - k/n between the ideal and the finite-length matcher rate."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")
    w = weight_for(n, p)
    if w < 1:
        raise ParameterError(f"round({n}*{p}) = 0; no ones to place")
    k = math.comb(n, w).bit_length() - 1
    return binary_entropy(p) - k / n


def dm_complexity_bound(n: int, p: float) -> float:
    """Upper bound p*log2(n) on binary-search comparisons per output bit."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    return float(p * math.log2(n))


def dm_pair_complexity_bound(n: int, p1: float, p2: float) -> float:
    """Bound for two alternating length-n/2 matchers: mean p times log2(n/2)."""
    if n < 2 or n % 2:
        raise ParameterError(f"n must be even and >= 2, got {n}")
    return float((p1 + p2) / 2.0 * math.log2(n / 2))
