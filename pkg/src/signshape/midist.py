"""Mutual information of discrete-input AWGN channels and profile optimization.

MI is evaluated with Gauss-Hermite quadrature (64 nodes by default) on

    I(X;Y) = sum_i p_i E[ -t^2/ln2 - log2 sum_j p_j exp(-(z_i - z_j + sqrt2 t)^2 / 2) ]

with z = x / sigma, which is exact up to quadrature error and never leaves
the linear domain (all exponents are nonpositive). For equally spaced
alphabets the pairwise difference matrix is Toeplitz, so the exp table
shrinks from M^2 K to (2M-1) K entries.

SNR convention: SNR = E[X^2] / sigma^2 with the *shaped* distribution's
energy. Curves over SNR therefore compare distributions at equal SNR, not
equal noise. optimize_profile exposes both views: a fixed noise_std
maximizes MI at that noise level (where shaping can only lower the energy,
so near-uniform profiles win), while a fixed snr_db rescales the noise to
each candidate's energy and recovers the shaped optima the curves show.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.interpolate import PchipInterpolator

from .constellation import (
    Constellation,
    ShapingProfile,
    SymbolDistribution,
    induced_pmf,
)
from .errors import NumericalError, ParameterError

__all__ = [
    "ChannelSpec",
    "MiCurve",
    "OptimizationResult",
    "awgn_mi",
    "mutual_information",
    "maxwell_boltzmann",
    "sigma_for_snr",
    "snr_db_for",
    "optimize_profile",
    "mi_curve_for_profile",
    "mi_curve_optimized",
    "mi_gap_db",
    "rate_loss_to_db",
]

_LN2 = math.log(2.0)
_DEFAULT_ORDER = 64
_SLOPE_HALF_STEP_DB = 0.25


@lru_cache(maxsize=8)
def _quadrature(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = hermgauss(order)
    weights = weights / math.sqrt(math.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def sigma_for_snr(energy: float, snr_db: float) -> float:
    """Noise standard deviation that puts `energy` at the given SNR."""
    if energy <= 0:
        raise ParameterError(f"energy must be positive, got {energy}")
    return math.sqrt(energy / 10.0 ** (snr_db / 10.0))


def snr_db_for(energy: float, noise_std: float) -> float:
    if energy <= 0 or noise_std <= 0:
        raise ParameterError("energy and noise_std must be positive")
    return 10.0 * math.log10(energy / (noise_std * noise_std))


@dataclass(frozen=True)
class ChannelSpec:
    """AWGN channel Y = X + Z with Z ~ N(0, noise_std^2)."""

    noise_std: float

    def __post_init__(self) -> None:
        if not self.noise_std > 0:
            raise ParameterError(f"noise_std must be > 0, got {self.noise_std}")

    def snr_db(self, dist: SymbolDistribution) -> float:
        return snr_db_for(dist.average_energy, self.noise_std)

    @classmethod
    def for_snr(cls, dist: SymbolDistribution, snr_db: float) -> "ChannelSpec":
        return cls(noise_std=sigma_for_snr(dist.average_energy, snr_db))


def awgn_mi(
    x: Sequence[float], pmf: Sequence[float], noise_std: float, order: int = _DEFAULT_ORDER
) -> float:
    """I(X;Y) in bits per channel use for an arbitrary finite alphabet."""
    xs = np.asarray(x, dtype=float)
    p = np.asarray(pmf, dtype=float)
    if xs.ndim != 1 or xs.shape != p.shape:
        raise ParameterError("x and pmf must be 1-D arrays of equal length")
    if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ParameterError("pmf must be nonnegative and sum to 1")
    if not noise_std > 0:
        raise ParameterError(f"noise_std must be > 0, got {noise_std}")
    nodes, weights = _quadrature(order)
    shift = math.sqrt(2.0) * nodes
    z = xs / noise_std
    active = p > 0
    deltas = np.diff(z)
    if deltas.size and np.allclose(deltas, deltas[0], rtol=1e-12, atol=1e-12):
        # Toeplitz path: differences z_i - z_j take only 2M-1 values
        M = z.size
        r = np.arange(-(M - 1), M, dtype=float) * deltas[0]
        table = np.exp(-0.5 * (r[:, None] + shift[None, :]) ** 2)
        idx = np.arange(M)[:, None] - np.arange(M)[None, :] + (M - 1)
        den = np.einsum("ijk,j->ik", table[idx], p)[active]
    else:
        d = z[active, None, None] - z[None, None, :] + shift[None, :, None]
        den = np.einsum("ikj,j->ik", np.exp(-0.5 * d * d), p)
    log_den = np.log(np.maximum(den, 1e-300))
    integrand = (-nodes * nodes)[None, :] - log_den
    mi = float(p[active] @ (integrand @ weights) / _LN2)
    if not math.isfinite(mi):
        raise NumericalError("mutual information evaluation produced a non-finite value")
    return mi


def mutual_information(
    dist: SymbolDistribution,
    constellation: Constellation,
    noise_std: float,
    order: int = _DEFAULT_ORDER,
) -> float:
    """I(X;Y) of a constellation under `dist`, deterministic per order."""
    if len(dist.probabilities) != constellation.size:
        raise ParameterError(
            f"distribution has {len(dist.probabilities)} entries, "
            f"constellation has {constellation.size}"
        )
    return awgn_mi(constellation.points(), dist.pmf(), noise_std, order=order)


def maxwell_boltzmann(constellation: Constellation, lam: float) -> SymbolDistribution:
    """Distribution proportional to exp(-lam * x^2) over the constellation."""
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    x = constellation.points()
    weights = np.exp(-lam * x * x)
    return SymbolDistribution.from_pmf(weights / weights.sum(), constellation.symbols)


@dataclass(eq=False)
class MiCurve:
    """MI versus SNR samples for one shaping rule, with monotone lookup."""

    snr_db: tuple[float, ...]
    mi_bpcu: tuple[float, ...]
    label: str = ""
    profiles: tuple[ShapingProfile, ...] | None = None

    def __post_init__(self) -> None:
        self.snr_db = tuple(float(s) for s in self.snr_db)
        self.mi_bpcu = tuple(float(v) for v in self.mi_bpcu)
        if len(self.snr_db) != len(self.mi_bpcu) or len(self.snr_db) < 2:
            raise ParameterError("curve needs >= 2 aligned (snr, mi) samples")
        if np.any(np.diff(self.snr_db) <= 0):
            raise ParameterError("snr_db samples must be strictly increasing")
        if np.any(np.diff(self.mi_bpcu) < -1e-9):
            raise ParameterError("mi_bpcu must be nondecreasing along the curve")
        if min(self.mi_bpcu) < -1e-12:
            raise ParameterError("mi_bpcu must be nonnegative")

    def rate_at_snr(self, snr_db: float) -> float:
        if not self.snr_db[0] <= snr_db <= self.snr_db[-1]:
            raise ParameterError(
                f"snr {snr_db} dB outside curve range "
                f"[{self.snr_db[0]}, {self.snr_db[-1]}]"
            )
        return float(PchipInterpolator(self.snr_db, self.mi_bpcu)(snr_db))

    def snr_at_rate(self, rate_bpcu: float) -> float:
        mi = np.asarray(self.mi_bpcu)
        snr = np.asarray(self.snr_db)
        keep = np.concatenate([[True], np.diff(mi) > 1e-12])
        mi, snr = mi[keep], snr[keep]
        if not mi[0] <= rate_bpcu <= mi[-1]:
            raise ParameterError(
                f"rate {rate_bpcu} outside curve MI range [{mi[0]:.6f}, {mi[-1]:.6f}]"
            )
        return float(PchipInterpolator(mi, snr)(rate_bpcu))

    def rows(self) -> list[tuple[float, float]]:
        """(snr_db, mi_bpcu) pairs, ready for CSV writing."""
        return list(zip(self.snr_db, self.mi_bpcu))


@dataclass(frozen=True)
class OptimizationResult:
    """Best profile found by the grid search, with search metadata."""

    profile: ShapingProfile
    mi_bpcu: float
    snr_db: float
    noise_std: float
    evaluations: int
    final_step: float
    mode: str


def _axis(step: float) -> np.ndarray:
    return step * np.arange(int(round(1.0 / step)) + 1)


def _window(center: float, half_width: float, step: float) -> np.ndarray:
    lo = max(0.0, center - half_width)
    hi = min(1.0, center + half_width)
    return lo + step * np.arange(int(round((hi - lo) / step)) + 1)


class _Search:
    """Shared bookkeeping: best candidate so far plus evaluation count."""

    def __init__(self, objective: Callable[[tuple[float, ...]], float]):
        self._objective = objective
        self.evaluations = 0
        self.best_probs: tuple[float, ...] | None = None
        self.best_value = -math.inf

    def consider(self, probs: tuple[float, ...]) -> None:
        value = self._objective(probs)
        self.evaluations += 1
        if value > self.best_value:
            self.best_value = value
            self.best_probs = probs


def _grid_search(
    search: _Search,
    num_distinct: int,
    warm_start: tuple[float, ...] | None,
    coarse_step: float,
    refine_steps: tuple[float, ...],
) -> None:
    # stage list: (half-width around current best, step); a None width means
    # the full [0, 1] axis
    if warm_start is None:
        stages: list[tuple[float | None, float]] = [(None, coarse_step)]
        previous = coarse_step
    else:
        search.consider(warm_start)
        stages = [(1.5 * coarse_step, refine_steps[0] if refine_steps else coarse_step)]
        previous = refine_steps[0] if refine_steps else coarse_step
        refine_steps = refine_steps[1:]
    for step in refine_steps:
        stages.append((previous, step))
        previous = step

    for half_width, step in stages:
        if half_width is None:
            axes = [_axis(step)] * num_distinct
        else:
            center = search.best_probs
            axes = [_window(center[i], half_width, step) for i in range(num_distinct)]
        if num_distinct == 1:
            for a in axes[0]:
                search.consider((float(a),))
        else:
            for a in axes[0]:
                for b in axes[1]:
                    search.consider((float(a), float(b)))


def _coordinate_ascent(
    search: _Search,
    num_distinct: int,
    warm_start: tuple[float, ...] | None,
    coarse_step: float,
    refine_steps: tuple[float, ...],
    max_sweeps: int = 60,
) -> None:
    start = warm_start if warm_start is not None else (0.5,) * num_distinct
    search.consider(tuple(start))
    cold = warm_start is None
    first_refine = refine_steps[0] if refine_steps else coarse_step
    for sweep in range(max_sweeps):
        before = search.best_value
        for i in range(num_distinct):
            if cold and sweep == 0:
                stage_specs: list[tuple[float | None, float]] = [(None, coarse_step)]
            else:
                stage_specs = [(1.5 * coarse_step, first_refine)]
            stage_specs.extend(zip(refine_steps, refine_steps[1:]))
            for half_width, step in stage_specs:
                # recenter each stage on the best found so far
                center = search.best_probs[i]
                if half_width is None:
                    points = _axis(step)
                else:
                    points = _window(center, half_width, step)
                base = list(search.best_probs)
                for value in points:
                    base[i] = float(value)
                    search.consider(tuple(base))
        if search.best_value - before < 1e-10:
            break


def optimize_profile(
    m: int,
    num_distinct: int,
    noise_std: float | None = None,
    *,
    snr_db: float | None = None,
    warm_start: tuple[float, ...] | None = None,
    coarse_step: float = 0.02,
    refine_steps: tuple[float, ...] = (0.005, 0.0025),
    order: int = _DEFAULT_ORDER,
) -> OptimizationResult:
    """Maximize MI over the P-dimensional probability box.

    Exactly one of noise_std / snr_db selects the comparison:

    * noise_std: the channel noise is held fixed; candidates are compared
      at whatever SNR their energy yields.
    * snr_db: each candidate is evaluated at the noise level that puts its
      own energy at that SNR, which is how MI-versus-SNR curves compare
      profiles.

    P <= 2 runs nested product-grid refinement (coarse_step, then the
    refine_steps windows); larger P runs cyclic per-coordinate line
    searches with the same staging.
    """
    if (noise_std is None) == (snr_db is None):
        raise ParameterError("pass exactly one of noise_std or snr_db")
    ShapingProfile(m=m, probs=(0.5,) * num_distinct)  # validates m and P upfront
    M = 1 << m
    x = np.arange(-(M - 1), M, 2, dtype=float)
    energies = x * x

    if noise_std is not None:
        if not noise_std > 0:
            raise ParameterError(f"noise_std must be > 0, got {noise_std}")
        sigma = float(noise_std)

        def objective(probs: tuple[float, ...]) -> float:
            return awgn_mi(x, induced_pmf(m, probs), sigma, order=order)

    else:
        linear = 10.0 ** (float(snr_db) / 10.0)

        def objective(probs: tuple[float, ...]) -> float:
            pmf = induced_pmf(m, probs)
            sigma_p = math.sqrt(float(pmf @ energies) / linear)
            return awgn_mi(x, pmf, sigma_p, order=order)

    search = _Search(objective)
    if num_distinct <= 2:
        _grid_search(search, num_distinct, warm_start, coarse_step, refine_steps)
    else:
        _coordinate_ascent(search, num_distinct, warm_start, coarse_step, refine_steps)

    best = ShapingProfile(m=m, probs=search.best_probs)
    best_pmf = induced_pmf(m, best.probs)
    energy = float(best_pmf @ energies)
    if noise_std is not None:
        out_sigma = float(noise_std)
        out_snr = snr_db_for(energy, out_sigma)
        mode = "fixed-noise"
    else:
        out_sigma = sigma_for_snr(energy, float(snr_db))
        out_snr = float(snr_db)
        mode = "fixed-snr"
    return OptimizationResult(
        profile=best,
        mi_bpcu=search.best_value,
        snr_db=out_snr,
        noise_std=out_sigma,
        evaluations=search.evaluations,
        final_step=refine_steps[-1] if refine_steps else coarse_step,
        mode=mode,
    )


def mi_curve_for_profile(
    profile: ShapingProfile,
    snr_db_grid: Iterable[float],
    label: str = "",
    order: int = _DEFAULT_ORDER,
) -> MiCurve:
    """MI-versus-SNR curve for one fixed profile."""
    M = 1 << profile.m
    x = np.arange(-(M - 1), M, 2, dtype=float)
    pmf = induced_pmf(profile.m, profile.probs)
    energy = float(pmf @ (x * x))
    grid = [float(s) for s in snr_db_grid]
    values = [awgn_mi(x, pmf, sigma_for_snr(energy, s), order=order) for s in grid]
    name = label or f"{M}-ASK fixed {profile.probs}"
    return MiCurve(snr_db=tuple(grid), mi_bpcu=tuple(values), label=name)


def mi_curve_optimized(
    m: int,
    num_distinct: int,
    snr_db_grid: Iterable[float],
    label: str = "",
    order: int = _DEFAULT_ORDER,
) -> MiCurve:
    """Curve of per-SNR optimized profiles, warm starting along the grid."""
    grid = [float(s) for s in snr_db_grid]
    values: list[float] = []
    profiles: list[ShapingProfile] = []
    warm: tuple[float, ...] | None = None
    for snr in grid:
        result = optimize_profile(
            m, num_distinct, snr_db=snr, warm_start=warm, order=order
        )
        warm = result.profile.probs
        values.append(result.mi_bpcu)
        profiles.append(result.profile)
    name = label or f"{1 << m}-ASK optimized P={num_distinct}"
    return MiCurve(
        snr_db=tuple(grid),
        mi_bpcu=tuple(values),
        label=name,
        profiles=tuple(profiles),
    )


def mi_gap_db(curve_a: MiCurve, curve_b: MiCurve, rate_bpcu: float) -> float:
    """Extra SNR (dB) curve_a needs over curve_b to reach the same rate."""
    return curve_a.snr_at_rate(rate_bpcu) - curve_b.snr_at_rate(rate_bpcu)


def rate_loss_to_db(
    rate_loss_bpcu: float, reference_curve: MiCurve, operating_rate: float
) -> float:
    """Convert a rate loss to dB using the curve slope at the operating rate.

    The slope dR/dSNR is a central difference over +-0.25 dB around the
    SNR where the curve reaches operating_rate.
    """
    if rate_loss_bpcu < 0.0:
        raise ParameterError(f"rate loss must be >= 0, got {rate_loss_bpcu}")
    if rate_loss_bpcu == 0.0:
        return 0.0
    snr = reference_curve.snr_at_rate(operating_rate)
    lo = reference_curve.rate_at_snr(snr - _SLOPE_HALF_STEP_DB)
    hi = reference_curve.rate_at_snr(snr + _SLOPE_HALF_STEP_DB)
    slope = (hi - lo) / (2.0 * _SLOPE_HALF_STEP_DB)
    if slope <= 0:
        raise NumericalError(f"non-positive curve slope {slope} at {snr} dB")
    return rate_loss_bpcu / slope
