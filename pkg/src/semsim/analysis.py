"""Path statistics: moments, structure-function roughness, ACF, convergence.

Estimators here are deliberately plain. The structure-function exponent is
an ordinary least squares fit in log-log coordinates, the autocorrelation
uses the biased normalization, and the refinement study couples every
level to one fine Brownian draw per path through exact block sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .engine import Ensemble, SamplePath, SimulationConfig, simulate_discrete
from .randomness import coarsen, derive_path_seed, make_grid, sample_brownian
from .special import gronwall_bound

__all__ = [
    "DegeneratePathError",
    "MonteCarloEstimate",
    "HolderEstimate",
    "AcfSeries",
    "ConvergenceReport",
    "estimate_moment",
    "fit_loglog_slope",
    "estimate_holder",
    "acf_abs_increments",
    "convergence_study",
]


class DegeneratePathError(ValueError):
    """The path carries no usable variation for the requested statistic."""


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class HolderEstimate:
    exponent: float
    r_squared: float
    q: float
    lags: tuple[int, ...]


@dataclass(frozen=True)
class AcfSeries:
    """Autocorrelation values by lag; ``series_length`` counts increments."""

    lags: tuple[int, ...]
    values: np.ndarray
    series_length: int


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-level discrepancies against the finest-grid reference.

    ``dt_levels`` is strictly decreasing; ``sup_mse[i]`` is the maximum
    over level ``i``'s nodes of the mean squared gap to the reference at
    shared nodes.  ``fitted_slope`` is None when any level is exactly
    coupled (``degenerate`` is then True and a slope is meaningless).
    ``theoretical_rate_bound`` is ``2 * h_star``, the supremum of provable
    rates.

    ``envelope_constant`` is the smallest ``C`` such that every level
    satisfies ``sup_mse <= C * dt**0.5 * E_beta(Gamma(beta) * T**beta)``
    with ``beta = h_star``: the measured data re-expressed against a
    conservative comparison-bound envelope at the floor rate 1/2.  It is
    an annotation for calibration tests, None in the degenerate case.
    """

    dt_levels: tuple[float, ...]
    sup_mse: tuple[float, ...]
    fitted_slope: float | None
    theoretical_rate_bound: float
    degenerate: bool
    n_paths: int
    refine_factor: int
    envelope_constant: float | None = None


def estimate_moment(ensemble: Ensemble, p: float, node: int) -> MonteCarloEstimate:
    """Monte Carlo estimate of ``E|X(t_node)|**p`` with its standard error."""
    p = float(p)
    if p < 0.0:
        raise ValueError(f"moment order p must be nonnegative, got {p!r}")
    n_nodes = ensemble.config.grid.steps + 1
    if not 0 <= node < n_nodes:
        raise ValueError(f"node must lie in [0, {n_nodes}), got {node!r}")
    samples = np.abs(ensemble.values_matrix()[:, node]) ** p
    m = samples.shape[0]
    value = float(np.mean(samples))
    std_error = 0.0 if m == 1 else float(np.std(samples, ddof=1) / math.sqrt(m))
    return MonteCarloEstimate(value=value, std_error=std_error, n_samples=m)


def fit_loglog_slope(xs, ys) -> tuple[float, float, float]:
    """OLS fit of ``log ys`` against ``log xs``: (slope, intercept, r^2).

    Requires strictly positive inputs and at least two points.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("need two 1-d arrays of equal length >= 2")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("log-log fit requires strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx == 0.0:
        raise ValueError("abscissae are all equal; slope undefined")
    sxy = float(np.sum((lx - mx) * (ly - my)))
    slope = sxy / sxx
    intercept = my - slope * mx
    syy = float(np.sum((ly - my) ** 2))
    r_squared = 1.0 if syy == 0.0 else min(1.0, (sxy * sxy) / (sxx * syy))
    return slope, intercept, r_squared


_DEFAULT_MAX_HOLDER_LAG = 64


def _default_lags(steps: int) -> tuple[int, ...]:
    lags = []
    m = 1
    while m <= min(_DEFAULT_MAX_HOLDER_LAG, steps // 4):
        lags.append(m)
        m *= 2
    return tuple(lags)


def estimate_holder(path: SamplePath, q: float = 2.0, lags=None) -> HolderEstimate:
    """Structure-function roughness exponent of one path.

    ``S(m) = mean_k |X[k+m] - X[k]|**q`` is fitted against ``m * dt`` in
    log-log coordinates; the exponent is the slope divided by ``q``.  For
    Brownian input and ``q = 2`` this recovers 1/2.  Lags must be at least
    three, strictly increasing, and no larger than a quarter of the step
    count (larger lags leave too few pairs to average).  A constant path
    (any ``S(m) == 0``) raises :class:`DegeneratePathError`.
    """
    q = float(q)
    if q <= 0.0:
        raise ValueError(f"q must be positive, got {q!r}")
    steps = path.grid.steps
    lags = _default_lags(steps) if lags is None else tuple(int(m) for m in lags)
    if len(lags) < 3:
        raise ValueError("need at least three lags")
    if any(b <= a for a, b in zip(lags, lags[1:])):
        raise ValueError(f"lags must be strictly increasing, got {lags!r}")
    if any(m < 1 or 4 * m > steps for m in lags):
        raise ValueError(f"lags must lie in [1, {steps // 4}], got {lags!r}")
    x = path.values
    s_vals = np.empty(len(lags))
    for idx, m in enumerate(lags):
        s_vals[idx] = np.mean(np.abs(x[m:] - x[:-m]) ** q)
    if np.any(s_vals == 0.0):
        raise DegeneratePathError("structure function vanished at some lag; path has no variation")
    taus = np.array(lags, dtype=np.float64) * path.grid.dt
    slope, _, r_squared = fit_loglog_slope(taus, s_vals)
    return HolderEstimate(exponent=slope / q, r_squared=r_squared, q=q, lags=lags)


def acf_abs_increments(path: SamplePath, max_lag: int) -> AcfSeries:
    """Autocorrelation of absolute increments, biased normalization.

    ``values[0]`` is exactly 1, and the lag must stay below half the
    series length so every lag keeps a majority overlap.  A path with
    constant absolute increments has no variance to normalize by and
    raises :class:`DegeneratePathError`.
    """
    max_lag = int(max_lag)
    n = path.grid.steps
    if not (1 <= max_lag and 2 * max_lag < n):
        raise ValueError(f"max_lag must lie in [1, {(n - 1) // 2}], got {max_lag!r}")
    d = np.abs(np.diff(path.values))
    a = d - d.mean()
    denom = float(np.sum(a * a))
    if denom == 0.0:
        raise DegeneratePathError("absolute increments are constant; autocorrelation undefined")
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    for m in range(1, max_lag + 1):
        values[m] = float(np.sum(a[:-m] * a[m:])) / denom
    values.setflags(write=False)
    return AcfSeries(lags=tuple(range(max_lag + 1)), values=values, series_length=n)


def convergence_study(
    config: SimulationConfig,
    n_levels: int,
    refine_factor: int,
) -> ConvergenceReport:
    """Coupled refinement study against a finest-grid reference.

    ``config.grid`` is the coarsest level.  For each of ``config.n_paths``
    driving seeds, one Brownian draw is sampled on the grid refined
    ``n_levels`` times and coarsened by exact block sums onto every level,
    so all levels see the same randomness.  Level ``l`` (``l = 0`` is the
    base grid, ``n_levels`` of them) is compared to the reference at shared
    nodes; the per-level discrepancy is the max over nodes of the mean
    squared gap.  The log-log slope of discrepancy against step size
    estimates the strong rate; it is left unfitted when some level is
    exactly coupled to the reference (e.g. a constant Hurst value of 1/2,
    where every level collapses to the same Brownian prefix sums).
    """
    n_levels = int(n_levels)
    refine_factor = int(refine_factor)
    if n_levels < 3:
        raise ValueError(f"need at least 3 levels for a slope, got {n_levels!r}")
    if refine_factor < 2:
        raise ValueError(f"refine_factor must be at least 2, got {refine_factor!r}")
    base = config.grid
    finest = make_grid(base.horizon, base.steps * refine_factor ** n_levels)
    level_grids = [
        make_grid(base.horizon, base.steps * refine_factor ** level)
        for level in range(n_levels)
    ]
    level_configs = [replace(config, grid=g) for g in level_grids]
    finest_config = replace(config, grid=finest)

    acc = [np.zeros(g.steps + 1) for g in level_grids]
    for i in range(config.n_paths):
        stream = derive_path_seed(config.seed, i)
        fine_incr = sample_brownian(stream, finest, provenance=(config.seed.value, i))
        reference = simulate_discrete(finest_config, fine_incr).values
        for level in range(n_levels):
            stride = refine_factor ** (n_levels - level)
            incr = coarsen(fine_incr, stride)
            values = simulate_discrete(level_configs[level], incr).values
            gap = values - reference[::stride]
            acc[level] += gap * gap

    sup_mse = tuple(float(np.max(a) / config.n_paths) for a in acc)
    dt_levels = tuple(g.dt for g in level_grids)
    degenerate = any(v == 0.0 for v in sup_mse)
    if degenerate:
        slope = None
        envelope_constant = None
    else:
        slope, _, _ = fit_loglog_slope(np.array(dt_levels), np.array(sup_mse))
        envelope = gronwall_bound(1.0, 1.0, config.hurst.h_star, base.horizon)
        envelope_constant = max(
            mse / (dt ** 0.5 * envelope) for dt, mse in zip(dt_levels, sup_mse)
        )
    return ConvergenceReport(
        dt_levels=dt_levels,
        sup_mse=sup_mse,
        fitted_slope=slope,
        theoretical_rate_bound=2.0 * config.hurst.h_star,
        degenerate=degenerate,
        n_paths=config.n_paths,
        refine_factor=refine_factor,
        envelope_constant=envelope_constant,
    )
