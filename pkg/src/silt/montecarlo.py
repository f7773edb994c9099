"""Monte Carlo estimation of regularized self-intersection local times.

A Brownian path is discretized on a uniform grid of ``M`` steps; the
Gaussian-regularized local time is the trapezoid-weighted double sum
over ordered grid pairs

    L_hat = dt^2 Sum_{j > i} w_i w_j delta_eps(B(t_j) - B(t_i))
            + (diagonal band at midpoint weight),

with endpoint weights ``w_0 = w_M = 1/2`` -- the product trapezoid rule
on the time triangle, whose expectation reproduces the closed-form
band integral to O(dt^2).  A gap regularization excises lags below
``Lambda`` (rounded to a grid multiple); the band exactly at the cut
enters at half weight, the same midpoint treatment the diagonal gets,
which keeps the estimator unbiased for grid-aligned cuts.

Randomness is counter based: path ``index`` under ``seed`` is generated
by a Philox generator keyed on ``(seed, index)``, so any path is
reproducible in isolation and estimates are independent of worker
count.  Sample arrays are reduced with numpy's pairwise summation in a
fixed order for the same reason.

The d=1 occupation-density oracle estimates the local time without any
mollifier by histogramming occupation times, giving an independent
check of the Gaussian-regularized estimator.  The tail and partition
experiments probe the renormalized exponential moments: the Chebyshev
tail bound in its final and intermediate closed forms, empirical tail
frequencies of the centered local time, and the partition function
E(exp(-g L_c)).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from silt._backend import band_exp_sum
from silt.core import ModelParams
from silt.errors import PreconditionError, WeightOverflowError
from silt.expectations import (
    RegularizationSpec,
    expected_combined_lt,
    expected_gaussian_lt,
)

__all__ = [
    "BrownianPath",
    "MCEstimate",
    "TailExperiment",
    "sample_path",
    "effective_gap",
    "gaussian_lt",
    "centered_lt",
    "centered_lt_samples",
    "mc_gaussian_lt",
    "occupation_oracle_d1",
    "mc_occupation_d1",
    "chebyshev_tail_bound",
    "chebyshev_tail_intermediate",
    "empirical_tail",
    "partition_estimate",
]

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class BrownianPath:
    """A discretized Brownian path: M steps of size dt, M+1 points."""

    steps: int
    dt: float
    values: np.ndarray  # shape (steps + 1, d)

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise PreconditionError("steps >= 1")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise PreconditionError("dt > 0")
        v = self.values
        if v.ndim != 2 or v.shape[0] != self.steps + 1 or v.shape[1] < 1:
            raise PreconditionError(
                "values has shape (steps + 1, d) with d >= 1"
            )
        if np.any(v[0] != 0.0):
            raise PreconditionError("B(0) = 0 exactly")

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def horizon(self) -> float:
        """Total time T = M dt covered by the path."""
        return self.steps * self.dt


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo estimate with its sampling standard error."""

    mean: float
    std_error: float
    n_samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise PreconditionError("n_samples >= 1")
        if self.std_error < 0:
            raise PreconditionError("std_error >= 0")


@dataclass(frozen=True)
class TailExperiment:
    """Parameters of a lower-tail bound experiment for the centered
    local time: threshold level, coupling, rate parameter, and the two
    constants of the bound."""

    threshold: float
    g: float
    alpha: float
    k: float = 0.0
    K: float = 1.0

    def __post_init__(self) -> None:
        if not self.g > 0:
            raise PreconditionError("g > 0")
        if not self.alpha > 0:
            raise PreconditionError("alpha > 0")
        if self.k < 0 or self.K < 0:
            raise PreconditionError("k >= 0 and K >= 0")
        if not self.threshold > self.k:
            raise PreconditionError(
                "threshold > k (the induced cut lies in (0,1))"
            )

    @property
    def lam(self) -> float:
        """The induced cut width exp(-alpha (N - k)), in (0, 1)."""
        return math.exp(-self.alpha * (self.threshold - self.k))


# ---------------------------------------------------------------------------
# Path sampling


def sample_path(
    params: ModelParams, M: int, seed: int, index: int
) -> BrownianPath:
    """Draw path ``index`` of the stream ``seed`` on an M-step grid.

    Increments are i.i.d. centered Gaussians of standard deviation
    sqrt(dt) per coordinate from a counter-based Philox generator keyed
    on (seed, index): the path is a pure function of
    (seed, index, M, d, T), whatever else has been sampled.
    """
    if M < 2:
        raise PreconditionError("M >= 2")
    if seed < 0 or index < 0:
        raise PreconditionError("seed >= 0 and index >= 0")
    dt = params.T / M
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
    )
    increments = rng.standard_normal((M, params.d)) * math.sqrt(dt)
    values = np.empty((M + 1, params.d))
    values[0] = 0.0
    np.cumsum(increments, axis=0, out=values[1:])
    values.flags.writeable = False
    return BrownianPath(steps=M, dt=dt, values=values)


# ---------------------------------------------------------------------------
# Per-path estimators


def effective_gap(path: BrownianPath, lam: float) -> float:
    """The gap width actually enforced on this grid: ``lam`` rounded to
    the nearest multiple of dt."""
    if lam < 0:
        raise PreconditionError("Lambda >= 0")
    return round(lam / path.dt) * path.dt


def _band_total(path: BrownianPath, eps: float, lam: float) -> float:
    m = int(round(lam / path.dt))
    inv_two_eps = 1.0 / (2.0 * eps)
    if m == 0:
        # all lags k >= 1 plus the diagonal band at midpoint weight:
        # (1/2) sum_i w_i^2 = (M - 1/2) / 2, path independent.
        return band_exp_sum(path.values, inv_two_eps, 1, False) + 0.5 * (
            path.steps - 0.5
        )
    return band_exp_sum(path.values, inv_two_eps, m, True)


def gaussian_lt(path: BrownianPath, eps: float, lam: float = 0.0) -> float:
    """Gaussian-regularized local time of one path, optionally with a
    gap: the trapezoid-weighted double sum of delta_eps over grid pairs
    at lags above the (grid-rounded) gap width.

    Requires dt <= eps/10 so the grid resolves the mollifier.
    """
    if not eps > 0:
        raise PreconditionError("epsilon > 0")
    T = path.horizon
    if not 0 <= lam < T:
        raise PreconditionError("0 <= Lambda < T")
    if path.dt * 10.0 > eps * (1.0 + 1e-9):
        raise PreconditionError(
            "grid resolution dt <= eps/10 (the grid cannot resolve the "
            "mollifier)"
        )
    d = path.d
    scale = (_TWO_PI * eps) ** (-0.5 * d) * path.dt**2
    return scale * _band_total(path, eps, lam)


def centered_lt(
    path: BrownianPath, reg: RegularizationSpec, params: ModelParams
) -> float:
    """Centered local time: the Gaussian-regularized double sum minus
    the matching closed-form expectation (evaluated at the grid-rounded
    gap width the estimator actually enforces)."""
    _check_path_matches(path, params)
    reg.validate_against(params)
    if reg.variant not in ("gaussian", "combined") or not reg.epsilon > 0:
        raise PreconditionError(
            "path estimation requires a Gaussian mollifier scale "
            "(gaussian or combined variant with epsilon > 0)"
        )
    raw = gaussian_lt(path, reg.epsilon, reg.lam)
    lam_eff = effective_gap(path, reg.lam)
    if lam_eff == 0.0:
        mean = expected_gaussian_lt(params, reg.epsilon)
    else:
        mean = expected_combined_lt(params, reg.epsilon, lam_eff)
    return raw - mean


def occupation_oracle_d1(path: BrownianPath, bin_width: float) -> float:
    """Mollifier-free d=1 estimate via the occupation-density identity
    L = (1/2) Integral (occupation density)^2 dx: histogram the grid
    points into spatial bins of width ``bin_width``, form the empirical
    occupation density dt * count / bin_width per bin, and return half
    its squared integral."""
    if path.d != 1:
        raise PreconditionError("d = 1")
    if not bin_width > 0:
        raise PreconditionError("bin_width > 0")
    idx = np.floor(path.values[:, 0] / bin_width).astype(np.int64)
    idx -= idx.min()
    counts = np.bincount(idx).astype(np.float64)
    return float(
        path.dt**2 / (2.0 * bin_width) * np.dot(counts, counts)
    )


# ---------------------------------------------------------------------------
# Parallel driver


def _worker_count() -> int:
    env = os.environ.get("SILT_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise PreconditionError("SILT_THREADS >= 1")
        return n
    return os.cpu_count() or 1


def _map_paths(
    fn: Callable[[BrownianPath], float],
    params: ModelParams,
    M: int,
    seed: int,
    n_paths: int,
) -> np.ndarray:
    """Evaluate ``fn`` on paths 0..n_paths-1 of stream ``seed``.

    Results land in a preallocated array indexed by path number and are
    identical for every worker count: each path is a pure function of
    (seed, index) and any later reduction over the array uses numpy's
    fixed-order pairwise summation.
    """
    if n_paths < 1:
        raise PreconditionError("n_paths >= 1")
    out = np.empty(n_paths)

    def run(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[i] = fn(sample_path(params, M, seed, i))

    workers = min(_worker_count(), n_paths)
    if workers == 1:
        run(0, n_paths)
    else:
        chunk = (n_paths + workers - 1) // workers
        starts = range(0, n_paths, chunk)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [
                pool.submit(run, lo, min(lo + chunk, n_paths))
                for lo in starts
            ]:
                future.result()
    return out


def _estimate(values: np.ndarray, seed: int) -> MCEstimate:
    n = int(values.size)
    mean = float(np.mean(values))
    std_error = (
        float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    )
    return MCEstimate(
        mean=mean, std_error=std_error, n_samples=n, seed=seed
    )


def _check_path_matches(path: BrownianPath, params: ModelParams) -> None:
    if path.d != params.d:
        raise PreconditionError("path dimension equals params.d")
    if abs(path.horizon - params.T) > 1e-9 * params.T:
        raise PreconditionError("path horizon equals params.T")


def _auto_steps(params: ModelParams, eps: float) -> int:
    """Smallest step count satisfying dt <= eps/10."""
    if not eps > 0:
        raise PreconditionError(
            "epsilon > 0 is required for path estimation"
        )
    return max(2, math.ceil(10.0 * params.T / eps))


def centered_lt_samples(
    params: ModelParams,
    reg: RegularizationSpec,
    M: int,
    n_paths: int,
    seed: int,
) -> np.ndarray:
    """Centered local time of paths 0..n_paths-1 of stream ``seed``,
    as an array indexed by path number."""
    return _map_paths(
        lambda p: centered_lt(p, reg, params), params, M, seed, n_paths
    )


def mc_gaussian_lt(
    params: ModelParams,
    eps: float,
    lam: float,
    M: int,
    n_paths: int,
    seed: int,
) -> MCEstimate:
    """Monte Carlo mean of the (gap-)Gaussian-regularized local time."""
    values = _map_paths(
        lambda p: gaussian_lt(p, eps, lam), params, M, seed, n_paths
    )
    return _estimate(values, seed)


def mc_occupation_d1(
    params: ModelParams,
    bin_width: float,
    M: int,
    n_paths: int,
    seed: int,
) -> MCEstimate:
    """Monte Carlo mean of the d=1 occupation-density oracle."""
    if params.d != 1:
        raise PreconditionError("d = 1")
    values = _map_paths(
        lambda p: occupation_oracle_d1(p, bin_width),
        params,
        M,
        seed,
        n_paths,
    )
    return _estimate(values, seed)


# ---------------------------------------------------------------------------
# Tail and partition experiments


def chebyshev_tail_bound(
    exp: TailExperiment, params: ModelParams
) -> float:
    """Closed-form lower-tail bound for the centered local time:
    K alpha^2 / (1 - (T/2 pi) alpha)^2 * exp(-alpha (N - k)).

    Requires alpha < 2 pi / T strictly (the bound degenerates at the
    critical rate)."""
    T = params.T
    if not exp.alpha * T < _TWO_PI:
        raise PreconditionError("alpha < 2 pi / T")
    depth = exp.threshold - exp.k
    return (
        exp.K
        * exp.alpha**2
        / (1.0 - T * exp.alpha / _TWO_PI) ** 2
        * math.exp(-exp.alpha * depth)
    )


def chebyshev_tail_intermediate(
    exp: TailExperiment, params: ModelParams
) -> float:
    """The same bound before substituting the cut width: with
    Lambda = exp(-alpha (N - k)),
    K Lambda ln^2 Lambda / (N - k - (T/2 pi) |ln Lambda|)^2."""
    T = params.T
    if not exp.alpha * T < _TWO_PI:
        raise PreconditionError("alpha < 2 pi / T")
    depth = exp.threshold - exp.k
    lam = exp.lam
    log_lam = math.log(lam)
    denom = depth - (T / _TWO_PI) * abs(log_lam)
    return exp.K * lam * log_lam**2 / denom**2


def empirical_tail(
    params: ModelParams,
    reg: RegularizationSpec,
    N: float,
    n_paths: int,
    seed: int,
    steps: int | None = None,
) -> MCEstimate:
    """Monte Carlo frequency of {centered local time <= -N}, with
    binomial standard error.  ``steps`` defaults to the coarsest grid
    the mollifier scale admits."""
    if params.d != 2:
        raise PreconditionError("d = 2")
    if n_paths < 10_000:
        raise PreconditionError("n_paths >= 10^4")
    M = _auto_steps(params, reg.epsilon) if steps is None else steps
    values = centered_lt_samples(params, reg, M, n_paths, seed)
    hits = int(np.count_nonzero(values <= -N))
    p = hits / n_paths
    std_error = math.sqrt(p * (1.0 - p) / n_paths)
    return MCEstimate(
        mean=p, std_error=std_error, n_samples=n_paths, seed=seed
    )


def partition_estimate(
    params: ModelParams,
    g: float,
    reg: RegularizationSpec,
    n_paths: int,
    seed: int,
    steps: int | None = None,
) -> MCEstimate:
    """Monte Carlo estimate of the partition function E(exp(-g L)).

    For d=2 the centered local time is used and couplings at or above
    the integrability threshold 2 pi / T draw a warning (exploration
    mode); for d=1 the local time is positive, so the uncentered
    estimate with weights exp(-g L) <= 1 is used.  A single weight
    exceeding 1e300, or a weight set whose sampling variance overflows,
    aborts with a weight-overflow report instead of silently returning
    a non-finite estimate.
    """
    if params.d not in (1, 2):
        raise PreconditionError("d in {1, 2}")
    if g < 0:
        raise PreconditionError("g >= 0")
    if g == 0.0:
        return MCEstimate(
            mean=1.0, std_error=0.0, n_samples=n_paths, seed=seed
        )
    if params.d == 2 and g * params.T >= _TWO_PI:
        warnings.warn(
            "coupling g >= 2 pi / T: exp(-g L_c) may not be integrable; "
            "estimates are exploratory",
            stacklevel=2,
        )
    M = _auto_steps(params, reg.epsilon) if steps is None else steps
    if params.d == 1:
        reg.validate_against(params)
        values = _map_paths(
            lambda p: gaussian_lt(p, reg.epsilon, reg.lam),
            params,
            M,
            seed,
            n_paths,
        )
    else:
        values = centered_lt_samples(params, reg, M, n_paths, seed)
    exponents = -g * values
    max_exp = float(np.max(exponents))
    if max_exp > 300.0 * math.log(10.0):
        raise WeightOverflowError(
            f"a Monte Carlo weight exp({max_exp:.3g}) exceeds 1e300"
        )
    with np.errstate(over="ignore"):
        est = _estimate(np.exp(exponents), seed)
    if not (math.isfinite(est.mean) and math.isfinite(est.std_error)):
        # Weights below the hard cap can still overflow when squared in
        # the sampling variance; report that instead of returning it.
        raise WeightOverflowError(
            "the sampling variance of the Monte Carlo weights overflows "
            f"(largest weight exp({max_exp:.3g}))"
        )
    return est
