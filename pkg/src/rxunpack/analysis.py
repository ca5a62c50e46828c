"""Quantities extracted from trajectories and ensembles.

Initial product-formation rates, saturation curves, equilibrium binding
fractions, Hill fits, response coefficients and oscillation periods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, signal
from scipy.ndimage import uniform_filter1d

from .errors import (DomainError, GridError, InsufficientDataError, SaturationRangeError,
                     UnfittableError)
from .sim.ssa import Ensemble, SsaConfig, Trajectory, run_ensemble


@dataclass(frozen=True)
class SaturationPoint:
    s0: float
    rate: float
    se: float


@dataclass(frozen=True)
class BindingCurvePoint:
    tf_total: float
    bound_fraction: float


@dataclass(frozen=True)
class HillFit:
    n_prime: float
    j_prime: float
    rmse_estimated: float

    def __iter__(self):
        return iter((self.n_prime, self.j_prime, self.rmse_estimated))


@dataclass(frozen=True)
class FitResult:
    n_prime: float
    j_prime: float
    rmse_estimated: float
    rmse_theoretical: float
    R: float
    n_from_R: float


@dataclass(frozen=True)
class PeriodResult:
    period: float
    amplitude: float
    n_peaks: int
    peak_times: np.ndarray
    peak_heights: np.ndarray

    @property
    def oscillating(self) -> bool:
        return self.n_peaks >= 2


def hill_fraction(x, n: float, j: float):
    """``x**n / (x**n + j**n)``, evaluated stably for large ratios."""
    x = np.asarray(x, float)
    with np.errstate(divide="ignore"):
        z = n * (np.log(j) - np.log(x))
    return 1.0 / (1.0 + np.exp(np.clip(z, -700, 700)))


# -- initial rates -----------------------------------------------------------

def _slope(t: np.ndarray, y: np.ndarray, degree: int) -> tuple[float, float]:
    X = np.vander(t, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = len(t) - (degree + 1)
    if dof <= 0:
        return float(coef[1]), 0.0
    resid = y - X @ coef
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.pinv(X.T @ X)
    return float(coef[1]), math.sqrt(max(cov[1, 1], 0.0))


def initial_rate(data: Trajectory | Ensemble, product: str, depletion_cap: float = 0.1,
                 s0: float | None = None, substrate: str | None = None,
                 degree: int = 2) -> tuple[float, float]:
    """Initial product-formation rate and its standard error.

    The window runs from t=0 while product formed stays within
    ``depletion_cap * s0``.  A polynomial of ``degree`` is fitted by least
    squares and its slope at t=0 is returned, so substrate depletion inside
    the window does not bias the estimate.  For a Trajectory the error comes
    from the regression residuals.  For an Ensemble the window is fixed from
    the mean curve (so it does not depend on any single replicate) and the
    error is the standard error of the replicate slopes.
    """
    if s0 is None and substrate is not None:
        s0 = float((data[substrate][0] if isinstance(data, Trajectory)
                    else data[substrate][:, 0]).mean())
    limit = math.inf if s0 is None else depletion_cap * s0
    t = np.asarray(data.times, float)
    if isinstance(data, Ensemble):
        p = data[product].astype(float)
        p = p - p[:, :1]
        mean = p.mean(axis=0)
        n = _window(mean, limit)
        if n < degree + 2:
            raise InsufficientDataError(f"only {n} samples inside the initial window")
        slopes = np.array([_slope(t[:n], row[:n], degree)[0] for row in p])
        if len(slopes) < 2:
            return float(slopes[0]), 0.0
        return float(slopes.mean()), float(slopes.std(ddof=1) / math.sqrt(len(slopes)))
    p = np.asarray(data[product], float)
    p = p - p[0]
    n = _window(p, limit)
    if n < max(3, degree + 1):
        raise InsufficientDataError(f"only {n} samples inside the initial window")
    if n == degree + 1 or np.allclose(np.diff(p[:n], 2), 0):
        degree = 1
    return _slope(t[:n], p[:n], degree)


def _window(p: np.ndarray, limit: float) -> int:
    over = np.nonzero(p > limit)[0]
    return int(over[0]) if len(over) else len(p)


def saturation_curve(builder: Callable[[int], object], s0_list: Sequence[int], n_runs: int,
                     t_end: float = 3.0, dt: float = 0.01, seed: int = 0,
                     product: str = "P", depletion_cap: float = 0.1,
                     degree: int = 2) -> list[SaturationPoint]:
    """One ensemble per initial substrate level; ``builder(s0)`` returns the network."""
    if not len(s0_list):
        raise ValueError("s0_list is empty")
    points = []
    for i, s0 in enumerate(s0_list):
        ens = run_ensemble(builder(s0), SsaConfig(t_end, seed=seed + i, dt=dt), n_runs)
        rate, se = initial_rate(ens, product, depletion_cap, s0=s0, degree=degree)
        points.append(SaturationPoint(float(s0), rate, se))
    return points


# -- binding curves ----------------------------------------------------------

def binding_fraction(ensemble: Ensemble, bound: str, total: float, burn_in: float = 0.2) -> float:
    """Time and replicate average of ``bound / total`` after the burn-in fraction."""
    if not total > 0:
        raise DomainError(f"total must be positive, got {total!r}")
    series = ensemble[bound]
    start = int(math.floor(burn_in * series.shape[1]))
    return float(series[:, start:].mean() / total)


def fit_hill(points: Sequence[BindingCurvePoint]) -> HillFit:
    """Least-squares fit of ``x**n / (x**n + J**n)`` over (log n, log J).

    Damped Gauss-Newton (Levenberg-Marquardt) with starts at n in
    {0.5, 1, 2, 4}; the best objective wins.
    """
    x = np.array([p.tf_total for p in points], float)
    y = np.array([p.bound_fraction for p in points], float)
    if len(x) < 4:
        raise InsufficientDataError("need at least 4 points to fit a Hill curve")
    if not (y.min() < 0.5 < y.max()):
        raise UnfittableError("data never crosses half saturation")
    order = np.argsort(x)
    j0 = _crossing(x[order], _isotonic(y[order]), 0.5)

    def resid(theta):
        return hill_fraction(x, math.exp(theta[0]), math.exp(theta[1])) - y

    best = None
    for n0 in (0.5, 1.0, 2.0, 4.0):
        sol = optimize.least_squares(resid, [math.log(n0), math.log(j0)], method="lm",
                                     xtol=1e-12, ftol=1e-12, gtol=1e-12)
        if best is None or sol.cost < best.cost:
            best = sol
    n_hat, j_hat = (math.exp(v) for v in best.x)
    rmse = math.sqrt(float(np.mean(best.fun**2)))
    return HillFit(n_hat, j_hat, rmse)


def rmse_vs_theoretical(points: Sequence[BindingCurvePoint], n: float, j: float) -> float:
    if not len(points):
        raise ValueError("no points")
    x = np.array([p.tf_total for p in points], float)
    y = np.array([p.bound_fraction for p in points], float)
    return math.sqrt(float(np.mean((y - hill_fraction(x, n, j)) ** 2)))


def _isotonic(y: np.ndarray) -> np.ndarray:
    # pool-adjacent-violators, non-decreasing
    vals, weights, sizes = [], [], []
    for v in y:
        vals.append(float(v)); weights.append(1.0); sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            w = weights[-2] + weights[-1]
            v = (vals[-2] * weights[-2] + vals[-1] * weights[-1]) / w
            n = sizes[-2] + sizes[-1]
            del vals[-1], weights[-1], sizes[-1]
            vals[-1], weights[-1], sizes[-1] = v, w, n
    return np.repeat(vals, sizes)


def _crossing(x: np.ndarray, y: np.ndarray, level: float) -> float:
    """Abscissa where monotone ``y`` first reaches ``level`` (log-linear interpolation)."""
    idx = np.nonzero(y >= level)[0]
    if not len(idx) or y[0] > level:
        raise SaturationRangeError(f"curve does not cover level {level}")
    i = int(idx[0])
    if i == 0 or y[i] == level:
        return float(x[i])
    lo, hi = np.log(x[i - 1]), np.log(x[i])
    frac = (level - y[i - 1]) / (y[i] - y[i - 1])
    return float(np.exp(lo + frac * (hi - lo)))


def response_coefficient(curve, lo: float = 0.1, hi: float = 0.9) -> float:
    """``S_0.9 / S_0.1`` for a callable curve or a sequence of BindingCurvePoints."""
    if callable(curve):
        return _level(curve, hi) / _level(curve, lo)
    x = np.array([p.tf_total for p in curve], float)
    y = np.array([p.bound_fraction for p in curve], float)
    order = np.argsort(x)
    x, y = x[order], _isotonic(y[order])
    if not (y[0] <= lo and y[-1] >= hi):
        raise SaturationRangeError(
            f"points span fractions [{y[0]:.3g}, {y[-1]:.3g}], need [{lo}, {hi}]")
    return _crossing(x, y, hi) / _crossing(x, y, lo)


def _level(f: Callable[[float], float], level: float) -> float:
    a, b = 1.0, 2.0
    for _ in range(400):
        if f(a) < level:
            break
        a /= 2.0
    else:
        raise SaturationRangeError(f"curve never drops below {level}")
    for _ in range(400):
        if f(b) > level:
            break
        b *= 2.0
    else:
        raise SaturationRangeError(f"curve never exceeds {level}")
    g = lambda s: f(math.exp(s)) - level
    return math.exp(optimize.brentq(g, math.log(a), math.log(b), xtol=1e-14, rtol=1e-15))


def hill_coeff_from_R(R: float) -> float:
    """Apparent Hill coefficient ``log 81 / log R``."""
    if not R > 1:
        raise DomainError(f"R must exceed 1, got {R!r}")
    return math.log(81.0) / math.log(R)


def summarize_binding_curve(points: Sequence[BindingCurvePoint], n: float = 2.0,
                            j: float = 599.0) -> FitResult:
    fit = fit_hill(points)
    R = response_coefficient(points)
    return FitResult(fit.n_prime, fit.j_prime, fit.rmse_estimated,
                     rmse_vs_theoretical(points, n, j), R, hill_coeff_from_R(R))


# -- oscillations ------------------------------------------------------------

def detect_period(trajectory: Trajectory, species: str, smoothing_window: float,
                  t_start: float = 0.0) -> PeriodResult:
    """Mean inter-peak interval of a smoothed series.

    Peaks must rise above mean + 0.25 std and be at least
    ``smoothing_window`` apart.  Fewer than two peaks gives ``period = nan``
    and ``oscillating == False``.
    """
    t = np.asarray(trajectory.times, float)
    y = np.asarray(trajectory[species], float)
    keep = t >= t_start
    t, y = t[keep], y[keep]
    dt = float(np.median(np.diff(t))) if len(t) > 1 else 1.0
    width = max(1, int(round(smoothing_window / dt)))
    smooth = uniform_filter1d(y, width, mode="nearest")
    thr = smooth.mean() + 0.25 * smooth.std()
    if smooth.std() == 0:
        return PeriodResult(math.nan, 0.0, 0, np.array([]), np.array([]))
    peaks, _ = signal.find_peaks(smooth, height=thr, distance=width)
    if len(peaks) < 2:
        return PeriodResult(math.nan, 0.0, int(len(peaks)), t[peaks], smooth[peaks])
    troughs = [smooth[a:b + 1].min() for a, b in zip(peaks[:-1], peaks[1:])]
    amp = float(np.mean(smooth[peaks[1:]] - np.array(troughs)))
    period = float(np.mean(np.diff(t[peaks])))
    return PeriodResult(period, amp, int(len(peaks)), t[peaks], smooth[peaks])


# -- ensemble summaries ------------------------------------------------------

def ensemble_stats(ensemble) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and sample std (ddof=1), each shaped (n_times, n_species).

    Accepts an Ensemble or a list of Trajectories sharing one grid.
    """
    if isinstance(ensemble, Ensemble):
        data = ensemble.data.astype(float)
    else:
        trajs = list(ensemble)
        t0 = trajs[0].times
        for tr in trajs[1:]:
            if len(tr.times) != len(t0) or not np.array_equal(tr.times, t0):
                raise GridError("replicates are on different time grids")
        data = np.stack([np.asarray(tr.counts, float) for tr in trajs])
    if data.shape[0] < 2:
        raise InsufficientDataError("need at least 2 replicates")
    return data.mean(axis=0), data.std(axis=0, ddof=1)


def peak_height_cv(result: PeriodResult) -> float:
    h = np.asarray(result.peak_heights, float)
    if len(h) < 2:
        return math.nan
    return float(h.std(ddof=1) / h.mean())
