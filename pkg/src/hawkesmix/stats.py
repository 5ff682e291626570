"""Centered linear statistics and Monte Carlo verification harnesses.

The centered statistic of an event log over ``[0, T]`` is

    S_T = sum_i [ sum_{events t of component i} f_i(t) - m_i int_0^T f_i ].

Normalized by the spectral standard deviation and composed with the
variance-ratio time change, its path converges to standard Brownian motion;
this module computes those objects from simulated logs and checks the
normal limit (Kolmogorov-Smirnov), the Brownian covariance structure on a
grid, and the decay of count covariances against both the spectral values
and the branching-process bound.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import kolmogi, kolmogorov, ndtr

from .branching import MixingBoundReport, mixing_bound
from .errors import HypothesisError, NumericError
from .model import HawkesModel
from .simulate import EventLog, simulate, spawn_seeds
from .spectrum import cov_counts, variance_profile
from .testfunctions import TestFunction

__all__ = [
    "statistic_ST",
    "partial_statistics",
    "TimeChange",
    "time_change",
    "PathSample",
    "path_sample",
    "HarnessReport",
    "clt_harness",
    "DecayReport",
    "mixing_decay_diagnostic",
]


def _check_compatible(log: EventLog, model: HawkesModel, f: TestFunction,
                      horizon: float) -> None:
    if log.d != model.d or len(f) != model.d:
        raise ValueError("log, model and test function dimensions differ")
    if horizon > log.horizon + 1e-9:
        raise ValueError("statistic horizon exceeds the simulated window")


def partial_statistics(log: EventLog, model: HawkesModel, f: TestFunction,
                       ts) -> np.ndarray:
    """Centered statistics ``S_t`` for every ``t`` in ``ts`` from one log.

    Sorted per-component prefix sums of the weights make the whole profile
    one pass over the events.
    """
    ts = np.asarray(ts, dtype=float)
    _check_compatible(log, model, f, float(np.max(ts)) if ts.size else 0.0)
    m = model.mean_intensity
    out = np.zeros(ts.size)
    for i in range(model.d):
        times = log.events[i]
        if times.size:
            prefix = np.concatenate([[0.0], np.cumsum(f[i].value(times))])
            idx = np.searchsorted(times, ts, side="right")
            out += prefix[idx]
        out -= m[i] * np.asarray(f[i].integral(ts), dtype=float)
    return out


def statistic_ST(log: EventLog, model: HawkesModel, f: TestFunction,
                 horizon: float) -> float:
    """Centered statistic ``S_T`` of one event log over ``[0, horizon]``."""
    return float(partial_statistics(log, model, f, np.array([horizon]))[0])


class TimeChange:
    """Variance-ratio time change ``u -> v_T(u)`` on a fixed grid.

    ``v_T(u)`` is the first grid time whose variance share
    ``sigma_t^2 / sigma_T^2`` reaches ``u``; evaluation is left-continuous
    with ties resolved to the smallest time.
    """

    def __init__(self, ts: np.ndarray, sigma2: np.ndarray):
        self.ts = ts
        self.sigma2 = sigma2
        self.sigma_T2 = float(sigma2[-1])
        if self.sigma_T2 <= 0.0:
            raise ValueError("total variance must be positive")
        diffs = np.diff(sigma2)
        if np.any(diffs < -1e-9 * self.sigma_T2):
            raise NumericError(
                "variance profile is not monotone; spectral quadrature "
                "tolerances are too loose for this grid"
            )
        self.ratio = np.maximum.accumulate(sigma2 / self.sigma_T2)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.ratio, u - 1e-12, side="left")
        return self.ts[np.clip(idx, 0, self.ts.size - 1)]


def time_change(model: HawkesModel, f: TestFunction, horizon: float,
                grid_step: float | None = None,
                rel_tol: float = 1e-4) -> TimeChange:
    """Build the time change from the spectral variance profile.

    The grid step defaults to ``horizon / 1000``; the last grid point is
    ``horizon`` exactly so that ``v_T(1) = horizon``.  The default profile
    tolerance is looser than for a single variance because only the ratio
    curve matters here and adjacent grid variances differ at order
    ``sigma_T^2 / n``, far above the quadrature error.
    """
    if grid_step is None:
        grid_step = horizon / 1000.0
    if not 0.0 < grid_step <= horizon:
        raise ValueError("grid step must lie in (0, horizon]")
    n = int(np.ceil(horizon / grid_step))
    ts = np.minimum(grid_step * np.arange(1, n + 1), horizon)
    ts[-1] = horizon
    sigma2 = variance_profile(model, f, ts, rel_tol=rel_tol)
    return TimeChange(ts, sigma2)


@dataclass(frozen=True)
class PathSample:
    """Normalized statistic path ``W_T(u) = S_{v_T(u)} / sigma_T`` on a grid."""

    grid: np.ndarray
    values: np.ndarray
    sigma_T: float

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "sigma_T": self.sigma_T,
        }


def path_sample(log: EventLog, model: HawkesModel, f: TestFunction,
                tc: TimeChange, grid) -> PathSample:
    grid = np.asarray(grid, dtype=float)
    v = tc(grid)
    sigma_t = float(np.sqrt(tc.sigma_T2))
    values = partial_statistics(log, model, f, v) / sigma_t
    return PathSample(grid, values, sigma_t)


@dataclass
class HarnessReport:
    """Monte Carlo check of the normal limit and Brownian path structure.

    ``flags`` holds one boolean per check at the recorded tolerances:
    ``normal_ks`` (statistic distribution), ``brownian_cov`` (path
    covariances against ``min(u, v)``), and ``unit_variance`` (of the
    normalized endpoint).
    """

    replicates: int
    horizon: float
    simulator: str
    seed: int
    grid: np.ndarray
    sigma_T: float
    statistic_mean: float
    statistic_mean_se: float
    ks_stat: float
    ks_pvalue: float
    ks_critical: float
    level: float
    w_cov: np.ndarray
    cov_target: np.ndarray
    max_cov_dev: float
    cov_tol: float
    var_w1: float
    var_w1_tol: float
    flags: dict = field(default_factory=dict)
    # raw per-replicate material for CSV export; left out of to_dict so the
    # JSON report stays a summary
    samples: np.ndarray | None = None
    w_paths: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "horizon": self.horizon,
            "simulator": self.simulator,
            "seed": self.seed,
            "grid": self.grid.tolist(),
            "sigma_T": self.sigma_T,
            "statistic_mean": self.statistic_mean,
            "statistic_mean_se": self.statistic_mean_se,
            "ks_stat": self.ks_stat,
            "ks_pvalue": self.ks_pvalue,
            "ks_critical": self.ks_critical,
            "level": self.level,
            "w_cov": self.w_cov.tolist(),
            "cov_target": self.cov_target.tolist(),
            "max_cov_dev": self.max_cov_dev,
            "cov_tol": self.cov_tol,
            "var_w1": self.var_w1,
            "var_w1_tol": self.var_w1_tol,
            "flags": dict(self.flags),
            "passed": self.passed,
        }


_DEFAULT_GRID = np.arange(1, 11) / 10.0


def clt_harness(model: HawkesModel, f: TestFunction, horizon: float,
                replicates: int, seed: int, beta: float = 3.0,
                delta: float = 2.0, grid=None, simulator: str = "cluster",
                level: float = 0.01, threads: int = 1,
                grid_step: float | None = None) -> HarnessReport:
    """Simulate replicate logs and test the normal and Brownian limits.

    The limit theory needs kernels with a finite moment of order
    ``1 + beta``, weights locally ``(2 + delta)``-integrable (automatic
    here, all weight forms are bounded), and ``(beta - 1) delta > 2``;
    inadmissible pairs raise :class:`HypothesisError` before any
    simulation.

    Parameters
    ----------
    model, f : HawkesModel, TestFunction
        Model and weight functions of the statistic.
    horizon, replicates, seed : float, int, int
        Window length, Monte Carlo size, and master seed; replicate streams
        are spawned from the seed, so reports are reproducible bit for bit.
    beta, delta : float
        Moment and integrability exponents backing the limit theorems.
    grid : array_like, optional
        Time-change evaluation grid in ``(0, 1]``; defaults to
        ``{0.1, ..., 1.0}``.
    simulator : str
        ``"cluster"`` or ``"thinning"``.
    level : float
        Test level for the Kolmogorov-Smirnov critical value.
    threads : int
        Worker threads for the replicate loop.
    """
    if replicates < 10:
        raise ValueError("need at least 10 replicates")
    if (beta - 1.0) * delta <= 2.0:
        raise HypothesisError(
            f"limit theorem needs (beta - 1) * delta > 2, got "
            f"({beta} - 1) * {delta} = {(beta - 1.0) * delta:.6g}"
        )
    model.validate(beta)
    grid = _DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid <= 0.0) or np.any(grid > 1.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly increasing inside (0, 1]")

    tc = time_change(model, f, horizon, grid_step)
    sigma_t = float(np.sqrt(tc.sigma_T2))
    v_times = tc(grid)
    eval_times = np.append(v_times, horizon)

    seeds = spawn_seeds(seed, replicates)

    def one(r: int) -> np.ndarray:
        log = simulate(model, horizon, simulator=simulator, seed=seeds[r])
        return partial_statistics(log, model, f, eval_times)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(replicates)))
    else:
        rows = [one(r) for r in range(replicates)]
    stats = np.vstack(rows)
    w = stats[:, :-1] / sigma_t
    s_T = stats[:, -1]

    z = np.sort(s_T / sigma_t)
    n = replicates
    cdf = ndtr(z)
    steps = np.arange(n) / n
    ks_stat = float(max(np.max(cdf - steps), np.max(steps + 1.0 / n - cdf)))
    ks_pvalue = float(kolmogorov(np.sqrt(n) * ks_stat))
    ks_critical = float(kolmogi(level) / np.sqrt(n))

    w_cov = np.cov(w, rowvar=False, ddof=1)
    w_cov = np.atleast_2d(w_cov)
    cov_target = np.minimum.outer(grid, grid)
    max_cov_dev = float(np.max(np.abs(w_cov - cov_target)))
    cov_tol = 4.0 / np.sqrt(replicates)
    var_w1 = float(np.var(w[:, -1] if grid[-1] == 1.0 else s_T / sigma_t, ddof=1))
    var_w1_tol = 3.0 * np.sqrt(2.0 / replicates)

    flags = {
        "normal_ks": bool(ks_stat < ks_critical),
        "brownian_cov": bool(max_cov_dev < cov_tol),
        "unit_variance": bool(abs(var_w1 - 1.0) < var_w1_tol),
    }
    return HarnessReport(
        replicates=replicates,
        horizon=horizon,
        simulator=simulator,
        seed=seed,
        grid=grid,
        sigma_T=sigma_t,
        statistic_mean=float(np.mean(s_T)),
        statistic_mean_se=float(np.std(s_T, ddof=1) / np.sqrt(n)),
        ks_stat=ks_stat,
        ks_pvalue=ks_pvalue,
        ks_critical=ks_critical,
        level=level,
        w_cov=w_cov,
        cov_target=cov_target,
        max_cov_dev=max_cov_dev,
        cov_tol=cov_tol,
        var_w1=var_w1,
        var_w1_tol=var_w1_tol,
        flags=flags,
        samples=s_T / sigma_t,
        w_paths=w,
    )


@dataclass
class DecayReport:
    """Empirical, spectral, and bound values of count covariances by lag.

    Windows are ``A = (0, w]`` and ``B = (lag, lag + w]``; the branching
    bound is evaluated at the gap ``lag - w`` separating the windows, since
    it dominates covariances across any such separation.
    """

    i: int
    j: int
    window_len: float
    lags: np.ndarray
    empirical: np.ndarray
    empirical_se: np.ndarray
    spectral: np.ndarray
    bound: np.ndarray | None
    replicates: int
    seed: int
    simulator: str
    mixing: MixingBoundReport | None = None

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "window_len": self.window_len,
            "lags": self.lags.tolist(),
            "empirical": self.empirical.tolist(),
            "empirical_se": self.empirical_se.tolist(),
            "spectral": self.spectral.tolist(),
            "bound": None if self.bound is None else self.bound.tolist(),
            "replicates": self.replicates,
            "seed": self.seed,
            "simulator": self.simulator,
            "mixing": None if self.mixing is None else self.mixing.to_dict(),
        }


def mixing_decay_diagnostic(model: HawkesModel, i: int, j: int,
                            window_len: float, lags, replicates: int,
                            seed: int, beta: float | None = None,
                            gamma: float | None = None,
                            simulator: str = "cluster",
                            threads: int = 1,
                            spectral_abs_tol: float = 1e-9) -> DecayReport:
    """Estimate count covariances across lags and compare with theory.

    For each lag ``tau``, estimates ``Cov(N_i((0, w]), N_j((tau, tau + w]))``
    over independent replicates and reports it beside the spectral value
    from :func:`hawkesmix.spectrum.cov_counts` and, when ``beta`` and
    ``gamma`` are given, the branching covariance-decay bound at the window
    gap.
    """
    lags = np.asarray(lags, dtype=float)
    if np.any(lags <= window_len):
        raise ValueError("lags must exceed the window length")
    if window_len <= 0.0:
        raise ValueError("window length must be positive")
    model.validate()
    horizon = float(np.max(lags)) + window_len

    seeds = spawn_seeds(seed, replicates)

    def one(r: int) -> np.ndarray:
        log = simulate(model, horizon, simulator=simulator, seed=seeds[r])
        row = np.empty(lags.size + 1)
        row[0] = log.count(i, 0.0, window_len)
        for t, lag in enumerate(lags):
            row[1 + t] = log.count(j, lag, lag + window_len)
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(replicates)))
    else:
        rows = [one(r) for r in range(replicates)]
    counts = np.vstack(rows)

    base = counts[:, 0] - counts[:, 0].mean()
    emp = np.empty(lags.size)
    emp_se = np.empty(lags.size)
    for t in range(lags.size):
        far = counts[:, 1 + t] - counts[:, 1 + t].mean()
        prod = base * far
        emp[t] = prod.sum() / (replicates - 1)
        emp_se[t] = np.std(prod, ddof=1) / np.sqrt(replicates)

    spectral = np.array([
        cov_counts(model, i, j, (0.0, window_len),
                   (lag, lag + window_len), abs_tol=spectral_abs_tol)
        for lag in lags
    ])

    bound = None
    mixing = None
    if beta is not None and gamma is not None:
        mixing = mixing_bound(model, beta, gamma, lags - window_len)
        bound = mixing.bounds
    return DecayReport(
        i=i,
        j=j,
        window_len=window_len,
        lags=lags,
        empirical=emp,
        empirical_se=emp_se,
        spectral=spectral,
        bound=bound,
        replicates=replicates,
        seed=seed,
        simulator=simulator,
        mixing=mixing,
    )
