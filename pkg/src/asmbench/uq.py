"""Sampling, Monte Carlo propagation, and sensitivity analysis.

Parameter uncertainty is described by DistributionSpec objects, drawn
with plain random or Latin hypercube sampling, and pushed through a
ModelBinding (parameter setters + metric extractors). On top of the
Monte Carlo table sit Morris elementary-effects screening, Spearman
rank correlation, two-sample KS Monte Carlo filtering, and 2-D
decision-space sweeps.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .flowsheet import (METRIC_NAMES, BSM1Settings, ConvergenceError,
                        SolverError, assemble_ode, bsm1_initial_state,
                        build_bsm1, effluent_metrics, steady_state)
from .kinetics import ASM1ParameterSet


class UQError(ValueError):
    """Invalid distribution spec, sample matrix, or binding."""


class MonteCarloError(RuntimeError):
    """Too many non-converged samples; carries the partial result."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class DistributionSpec:
    """One uncertain parameter: a named 1-D distribution.

    Parameters
    ----------
    name : str
        Settable model path (e.g. "asm1.mu_H", "settings.Q_WAS").
    kind : {"uniform", "triangular"}
    min, max : float
    mode : float, optional
        Triangular peak; required for (and only for) triangular.
    baseline : float, optional
        Nominal value; defaults to the mode (triangular) or midpoint.
    """

    name: str
    kind: str
    min: float
    max: float
    mode: float = None
    baseline: float = None

    def __post_init__(self):
        if self.kind not in ("uniform", "triangular"):
            raise UQError(f"{self.name}: unknown distribution {self.kind!r}")
        if not self.min < self.max:
            raise UQError(f"{self.name}: min must be < max")
        if self.kind == "triangular":
            if self.mode is None:
                raise UQError(f"{self.name}: triangular needs a mode")
            if not self.min <= self.mode <= self.max:
                raise UQError(f"{self.name}: mode outside [min, max]")
        elif self.mode is not None:
            raise UQError(f"{self.name}: mode is only for triangular")
        if self.baseline is None:
            default = self.mode if self.kind == "triangular" \
                else 0.5 * (self.min + self.max)
            object.__setattr__(self, "baseline", float(default))
        if not self.min <= self.baseline <= self.max:
            raise UQError(f"{self.name}: baseline outside [min, max]")

    def ppf(self, u):
        """Inverse CDF, mapping u in [0, 1] to a parameter value."""
        u = np.asarray(u, dtype=float)
        lo, hi = self.min, self.max
        if self.kind == "uniform":
            return lo + u * (hi - lo)
        span = hi - lo
        fc = (self.mode - lo) / span
        left = lo + np.sqrt(np.clip(u, 0.0, 1.0) * span * (self.mode - lo))
        right = hi - np.sqrt(np.clip(1.0 - u, 0.0, 1.0) * span
                             * (hi - self.mode))
        return np.where(u < fc, left, right) if np.ndim(u) else \
            float(left if u < fc else right)


@dataclass(frozen=True)
class SampleMatrix:
    """N draws of k named parameters plus their provenance."""

    names: tuple
    values: np.ndarray
    seed: int
    method: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != len(self.names):
            raise UQError("sample matrix shape does not match names")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self):
        return self.values.shape[0]

    def column(self, name):
        return self.values[:, self.names.index(name)]


def sample_random(specs, n, seed):
    """Independent draws from each spec via seeded inverse-CDF.

    Parameters
    ----------
    specs : sequence of DistributionSpec
    n : int
    seed : int

    Returns
    -------
    SampleMatrix
    """
    if n < 1:
        raise UQError("n must be >= 1")
    specs = tuple(specs)
    rng = np.random.default_rng(seed)
    u = rng.random((n, len(specs)))
    vals = np.column_stack([s.ppf(u[:, j]) for j, s in enumerate(specs)]) \
        if specs else np.empty((n, 0))
    return SampleMatrix(tuple(s.name for s in specs), vals, seed, "random")


def sample_lhs(specs, n, seed):
    """Latin hypercube sample: one draw per equal-probability stratum.

    Strata are permuted independently per parameter; the position
    within each stratum is uniform. Same (specs, n, seed) always
    yields the same matrix.
    """
    if n < 1:
        raise UQError("n must be >= 1")
    specs = tuple(specs)
    rng = np.random.default_rng(seed)
    cols = []
    for s in specs:
        perm = rng.permutation(n)
        u = (perm + rng.random(n)) / n
        cols.append(s.ppf(u))
    vals = np.column_stack(cols) if specs else np.empty((n, 0))
    return SampleMatrix(tuple(s.name for s in specs), vals, seed, "lhs")


@dataclass(frozen=True)
class ModelBinding:
    """Uncertain parameters bound to a model evaluation.

    `evaluate(values)` applies one parameter vector (aligned with
    `parameters`) and returns (metric row, converged flag).
    """

    parameters: tuple
    metrics: tuple
    evaluate: object

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise UQError("duplicate parameter names in binding")

    @property
    def parameter_names(self):
        return tuple(p.name for p in self.parameters)

    def baseline_values(self):
        return np.array([p.baseline for p in self.parameters])


def resolve_workers(workers=None):
    """Worker count: explicit arg, else ASMBENCH_WORKERS, else 1."""
    if workers is None:
        workers = os.environ.get("ASMBENCH_WORKERS", "")
        workers = int(workers) if workers.strip() else 1
    workers = int(workers)
    if workers < 1:
        raise UQError("workers must be >= 1")
    return workers


def _call_eval(args):
    evaluate, row = args
    return evaluate(row)


def _evaluate_rows(evaluate, rows, workers):
    """Evaluate rows in index order, optionally in worker processes.

    Results are keyed by row index, so the output is identical at any
    worker count.
    """
    if workers <= 1 or len(rows) <= 1:
        return [evaluate(r) for r in rows]
    import multiprocessing

    chunk = max(1, len(rows) // (workers * 8))
    with multiprocessing.Pool(workers) as pool:
        return list(pool.imap(_call_eval,
                              [(evaluate, r) for r in rows], chunk))


@dataclass(frozen=True)
class MonteCarloResult:
    """Metric table aligned row-for-row with the sample matrix."""

    parameters: tuple
    metrics: tuple
    table: np.ndarray
    converged: np.ndarray

    @property
    def n_failed(self):
        return int(np.sum(~self.converged))


def run_monte_carlo(binding, samples, workers=None, max_failure_rate=0.05):
    """Evaluate every sample row; flag and count non-converged ones.

    Parameters
    ----------
    binding : ModelBinding
    samples : SampleMatrix
        Column names must match the binding's parameters exactly.
    workers : int, optional
        Process count (default from ASMBENCH_WORKERS, else 1); the
        result is byte-identical at any worker count.
    max_failure_rate : float
        Abort threshold for the non-converged fraction.

    Returns
    -------
    MonteCarloResult
        Metric rows are NaN where not converged.

    Raises
    ------
    MonteCarloError
        If more than `max_failure_rate` of the samples fail to
        converge; the partial result rides on the exception.
    """
    if samples.names != binding.parameter_names:
        raise UQError("sample columns do not match binding parameters")
    workers = resolve_workers(workers)
    out = _evaluate_rows(binding.evaluate, list(samples.values), workers)
    table = np.array([row for row, _ in out], dtype=float)
    converged = np.array([bool(ok) for _, ok in out])
    result = MonteCarloResult(binding.parameter_names, tuple(binding.metrics),
                              table, converged)
    frac = result.n_failed / samples.n
    if frac > max_failure_rate:
        raise MonteCarloError(
            f"{result.n_failed}/{samples.n} samples did not converge "
            f"({100 * frac:.1f}% > {100 * max_failure_rate:g}% allowed)",
            result=result)
    return result


@dataclass(frozen=True)
class MorrisResult:
    """Elementary-effects screening indices, per parameter per metric."""

    parameters: tuple
    metrics: tuple
    mu_star: np.ndarray
    sigma: np.ndarray
    mu_star_norm: np.ndarray
    sigma_norm: np.ndarray
    ci95: np.ndarray
    n_simulations: int

    def classification(self, sigma_over_mu_high=1.0, sigma_over_mu_low=0.1):
        """Label each (parameter, metric): the sigma/mu* rule."""
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.mu_star > 0.0,
                             self.sigma / np.where(self.mu_star > 0.0,
                                                   self.mu_star, 1.0),
                             np.inf)
        labels = np.full(ratio.shape, "moderate", dtype=object)
        labels[ratio > sigma_over_mu_high] = "non-monotonic"
        labels[ratio < sigma_over_mu_low] = "near-linear"
        return labels


def morris(binding, specs=None, n_trajectory=20, levels=4, seed=0,
           workers=None):
    """Morris one-at-a-time screening on a p-level grid.

    Each trajectory starts at a random grid point of the unit
    hypercube and perturbs every parameter exactly once by
    delta = p/(2(p-1)) in random order and direction; elementary
    effects are measured in unit-hypercube coordinates, with points
    mapped to parameter values through each spec's inverse CDF.

    Parameters
    ----------
    binding : ModelBinding
    specs : sequence of DistributionSpec, optional
        Design distributions; defaults to the binding's.
    n_trajectory : int
        Trajectories r; total simulations are r (k+1).
    levels : int
        Even grid level count p (default 4).
    seed : int

    Returns
    -------
    MorrisResult
        mu* (mean |EE|), sigma (sample std of EE), both also
        normalized by the largest mu* per metric, and a bootstrap 95%
        confidence half-width of mu*.
    """
    specs = tuple(binding.parameters if specs is None else specs)
    k = len(specs)
    if k == 0:
        raise UQError("morris needs at least one parameter")
    if n_trajectory < 2:
        raise UQError("n_trajectory must be >= 2")
    if levels < 2 or levels % 2:
        raise UQError("levels must be an even integer >= 2")
    names = tuple(s.name for s in specs)
    if names != binding.parameter_names:
        raise UQError("specs do not match binding parameters")
    workers = resolve_workers(workers)
    p = int(levels)
    delta = p / (2.0 * (p - 1.0))
    base_levels = np.arange(p // 2) / (p - 1.0)

    ss = np.random.SeedSequence(seed)
    rng, rng_boot = [np.random.default_rng(s) for s in ss.spawn(2)]

    points = []
    steps = []
    for _ in range(n_trajectory):
        x_star = rng.choice(base_levels, size=k)
        direction = np.where(rng.random(k) < 0.5, -1.0, 1.0)
        order = rng.permutation(k)
        x = np.where(direction < 0.0, x_star + delta, x_star)
        traj = [x.copy()]
        for dim in order:
            x = x.copy()
            x[dim] += direction[dim] * delta
            traj.append(x)
        points.extend(traj)
        steps.append((order, direction))
    points = np.array(points)

    values = np.column_stack([specs[j].ppf(points[:, j]) for j in range(k)])
    out = _evaluate_rows(binding.evaluate, list(values), workers)
    m = len(binding.metrics)
    y = np.array([row for row, _ in out], dtype=float)
    ok = np.array([bool(c) for _, c in out])
    y[~ok] = np.nan
    n_sim = len(points)

    ee = np.full((n_trajectory, k, m), np.nan)
    for t, (order, direction) in enumerate(steps):
        base = t * (k + 1)
        for j, dim in enumerate(order):
            dy = y[base + j + 1] - y[base + j]
            ee[t, dim] = dy / (direction[dim] * delta)

    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.filterwarnings("ignore", "Mean of empty slice")
        warnings.filterwarnings("ignore", "Degrees of freedom")
        mu_star = np.nanmean(np.abs(ee), axis=0)
        sigma = np.nanstd(ee, axis=0, ddof=1)
    mu_star = np.nan_to_num(mu_star)
    sigma = np.nan_to_num(sigma)

    mx = mu_star.max(axis=0)
    safe = np.where(mx > 0.0, mx, 1.0)
    mu_norm = mu_star / safe
    sigma_norm = sigma / safe

    n_boot = 1000
    idx = rng_boot.integers(0, n_trajectory, size=(n_boot, n_trajectory))
    abs_ee = np.abs(ee)
    boots = np.empty((n_boot, k, m))
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.filterwarnings("ignore", "Mean of empty slice")
        for b in range(n_boot):
            boots[b] = np.nanmean(abs_ee[idx[b]], axis=0)
    boots = np.nan_to_num(boots)
    lo = np.percentile(boots, 2.5, axis=0)
    hi = np.percentile(boots, 97.5, axis=0)
    ci95 = 0.5 * (hi - lo)

    return MorrisResult(names, tuple(binding.metrics), mu_star, sigma,
                        mu_norm, sigma_norm, ci95, n_sim)


def ks_2sample(a, b):
    """Two-sample KS statistic and asymptotic p value.

    D is the supremum distance between the two empirical CDFs; p uses
    the asymptotic Kolmogorov distribution at effective sample size
    n1 n2/(n1+n2), with the series truncated at relative term 1e-10.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise UQError("ks_2sample needs non-empty samples")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / n1
    fb = np.searchsorted(b, pts, side="right") / n2
    d = float(np.max(np.abs(fa - fb)))
    ne = n1 * n2 / (n1 + n2)
    lam = math.sqrt(ne) * d
    if lam <= 0.0:
        return d, 1.0
    total = 0.0
    for j in range(1, 100001):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-10 * max(abs(total), 1e-300):
            break
    return d, float(min(max(total, 0.0), 1.0))


@dataclass(frozen=True)
class FilterResult:
    """Monte Carlo filtering: KS separation per parameter."""

    parameters: tuple
    metric: str
    threshold: float
    d: np.ndarray
    p: np.ndarray
    n_above: int
    n_below: int
    low_confidence: bool


def mc_filter(samples, metric_values, threshold, metric="metric",
              converged=None):
    """Split samples at a metric threshold and KS-test each parameter.

    Samples exactly at the threshold join the "below" group. Rows
    flagged non-converged are excluded entirely.

    Parameters
    ----------
    samples : SampleMatrix
    metric_values : array, length N
    threshold : float
    metric : str
        Name recorded in the result.
    converged : bool array, optional

    Returns
    -------
    FilterResult
        `low_confidence` is set when either group has fewer than 5
        members (both must be non-empty).
    """
    vals = samples.values
    metric_values = np.asarray(metric_values, dtype=float)
    if metric_values.shape != (vals.shape[0],):
        raise UQError("metric values do not align with samples")
    keep = np.ones(len(metric_values), dtype=bool) if converged is None \
        else np.asarray(converged, dtype=bool)
    keep = keep & np.isfinite(metric_values)
    vals = vals[keep]
    mv = metric_values[keep]
    above = mv > threshold
    n_above = int(above.sum())
    n_below = int(len(mv) - n_above)
    if n_above == 0 or n_below == 0:
        raise UQError(
            f"threshold {threshold:g} leaves an empty group "
            f"(above={n_above}, below={n_below})")
    d = np.empty(vals.shape[1])
    p = np.empty(vals.shape[1])
    for j in range(vals.shape[1]):
        d[j], p[j] = ks_2sample(vals[above, j], vals[~above, j])
    return FilterResult(samples.names, metric, float(threshold), d, p,
                        n_above, n_below,
                        low_confidence=min(n_above, n_below) < 5)


def _average_ranks(x):
    """Ranks 1..n with ties sharing their average rank."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(sample_values, metric_values, converged=None):
    """Spearman rank correlation of each parameter with each metric.

    Pearson correlation of average ranks. A constant column yields 0
    with its flag set rather than NaN.

    Returns
    -------
    rho : array (k, m)
    flagged : bool array (k, m)
        True where a constant column forced the 0.
    """
    x = np.asarray(sample_values, dtype=float)
    y = np.asarray(metric_values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise UQError("sample and metric row counts differ")
    keep = np.ones(x.shape[0], dtype=bool) if converged is None \
        else np.asarray(converged, dtype=bool)
    x, y = x[keep], y[keep]
    if x.shape[0] < 3:
        raise UQError("spearman needs at least 3 rows")
    rx = np.column_stack([_average_ranks(x[:, j]) for j in range(x.shape[1])])
    ry = np.column_stack([_average_ranks(y[:, j]) for j in range(y.shape[1])])
    rho = np.zeros((x.shape[1], y.shape[1]))
    flagged = np.zeros_like(rho, dtype=bool)
    for i in range(x.shape[1]):
        xi = rx[:, i] - rx[:, i].mean()
        sx = np.sqrt(np.sum(xi * xi))
        for j in range(y.shape[1]):
            yj = ry[:, j] - ry[:, j].mean()
            sy = np.sqrt(np.sum(yj * yj))
            if sx == 0.0 or sy == 0.0:
                flagged[i, j] = True
            else:
                rho[i, j] = float(np.dot(xi, yj) / (sx * sy))
    return rho, flagged


@dataclass(frozen=True)
class SweepResult:
    """Steady-state metrics over a 2-D decision grid."""

    x_name: str
    y_name: str
    x_values: np.ndarray
    y_values: np.ndarray
    metrics: tuple
    grids: np.ndarray
    missing: np.ndarray


def grid_sweep(binding, var_x, var_y, x_values, y_values, workers=None):
    """Evaluate the model over a grid of two parameters.

    All other parameters stay at their baselines. Non-convergence at a
    grid point is recorded as missing (NaN), not fatal.

    Returns
    -------
    SweepResult
        `grids[metric_index, iy, ix]`; `missing[iy, ix]` flags holes.
    """
    names = binding.parameter_names
    if var_x not in names or var_y not in names:
        raise UQError("sweep variables must be binding parameters")
    if var_x == var_y:
        raise UQError("sweep variables must differ")
    workers = resolve_workers(workers)
    ix = names.index(var_x)
    iy = names.index(var_y)
    x_values = np.asarray(x_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    base = binding.baseline_values()
    rows = []
    for yv in y_values:
        for xv in x_values:
            r = base.copy()
            r[ix] = xv
            r[iy] = yv
            rows.append(r)
    out = _evaluate_rows(binding.evaluate, rows, workers)
    m = len(binding.metrics)
    grids = np.full((m, len(y_values), len(x_values)), np.nan)
    missing = np.zeros((len(y_values), len(x_values)), dtype=bool)
    q = 0
    for j in range(len(y_values)):
        for i in range(len(x_values)):
            row, ok = out[q]
            q += 1
            if ok:
                grids[:, j, i] = row
            else:
                missing[j, i] = True
    return SweepResult(var_x, var_y, x_values, y_values,
                       tuple(binding.metrics), grids, missing)


# BSM1 binding: the paper's 28 uncertain parameters

def bsm1_parameter_specs(settings=None):
    """The 28 uncertain BSM1 parameters with their distributions.

    20 ASM1 kinetic/stoichiometric parameters are triangular with the
    baseline as mode; the saturation DO and 7 design and operational
    decision variables are uniform. Flow ranges scale with the
    settings' influent flow.
    """
    st = settings if settings is not None else BSM1Settings()
    q = st.Q_in
    tri = [
        ("asm1.Y_H", 0.64, 0.67, 0.70),
        ("asm1.Y_A", 0.23, 0.24, 0.25),
        ("asm1.f_Pobs", 0.16, 0.21, 0.26),
        ("asm1.i_XB", 0.04, 0.08, 0.12),
        ("asm1.i_XP", 0.057, 0.06, 0.063),
        ("settings.f_SS_COD", 0.70, 0.75, 0.95),
        ("asm1.mu_H", 3.0, 4.0, 5.0),
        ("asm1.K_S", 5.0, 10.0, 15.0),
        ("asm1.K_OH", 0.1, 0.2, 0.3),
        ("asm1.K_NO", 0.25, 0.5, 0.75),
        ("asm1.b_H", 0.285, 0.3, 0.315),
        ("asm1.mu_A", 0.475, 0.5, 0.525),
        ("asm1.K_NH", 0.5, 1.0, 1.5),
        ("asm1.K_OA", 0.3, 0.4, 0.5),
        ("asm1.b_A", 0.04, 0.05, 0.06),
        ("asm1.eta_g", 0.6, 0.8, 1.0),
        ("asm1.k_a", 0.03, 0.05, 0.08),
        ("asm1.k_h", 2.25, 3.0, 3.75),
        ("asm1.K_X", 0.075, 0.1, 0.125),
        ("asm1.eta_h", 0.6, 0.8, 1.0),
    ]
    uni = [
        ("settings.DO_sat", 7.2, 8.8, st.DO_sat),
        ("settings.V_a", 900.0, 1000.0, st.V_a),
        ("settings.V_o", 1200.0, 1333.0, st.V_o),
        ("settings.K_La1", 180.0, 360.0, st.K_La1),
        ("settings.K_La2", 75.6, 92.4, st.K_La2),
        ("settings.Q_RAS", 0.75 * q, 1.0 * q, st.Q_RAS),
        ("settings.Q_WAS", 346.5, 423.5, st.Q_WAS),
        ("settings.Q_intr", 2.25 * q, 3.75 * q, st.Q_intr),
    ]
    specs = [DistributionSpec(nm, "triangular", lo, hi, mode=md, baseline=md)
             for nm, lo, md, hi in tri]
    specs += [DistributionSpec(nm, "uniform", lo, hi, baseline=b)
              for nm, lo, hi, b in uni]
    return tuple(specs)


class Bsm1Evaluator:
    """Picklable sample evaluator: settings in, steady metrics out.

    Applies a parameter vector to copies of the baseline settings and
    ASM1 parameters, rebuilds the plant, solves to steady state
    (warm-started from the baseline steady state when available), and
    extracts the seven performance metrics.
    """

    def __init__(self, names, settings, params, settling=None, tol_ss=1e-3,
                 t_max=150.0, check_interval=10.0, warm_state=None):
        self.names = tuple(names)
        self.settings = settings
        self.params = params
        self.settling = settling
        self.tol_ss = tol_ss
        self.t_max = t_max
        self.check_interval = check_interval
        self.warm_state = None if warm_state is None \
            else np.asarray(warm_state, dtype=float)

    def __call__(self, values):
        asm1_over = {}
        settings_over = {}
        for name, v in zip(self.names, values):
            scope, _, attr = name.partition(".")
            if scope == "asm1":
                asm1_over[attr] = float(v)
            elif scope == "settings":
                settings_over[attr] = float(v)
            else:
                raise UQError(f"unknown parameter path {name!r}")
        params = self.params.replace(**asm1_over) if asm1_over \
            else self.params
        settings = self.settings.replace(**settings_over) if settings_over \
            else self.settings
        graph = build_bsm1(settings, params, self.settling)
        problem = assemble_ode(graph)
        init = self.warm_state if self.warm_state is not None \
            else bsm1_initial_state(problem)
        nan_row = np.full(len(METRIC_NAMES), np.nan)
        try:
            ss = steady_state(problem, init, tol_ss=self.tol_ss,
                              t_max=self.t_max,
                              check_interval=self.check_interval,
                              use_jac=True)
        except (ConvergenceError, SolverError):
            return nan_row, False
        m = effluent_metrics(problem, ss)
        return np.array([m[k] for k in METRIC_NAMES]), True


def bsm1_binding(settings=None, params=None, settling=None, specs=None,
                 tol_ss=1e-3, t_max=150.0, check_interval=10.0,
                 warm_start=True):
    """ModelBinding for the BSM1 plant over the 28 uncertain parameters.

    Parameters
    ----------
    settings : BSM1Settings, optional
    params : ASM1ParameterSet, optional
    settling : SettlingParams, optional
    specs : sequence of DistributionSpec, optional
        Replaces the default 28-parameter set; names must be
        "asm1.<param>" or "settings.<param>" paths.
    tol_ss, t_max, check_interval : float
        Steady-state search controls per sample.
    warm_start : bool
        Start each sample from the baseline steady state instead of
        the cold published initial conditions (same converged result,
        much cheaper transients).
    """
    settings = settings if settings is not None else BSM1Settings()
    params = params if params is not None else ASM1ParameterSet()
    specs = tuple(specs) if specs is not None \
        else bsm1_parameter_specs(settings)
    warm = None
    if warm_start:
        problem = assemble_ode(build_bsm1(settings, params, settling))
        warm = steady_state(problem, bsm1_initial_state(problem),
                            tol_ss=tol_ss, t_max=t_max,
                            check_interval=check_interval).state
    evaluator = Bsm1Evaluator([s.name for s in specs], settings, params,
                              settling=settling, tol_ss=tol_ss, t_max=t_max,
                              check_interval=check_interval, warm_state=warm)
    return ModelBinding(specs, METRIC_NAMES, evaluator)
