"""Monte Carlo parameter-recovery studies.

Two designs are supported:

* iid: samples from a fixed GMOL law, refit with :func:`gmol.fit.fit_mle`;
* regression: one Uniform(0, 1) covariate drives both log links, lifetimes
  are drawn by inverse transform, and right censoring comes from an
  independent Uniform(0, b) variable whose bound is calibrated to a target
  censoring fraction.

Every replicate fit starts at the true parameters. Replicate seeds are
spawned from one ``numpy.random.SeedSequence``, so a study is a pure
function of its configuration regardless of how many worker processes run it.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core
from .core import GmolParams, SubModel
from .errors import CalibrationError, DomainError, GmolError
from .fit import IidSample, fit_mle
from .optimize import OptimizerConfig
from .regression import CensoredDesign, RegParams, fit_regression, systematic_components

__all__ = [
    "StudyConfig",
    "StudyRow",
    "StudyTable",
    "StudyWarning",
    "run_iid_study",
    "run_regression_study",
    "calibrate_censoring_bound",
    "simulate_censored_design",
    "worker_count",
    "IID_NAMES",
    "REG_NAMES",
]

IID_NAMES = ("alpha", "lambda", "tau", "beta")
REG_NAMES = ("alpha", "lambda", "eta10", "eta11", "eta20", "eta21")
FAILURE_WARN_FRACTION = 0.05
CSV_COLUMNS = ("param", "n", "censoring", "AE", "Bias", "MSE")


class StudyWarning(UserWarning):
    """Raised through :mod:`warnings` when too many replicates fail."""


@dataclass(frozen=True)
class StudyConfig:
    """Inputs of a recovery study.

    ``censor_targets`` is only used by the regression design; 0 means no
    censoring. ``workers`` of ``None`` defers to :func:`worker_count`.
    """

    truth: GmolParams | RegParams
    n_list: tuple[int, ...]
    reps: int
    seed: int = 0
    censor_targets: tuple[float, ...] = (0.0,)
    opt: OptimizerConfig = field(default_factory=OptimizerConfig)
    n_probe: int = 100_000
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "censor_targets", tuple(float(c) for c in self.censor_targets))
        if self.reps < 1:
            raise DomainError(f"reps must be >= 1, got {self.reps}")
        if not self.n_list:
            raise DomainError("n_list must not be empty")
        if any(n < 2 for n in self.n_list):
            raise DomainError("every sample size must be >= 2")
        if not self.censor_targets or any(not 0.0 <= c < 1.0 for c in self.censor_targets):
            raise DomainError("censoring targets must lie in [0, 1)")
        if self.n_probe < 100_000:
            raise DomainError("n_probe must be >= 100000")


@dataclass(frozen=True)
class StudyRow:
    param: str
    n: int
    censoring: float
    ae: float
    bias: float
    mse: float


@dataclass
class StudyTable:
    """AE / Bias / MSE per (parameter, sample size, censoring level).

    ``failures`` maps ``(n, censoring)`` to the number of excluded replicates.
    """

    rows: list[StudyRow]
    reps: int
    failures: dict[tuple[int, float], int] = field(default_factory=dict)
    bounds: dict[float, float] = field(default_factory=dict)

    def get(self, param: str, n: int, censoring: float = 0.0) -> StudyRow:
        for row in self.rows:
            if row.param == param and row.n == n and math.isclose(row.censoring, censoring):
                return row
        raise KeyError((param, n, censoring))

    def params(self) -> list[str]:
        return list(dict.fromkeys(r.param for r in self.rows))

    def warnings(self) -> list[str]:
        out = []
        for (n, c), k in sorted(self.failures.items()):
            if k > FAILURE_WARN_FRACTION * self.reps:
                out.append(f"n={n} censoring={c:g}: {k} of {self.reps} replicates failed")
        return out

    def to_csv(self, dest=None) -> str:
        """Write the table as CSV (12 significant digits) and return the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.param, r.n, _g(r.censoring), _g(r.ae), _g(r.bias), _g(r.mse)])
        text = buf.getvalue()
        if dest is not None:
            Path(dest).write_text(text, encoding="utf-8", newline="")
        return text

    @classmethod
    def read_csv(cls, path) -> "StudyTable":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [
                StudyRow(d["param"], int(d["n"]), float(d["censoring"]), float(d["AE"]), float(d["Bias"]), float(d["MSE"]))
                for d in csv.DictReader(fh)
            ]
        return cls(rows=rows, reps=0)


def _g(v: float) -> str:
    return format(v, ".12g")


def worker_count(requested: int | None = None) -> int:
    """Number of worker processes, capped by ``GMOL_THREADS`` when set."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("GMOL_THREADS")
    if cap:
        try:
            cap_n = int(cap)
        except ValueError:
            raise DomainError(f"GMOL_THREADS must be a positive integer, got {cap!r}") from None
        if cap_n < 1:
            raise DomainError(f"GMOL_THREADS must be a positive integer, got {cap!r}")
        n = min(n, cap_n)
    return max(1, n)


# -- replicate workers (module level so they pickle) ----------------------------


def _iid_replicate(args) -> np.ndarray | None:
    truth, n, seed_seq, opt = args
    rng = np.random.default_rng(seed_seq)
    try:
        x = core.sample(n, truth, rng=rng)
        fit = fit_mle(IidSample(x), SubModel.GMOL, init=truth, cfg=opt, compute_se=False)
    except (GmolError, ValueError, ArithmeticError, np.linalg.LinAlgError):
        return None
    est = np.array(fit.theta_hat.as_tuple())
    return est if fit.converged and np.all(np.isfinite(est)) else None


def simulate_censored_design(zeta: RegParams, n: int, bound: float, rng: np.random.Generator) -> CensoredDesign:
    """Draw one censored regression dataset with a Uniform(0, 1) covariate.

    ``bound`` is the upper limit of the Uniform(0, b) censoring times;
    ``inf`` disables censoring.
    """
    v = rng.random(n)
    V = np.column_stack([np.ones(n), v])
    beta, tau = systematic_components(zeta, V)
    u = rng.random(n)
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    life = core._quantile(u, zeta.alpha, zeta.lam, tau, beta)
    if math.isinf(bound):
        return CensoredDesign(life, np.ones(n, dtype=int), V)
    cens = rng.uniform(0.0, bound, n)
    delta = (life <= cens).astype(int)
    return CensoredDesign(np.minimum(life, cens), delta, V)


def _reg_replicate(args) -> np.ndarray | None:
    truth, n, bound, seed_seq, opt = args
    rng = np.random.default_rng(seed_seq)
    try:
        d = simulate_censored_design(truth, n, bound, rng)
        fit = fit_regression(d, SubModel.GMOL, init=truth, cfg=opt, compute_se=False)
    except (GmolError, ValueError, ArithmeticError, np.linalg.LinAlgError):
        return None
    est = fit.zeta_hat.as_vector()
    return est if fit.converged and np.all(np.isfinite(est)) else None


# -- engine ----------------------------------------------------------------------


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so aggregation does not depend on scheduling
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _aggregate(results, truth_vec, names, n, censoring) -> tuple[list[StudyRow], int]:
    ok = [r for r in results if r is not None]
    failed = len(results) - len(ok)
    if not ok:
        nan = math.nan
        return [StudyRow(p, n, censoring, nan, nan, nan) for p in names], failed
    E = np.vstack(ok)
    ae = E.mean(axis=0)
    mse = ((E - truth_vec) ** 2).mean(axis=0)
    rows = [
        StudyRow(p, n, censoring, float(ae[i]), float(ae[i] - truth_vec[i]), float(mse[i]))
        for i, p in enumerate(names)
    ]
    return rows, failed


def _finish(table: StudyTable) -> StudyTable:
    for msg in table.warnings():
        warnings.warn(msg, StudyWarning, stacklevel=3)
    return table


def run_iid_study(cfg: StudyConfig) -> StudyTable:
    """Recover ``cfg.truth`` from ``cfg.reps`` GMOL samples at each sample size.

    Failed replicates (exceptions, non-convergence, non-finite estimates)
    are excluded and counted; more than 5% failures in a cell triggers a
    :class:`StudyWarning`.
    """
    if not isinstance(cfg.truth, GmolParams):
        raise DomainError("the iid study needs GmolParams as truth")
    truth_vec = np.array(cfg.truth.as_tuple())
    workers = worker_count(cfg.workers)
    cells = np.random.SeedSequence(cfg.seed).spawn(len(cfg.n_list))
    table = StudyTable(rows=[], reps=cfg.reps)
    for n, cell in zip(cfg.n_list, cells):
        jobs = [(cfg.truth, n, s, cfg.opt) for s in cell.spawn(cfg.reps)]
        rows, failed = _aggregate(_map(_iid_replicate, jobs, workers), truth_vec, IID_NAMES, n, 0.0)
        table.rows.extend(rows)
        table.failures[(n, 0.0)] = failed
    return _finish(table)


def _probe_lifetimes(zeta: RegParams, n_probe: int, rng: np.random.Generator) -> np.ndarray:
    return simulate_censored_design(zeta, n_probe, math.inf, rng).x


def _censored_fraction(life: np.ndarray, b: float) -> float:
    # P(C < T | T) = min(T / b, 1) for C ~ Uniform(0, b)
    return float(np.mean(np.minimum(life / b, 1.0)))


def calibrate_censoring_bound(
    target: float,
    zeta: RegParams,
    n_probe: int = 100_000,
    seed: int | np.random.SeedSequence = 0,
) -> float:
    """Upper bound ``b`` of Uniform(0, b) censoring giving the target fraction.

    The expected censoring fraction is estimated on ``n_probe`` lifetimes
    drawn from the regression design and ``b`` is found by bisection on
    ``log b``. A target of 0 returns ``inf`` (no censoring).
    """
    if target == 0.0:
        return math.inf
    if not 0.0 < target < 1.0:
        raise DomainError(f"target must lie in [0, 1), got {target}")
    if n_probe < 100_000:
        raise DomainError("n_probe must be >= 100000")
    life = _probe_lifetimes(zeta, n_probe, np.random.default_rng(seed))
    lo = hi = math.log(float(np.median(life)))
    # the fraction falls as b grows; widen until target is bracketed
    for _ in range(200):
        if _censored_fraction(life, math.exp(lo)) >= target:
            break
        lo -= 1.0
    else:
        raise CalibrationError(f"could not bracket censoring target {target} from below")
    for _ in range(200):
        if _censored_fraction(life, math.exp(hi)) <= target:
            break
        hi += 1.0
    else:
        raise CalibrationError(f"could not bracket censoring target {target} from above")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        frac = _censored_fraction(life, math.exp(mid))
        if abs(frac - target) < 1e-5 or hi - lo < 1e-12:
            break
        if frac > target:
            lo = mid
        else:
            hi = mid
    return math.exp(mid)


def run_regression_study(cfg: StudyConfig) -> StudyTable:
    """Recover a two-coefficient GMOL regression under calibrated censoring.

    Each replicate draws ``v ~ U(0, 1)``, computes the linked ``beta_i`` and
    ``tau_i``, draws lifetimes by inverse transform, censors them with
    ``U(0, b)`` times and refits. ``b`` is calibrated once per target.
    """
    truth = cfg.truth
    if not isinstance(truth, RegParams) or truth.r != 2:
        raise DomainError("the regression study needs RegParams with an intercept and one covariate")
    truth_vec = truth.as_vector()
    workers = worker_count(cfg.workers)
    root = np.random.SeedSequence(cfg.seed)
    probe_seq, rep_seq = root.spawn(2)
    probes = probe_seq.spawn(len(cfg.censor_targets))
    cells = rep_seq.spawn(len(cfg.censor_targets) * len(cfg.n_list))
    table = StudyTable(rows=[], reps=cfg.reps)
    k = 0
    for target, probe in zip(cfg.censor_targets, probes):
        bound = calibrate_censoring_bound(target, truth, cfg.n_probe, probe)
        table.bounds[target] = bound
        for n in cfg.n_list:
            jobs = [(truth, n, bound, s, cfg.opt) for s in cells[k].spawn(cfg.reps)]
            k += 1
            rows, failed = _aggregate(_map(_reg_replicate, jobs, workers), truth_vec, REG_NAMES, n, target)
            table.rows.extend(rows)
            table.failures[(n, target)] = failed
    return _finish(table)
