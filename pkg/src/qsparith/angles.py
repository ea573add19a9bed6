"""Phase-angle synthesis and certification.

Schedules are fitted by minimizing the L1 distance between the realized
response and the target on a grid, over the free half of an antisymmetric
schedule (the other half is its mirror, so antisymmetry holds by
construction). The local search is L-BFGS-B with finite-difference gradients
started from uniform draws in [-pi, pi].
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .functions import TargetFunction
from .qsp import PhaseSchedule, qsp_response

__all__ = [
    "OptimizationProblem",
    "OptimizationResult",
    "loss",
    "optimize",
    "CertificationReport",
    "certify",
    "QSPRegressor",
    "check_signal_samples",
]

SMOOTH_EPS = 1e-9
PHASE_CAVEAT = (
    "phase-mode loss: little is known about constraining angles for direct phase targets; "
    "certification is amplitude-mode only"
)


def check_signal_samples(x, name: str = "x") -> np.ndarray:
    """Validate a 1-D array of signal values in [-1, 1]."""
    arr = check_array(np.asarray(x, dtype=float).reshape(-1, 1), ensure_2d=True).ravel()
    if np.any(np.abs(arr) > 1 + 1e-12):
        raise ValueError(f"{name} must lie in [-1, 1]")
    return np.clip(arr, -1.0, 1.0)


def _element(x: np.ndarray, half: np.ndarray, degree: int, end_offset: bool) -> np.ndarray:
    """<0|U|0> for the mirrored schedule, propagated as a vector on a grid."""
    n = degree + 1
    mid = [0.0] if n % 2 else []
    phi = np.concatenate([half, mid, -half[::-1]])
    if end_offset:
        phi = phi.copy()
        phi[0] += math.pi / 2
        phi[-1] += math.pi / 2
    s = np.sqrt(np.clip(1 - x * x, 0, None))
    v0 = np.full(x.shape, np.exp(1j * phi[0]))
    v1 = np.zeros(x.shape, dtype=complex)
    for p in phi[1:]:
        w0 = x * v0 + 1j * s * v1
        w1 = 1j * s * v0 + x * v1
        v0 = w0 * np.exp(1j * p)
        v1 = w1 * np.exp(-1j * p)
    return v0


@dataclass(frozen=True)
class OptimizationProblem:
    """Fit an antisymmetric schedule of a given degree to a target.

    Parameters
    ----------
    target : TargetFunction
    degree : int
        Number of signal-operator applications m (schedule length m + 1).
    grid_size : int
        d; the grid is x_j = lo + (hi - lo) j / d for j = 0..d, with the
        target's excluded bands removed. Must exceed ``degree``.
    loss_kind : {"amplitude", "phase"}
    constraint : {"antisymmetric"}
    seed : int
    end_offset : bool or None
        Whether the fitted schedule carries +pi/2 end offsets. ``None`` tries
        both for every restart.
    """

    target: TargetFunction
    degree: int
    grid_size: int = 200
    loss_kind: str = "amplitude"
    constraint: str = "antisymmetric"
    seed: int = 0
    end_offset: bool | None = None

    def __post_init__(self):
        if not isinstance(self.degree, (int, np.integer)) or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")
        if not self.grid_size > self.degree:
            raise ValueError(f"grid size d={self.grid_size} must exceed the degree {self.degree}")
        if self.loss_kind not in ("amplitude", "phase"):
            raise ValueError(f"loss_kind must be 'amplitude' or 'phase', got {self.loss_kind!r}")
        if self.constraint != "antisymmetric":
            raise ValueError("only the antisymmetric constraint is supported; free schedules cannot be nested")

    def grid(self) -> np.ndarray:
        return self.target.grid(self.grid_size)

    @property
    def n_free(self) -> int:
        return (self.degree + 1) // 2


def _residual(vals: np.ndarray, y: np.ndarray, kind: str) -> np.ndarray:
    if kind == "amplitude":
        return vals.real - y
    return np.angle(vals) - y


def loss(phases: PhaseSchedule, prob: OptimizationProblem) -> float:
    """Exact L1 loss sum_j |response(x_j) - f(x_j)| on the problem grid."""
    if phases.degree != prob.degree:
        raise ValueError(f"schedule degree {phases.degree} does not match problem degree {prob.degree}")
    x = prob.grid()
    y = np.asarray(prob.target(x), dtype=float)
    if prob.loss_kind == "amplitude":
        r = qsp_response(phases, x) - y
    else:
        from .qsp import qsp_matrices

        r = np.angle(qsp_matrices(phases, x)[:, 0, 0]) - y
    return float(np.sum(np.abs(r)))


@dataclass(frozen=True)
class OptimizationResult:
    schedule: PhaseSchedule
    loss: float
    max_error: float
    restart_losses: tuple
    parity_mismatch: bool
    converged: bool
    caveats: tuple = field(default=())

    def summary(self) -> str:
        lines = [
            f"degree={self.schedule.degree} end_offset={int(self.schedule.end_offset)}",
            f"loss={self.loss:.12g} max_error={self.max_error:.6g}",
            f"restarts={len(self.restart_losses)} converged={self.converged}",
        ]
        if self.parity_mismatch:
            lines.append("warning: target parity differs from the parity a schedule of this degree realizes")
        lines += [f"caveat: {c}" for c in self.caveats]
        return "\n".join(lines)


def _fit(x, y, degree, kind, restarts, seed, end_offset, maxiter):
    k = (degree + 1) // 2
    rng = np.random.default_rng(seed)
    starts = rng.uniform(-math.pi, math.pi, size=(restarts, k))
    offsets = (False, True) if end_offset is None else (bool(end_offset),)

    def smooth(h, off):
        r = _residual(_element(x, h, degree, off), y, kind)
        return float(np.sum(np.sqrt(r * r + SMOOTH_EPS**2)))

    def exact(h, off):
        return float(np.sum(np.abs(_residual(_element(x, h, degree, off), y, kind))))

    best = None
    history = []
    for i in range(restarts):
        run_best = None
        for off in offsets:
            res = minimize(smooth, starts[i], args=(off,), method="L-BFGS-B", options={"maxiter": maxiter})
            h = np.array(res.x)
            val = exact(h, off)
            if run_best is None or val < run_best[0]:
                run_best = (val, h, off)
        history.append(run_best[0])
        # strict < keeps the lowest restart index on ties
        if best is None or run_best[0] < best[0]:
            best = run_best
    return best, tuple(history)


def optimize(
    prob: OptimizationProblem, restarts: int = 8, threshold: float | None = None, maxiter: int = 500
) -> OptimizationResult:
    """Best mirrored schedule over ``restarts`` seeded starts.

    Starts are drawn up front from ``numpy.random.default_rng(seed)``, so a
    larger restart count only appends starts and the best loss cannot grow.
    Non-convergence (loss above ``threshold``) is reported, not raised.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    x = prob.grid()
    y = np.asarray(prob.target(x), dtype=float)
    (val, half, off), history = _fit(x, y, prob.degree, prob.loss_kind, restarts, prob.seed, prob.end_offset, maxiter)
    sched = PhaseSchedule.from_half(half, prob.degree, end_offset=off, name=f"fit_{prob.target.name or 'target'}",
                                    meta={"target": prob.target.name,
                                          "domain": f"{prob.target.domain[0]:g},{prob.target.domain[1]:g}"})
    realized = "odd" if prob.degree % 2 else "even"
    mismatch = prob.target.parity is not None and prob.target.parity != realized
    err = float(np.max(np.abs(_residual(_element(x, half, prob.degree, off), y, prob.loss_kind))))
    caveats = (PHASE_CAVEAT,) if prob.loss_kind == "phase" else ()
    converged = threshold is None or val <= threshold
    return OptimizationResult(sched, val, err, history, mismatch, converged, caveats)


@dataclass(frozen=True)
class CertificationReport:
    x: np.ndarray
    response: np.ndarray
    target: np.ndarray

    @property
    def error(self) -> np.ndarray:
        return self.response - self.target

    @property
    def max_err(self) -> float:
        return float(np.max(np.abs(self.error)))

    @property
    def mean_err(self) -> float:
        return float(np.mean(np.abs(self.error)))

    @property
    def l1(self) -> float:
        return float(np.sum(np.abs(self.error)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "response", "target", "error"])
        for row in zip(self.x, self.response, self.target, self.error):
            w.writerow([f"{v:.15e}" for v in row])
        return buf.getvalue()


def certify(phases: PhaseSchedule, target: TargetFunction, grid=None) -> CertificationReport:
    """Pointwise residual of a schedule against a target.

    ``grid`` defaults to 1001 points over the target domain minus its bands.
    """
    x = target.grid(1000) if grid is None else np.asarray(grid, dtype=float)
    lo, hi = target.domain
    if x.size == 0:
        raise ValueError("certification grid is empty")
    if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
        raise ValueError(f"grid leaves the target domain [{lo}, {hi}]")
    return CertificationReport(x, np.asarray(qsp_response(phases, x), dtype=float), np.asarray(target(x), dtype=float))


class QSPRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn estimator fitting an antisymmetric QSP response to samples.

    Parameters
    ----------
    degree : int
    restarts : int
    random_state : int
    end_offset : bool or None
        ``None`` tries both end conventions.
    loss_kind : {"amplitude", "phase"}
    maxiter : int

    Attributes
    ----------
    schedule_ : PhaseSchedule
    loss_ : float
        Exact L1 training loss.
    """

    def __init__(self, degree=5, restarts=8, random_state=0, end_offset=None, loss_kind="amplitude", maxiter=500):
        self.degree = degree
        self.restarts = restarts
        self.random_state = random_state
        self.end_offset = end_offset
        self.loss_kind = loss_kind
        self.maxiter = maxiter

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("QSPRegressor expects a single feature (the signal value)")
        x = check_signal_samples(X[:, 0], "X")
        if not isinstance(self.degree, (int, np.integer)) or self.degree < 1:
            raise ValueError("degree must be a positive integer")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.loss_kind not in ("amplitude", "phase"):
            raise ValueError("loss_kind must be 'amplitude' or 'phase'")
        (val, half, off), _ = _fit(x, np.asarray(y, dtype=float), int(self.degree), self.loss_kind,
                                   int(self.restarts), self.random_state, self.end_offset, self.maxiter)
        self.schedule_ = PhaseSchedule.from_half(half, int(self.degree), end_offset=off)
        self.loss_ = val
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "schedule_")
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError("QSPRegressor expects a single feature (the signal value)")
        x = check_signal_samples(X[:, 0], "X")
        if self.loss_kind == "amplitude":
            return np.asarray(qsp_response(self.schedule_, x))
        half = self.schedule_.free_half()
        return np.angle(_element(x, half, self.schedule_.degree, self.schedule_.end_offset))
