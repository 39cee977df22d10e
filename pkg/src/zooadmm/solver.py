"""Linearized online ADMM driven by zeroth-order or exact gradients."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    ConstraintSystem,
    InvalidConfigError,
    InvalidInputError,
    InvertibleSide,
    NumericalError,
    ProblemSpec,
    Regularizer,
    Schedule,
    ScheduleError,
    SingularityError,
    SolverConfig,
    SolverError,
    ZooAdmmError,
    check_alpha,
    check_constraint_support,
)
from .gradient import DirectionSampler, GradientEstimate, estimate_hybrid, window_tokens

ETA_FLOOR = 1e-15


@dataclass(frozen=True)
class Minibatch:
    """q1 directions per estimate, q2 observations from the sliding window.

    With ``shared_directions`` the same q1 directions serve every observation
    in the window; otherwise each observation gets its own q1 directions.
    """

    q1: int = 1
    q2: int = 1
    shared_directions: bool = True

    def __post_init__(self):
        if self.q1 < 1 or self.q2 < 1:
            raise InvalidConfigError("minibatch sizes must be >= 1")


@dataclass
class SolverState:
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    x_feas: np.ndarray
    y_feas: np.ndarray
    x_bar: np.ndarray
    y_bar: np.ndarray
    t: int = 0


@dataclass
class RunTrace:
    """Per-iteration records; index k holds iteration t = k + 1.

    ``loss`` is f(x_t; w_t) + phi(y'_t) on the feasible pair,
    ``residual`` is ||A x_t + B y_t - c|| for the ADMM iterates and
    ``feasibility`` the same norm for the feasible pair.
    """

    T: int
    loss: np.ndarray
    residual: np.ndarray
    feasibility: np.ndarray
    update_error: np.ndarray
    queries: np.ndarray
    eta: np.ndarray
    beta: np.ndarray
    halvings: np.ndarray
    wall: np.ndarray
    xs: Optional[np.ndarray] = None
    ys: Optional[np.ndarray] = None
    x_feas: Optional[np.ndarray] = None
    y_feas: Optional[np.ndarray] = None
    method: str = "zoo"

    @classmethod
    def empty(cls, T, method):
        z = lambda dtype=float: np.zeros(T, dtype=dtype)
        return cls(T, z(), z(), z(), z(), z(np.int64), z(), z(), z(np.int64), z(), method=method)

    def __len__(self):
        return self.T

    def rows(self):
        for k in range(self.T):
            yield (
                k + 1,
                float(self.loss[k]),
                float(self.residual[k]),
                float(self.update_error[k]),
                int(self.queries[k]),
                float(self.eta[k]),
                float(self.beta[k]),
            )


# ---------------------------------------------------------------------------
# single ADMM steps


def x_update(x, y, lam, g_hat, cs: ConstraintSystem, rho, alpha, eta, project=None):
    """Projection of omega = eta/alpha (-g + A^T(lam - rho(Ax + By - c))) + x on X."""
    r = cs.A @ x + cs.B @ y - cs.c
    omega = (eta / alpha) * (-g_hat + cs.A.T @ (lam - rho * r)) + x
    if project is None:
        return omega
    out = np.asarray(project(omega), dtype=float)
    if out.shape != omega.shape or not np.all(np.isfinite(out)):
        raise SolverError("projection onto X failed")
    return out


def y_update(x_next, lam, cs: ConstraintSystem, reg: Regularizer, rho):
    """argmin_y phi(y) + rho/2 ||A x + B y - c - lam/rho||^2 over Y."""
    b = cs.b_scalar()
    rhs = cs.c - cs.A @ x_next + lam / rho
    if b is not None:
        return np.asarray(reg.prox(rhs / b, rho * b * b), dtype=float)
    if reg.is_zero and cs.invertible_side is InvertibleSide.B_INVERTIBLE:
        return cs.solve_square(rhs)
    raise InvalidConfigError("unsupported constraint structure for the y-step")


def dual_update(lam, x_next, y_next, cs: ConstraintSystem, rho):
    return lam - rho * (cs.A @ x_next + cs.B @ y_next - cs.c)


def feasible_companion(x_next, y_next, cs: ConstraintSystem):
    """Return the exactly feasible pair (x_t, y'_t) or (x'_t, y_t)."""
    try:
        if cs.invertible_side is InvertibleSide.B_INVERTIBLE:
            return x_next, cs.solve_square(cs.c - cs.A @ x_next)
        return cs.solve_square(cs.c - cs.B @ y_next), y_next
    except NumericalError:
        raise
    except Exception as exc:  # LinAlgError and friends
        raise NumericalError(f"companion solve failed: {exc}", condition=cs.condition) from exc


# ---------------------------------------------------------------------------
# run loop


GradientSource = Callable[[int, np.ndarray, float], GradientEstimate]


def _run(spec: ProblemSpec, cfg: SolverConfig, sched: Schedule, stream: Sequence,
         source: GradientSource, method: str):
    cs, reg = spec.constraints, spec.regularizer
    T = cfg.T
    if len(stream) < T:
        raise InvalidInputError(f"stream has {len(stream)} observations, need T={T}")
    x = cfg.x1.copy()
    y = cfg.y1.copy()
    if x.shape != (cs.m,) or y.shape != (cs.d,):
        raise InvalidConfigError("initial point has the wrong dimension")
    if not spec.contains_x(x) or not reg.contains(y):
        raise InvalidConfigError("initial point must satisfy x1 in X and y1 in Y")
    lam = np.zeros(cs.l) if cfg.lambda1 is None else np.asarray(cfg.lambda1, dtype=float).copy()

    trace = RunTrace.empty(T, method)
    if cfg.store_iterates:
        trace.xs = np.empty((T + 1, cs.m))
        trace.ys = np.empty((T + 1, cs.d))
        trace.x_feas = np.empty((T + 1, cs.m))
        trace.y_feas = np.empty((T + 1, cs.d))

    xf, yf = feasible_companion(x, y, cs)
    x_bar = np.zeros(cs.m)
    y_bar = np.zeros(cs.d)
    queries = 0
    for t in range(1, T + 1):
        tic = time.perf_counter()
        k = t - 1
        eta = sched.eta(t)
        if eta < ETA_FLOOR:
            raise ScheduleError(f"iteration {t}: step size underflow (eta={eta:g})")
        beta = sched.beta(t)
        w = stream[k]
        try:
            loss = spec.loss(xf, w) + reg.value(yf)
        except SingularityError:
            loss = np.inf
        if cfg.store_iterates:
            trace.xs[k], trace.ys[k], trace.x_feas[k], trace.y_feas[k] = x, y, xf, yf
        trace.loss[k] = loss
        trace.residual[k] = np.linalg.norm(cs.residual(x, y))
        trace.feasibility[k] = np.linalg.norm(cs.residual(xf, yf))

        try:
            est = source(t, x, beta)
            x_new = x_update(x, y, lam, est.g_hat, cs, cfg.rho, cfg.alpha, eta, spec.project_x)
            y_new = y_update(x_new, lam, cs, reg, cfg.rho)
            lam = dual_update(lam, x_new, y_new, cs, cfg.rho)
            xf, yf = feasible_companion(x_new, y_new, cs)
        except SolverError as exc:
            raise SolverError(str(exc), iteration=t) from exc
        except ZooAdmmError as exc:
            raise SolverError(f"{type(exc).__name__}: {exc}", iteration=t) from exc

        # running averages of the post-update feasible pair
        if cs.invertible_side is InvertibleSide.B_INVERTIBLE:
            x_bar += (x_new - x_bar) / t
            y_bar += (yf - y_bar) / t
        else:
            x_bar += (xf - x_bar) / t
            y_bar += (y_new - y_bar) / t

        queries += est.queries_used
        trace.update_error[k] = np.linalg.norm(x_new - x)
        trace.queries[k] = queries
        trace.eta[k] = eta
        trace.beta[k] = est.beta_used
        trace.halvings[k] = est.halvings
        x, y = x_new, y_new
        trace.wall[k] = time.perf_counter() - tic

    if cfg.store_iterates:
        trace.xs[T], trace.ys[T], trace.x_feas[T], trace.y_feas[T] = x, y, xf, yf
    state = SolverState(x, y, lam, xf, yf, x_bar, y_bar, T)
    return state, trace


def _validate(spec, cfg, sched):
    check_constraint_support(spec.constraints, spec.regularizer)
    check_alpha(cfg, spec.constraints, sched)


def run_zoo_admm(spec: ProblemSpec, cfg: SolverConfig, sched: Schedule, stream: Sequence,
                 batch: Minibatch = Minibatch(), oracle=None):
    """Zeroth-order online ADMM.

    Each iteration draws q1 directions, estimates the gradient from the
    sliding window of the last q2 observations, then performs the linearized
    x-step, the y-step, the dual step and the feasible-companion solve.
    """
    _validate(spec, cfg, sched)
    if sched.C2 <= 0:
        raise InvalidConfigError("zeroth-order runs need C2 > 0 (beta_t > 0)")
    oracle = spec.make_oracle() if oracle is None else oracle
    sampler = DirectionSampler(cfg.distribution, spec.m, seed=cfg.seed)

    def source(t, x, beta):
        ws = window_tokens(stream, t, batch.q2)
        if batch.shared_directions:
            Z = sampler.sample_many(batch.q1)
        else:
            Z = sampler.sample_many(batch.q1 * len(ws)).reshape(len(ws), batch.q1, spec.m)
        return estimate_hybrid(oracle, x, ws, beta, Z)

    return _run(spec, cfg, sched, stream, source, "zoo")


def run_oadmm(spec: ProblemSpec, cfg: SolverConfig, sched: Schedule, stream: Sequence):
    """First-order baseline: the same loop with the exact gradient of f(.; w_t)."""
    if spec.gradient is None:
        raise InvalidConfigError("first-order baseline needs an analytic gradient")
    _validate(spec, cfg, sched)

    def source(t, x, beta):
        g = np.asarray(spec.gradient(x, stream[t - 1]), dtype=float)
        if not np.all(np.isfinite(g)):
            raise SolverError("gradient is not finite")
        return GradientEstimate(g, 1, 0.0)

    return _run(spec, cfg, sched, stream, source, "oadmm")
