"""Average regret against the best offline pair, offline references and rate diagnostics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    DiagnosticUnavailable,
    InvalidInputError,
    InvertibleSide,
    ProblemSpec,
    ReferenceFailureError,
)

DEFAULT_CHECKPOINTS = (100, 1000, 10_000, 100_000, 1_000_000)


@dataclass
class RegretReport:
    T: int
    average_regret: float
    checkpoints: dict = field(default_factory=dict)
    loglog_slope: float = float("nan")


@dataclass
class OfflineOptimum:
    x: np.ndarray
    y: np.ndarray
    value: float


# ---------------------------------------------------------------------------
# composite first-order solver for the offline reference


def fista(grad, value, prox, x0, L0=1.0, tol=1e-10, max_iter=200_000):
    """Accelerated proximal gradient with backtracking and adaptive restart.

    Stops when the gradient mapping L*(x - prox(x - grad/L, 1/L)) has norm
    <= tol. ``prox(v, step)`` solves min_x h(x) + 1/(2 step) ||x - v||^2.
    Raises ReferenceFailureError if the cap is reached.
    """
    x = np.asarray(x0, dtype=float).copy()
    z = x.copy()
    tk = 1.0
    L = float(L0)
    for _ in range(max_iter):
        gz = grad(z)
        fz = value(z)
        while True:
            x_new = prox(z - gz / L, 1.0 / L)
            diff = x_new - z
            if value(x_new) <= fz + gz @ diff + 0.5 * L * (diff @ diff) + 1e-15 * abs(fz):
                break
            L *= 2.0
        gx = grad(x_new)
        mapping = L * (x_new - prox(x_new - gx / L, 1.0 / L))
        if np.linalg.norm(mapping) <= tol:
            return x_new
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        if (z - x_new) @ (x_new - x) > 0:  # restart on non-monotone momentum
            t_new, tk = 1.0, 1.0
            z = x_new.copy()
        else:
            z = x_new + ((tk - 1.0) / t_new) * (x_new - x)
        x, tk = x_new, t_new
    raise ReferenceFailureError(f"offline reference did not converge in {max_iter} iterations")


def _counted(stream):
    counts = Counter(stream)
    tokens = sorted(counts, key=lambda w: (str(type(w)), w))
    weights = np.array([counts[w] for w in tokens], dtype=float)
    return tokens, weights / weights.sum()


def offline_optimum(spec: ProblemSpec, stream: Sequence, x0=None, tol=1e-10, max_iter=200_000):
    """Best fixed feasible pair for the whole stream.

    Uses the problem's own ``offline_solver`` when it has one (normal
    equations, sufficient statistics); otherwise a deterministic FISTA run on
    the stream-averaged loss with the problem's analytic gradient.
    """
    stream = list(stream)
    if not stream:
        raise InvalidInputError("empty stream")
    cs = spec.constraints
    if spec.offline_solver is not None:
        x = np.asarray(spec.offline_solver(stream), dtype=float)
    else:
        if spec.gradient is None or spec.reduced_prox is None:
            raise InvalidInputError("problem has no gradient/reduced prox for an offline solve")
        tokens, weights = _counted(stream)

        def grad(x):
            g = np.zeros_like(x)
            for w, p in zip(tokens, weights):
                g += p * np.asarray(spec.gradient(x, w))
            return g

        def value(x):
            return float(sum(p * spec.loss(x, w) for w, p in zip(tokens, weights)))

        start = np.zeros(spec.m) if x0 is None else x0
        start = spec.reduced_prox(start, 1.0)
        x = fista(grad, value, spec.reduced_prox, start, tol=tol, max_iter=max_iter)
    if cs.invertible_side is InvertibleSide.B_INVERTIBLE:
        y = cs.solve_square(cs.c - cs.A @ x)
    else:
        y = x
        x = cs.solve_square(cs.c - cs.B @ y)
    res = np.linalg.norm(cs.residual(x, y))
    if res > 1e-10 * max(1.0, np.linalg.norm(cs.c)):
        raise ReferenceFailureError(f"offline pair infeasible (residual {res:.3g})")
    value = comparator_average(spec, stream, x, y)
    return OfflineOptimum(x, y, value)


def comparator_average(spec, stream, x_star, y_star):
    """(1/T) sum_t f(x*; w_t) + phi(y*)."""
    tokens, weights = _counted(stream)
    fbar = sum(p * spec.loss(x_star, w) for w, p in zip(tokens, weights))
    return float(fbar + spec.regularizer.value(y_star))


# ---------------------------------------------------------------------------
# regret


def average_regret(trace, spec: ProblemSpec, stream: Sequence, x_star, y_star, upto=None):
    """(1/t) sum_{k<=t} [f(x_k; w_k) + phi(y'_k)] - (1/t) sum_{k<=t} [f(x*; w_k) + phi(y*)]."""
    T = len(trace) if upto is None else int(upto)
    if T < 1 or T > len(trace):
        raise InvalidInputError(f"checkpoint {T} outside the trace (length {len(trace)})")
    if len(stream) < T:
        raise InvalidInputError("stream shorter than the trace")
    online = float(np.mean(trace.loss[:T]))
    return online - comparator_average(spec, list(stream[:T]), x_star, y_star)


def regret_report(trace, spec, stream, checkpoints=DEFAULT_CHECKPOINTS, optima=None):
    """Regret at each checkpoint against the offline optimum of the first t observations."""
    optima = {} if optima is None else optima
    T = len(trace)
    cps = [t for t in checkpoints if t <= T]
    values = {}
    for t in cps:
        if t not in optima:
            optima[t] = offline_optimum(spec, stream[:t])
        opt = optima[t]
        values[t] = average_regret(trace, spec, stream, opt.x, opt.y, upto=t)
    if T not in optima:
        optima[T] = offline_optimum(spec, stream[:T])
    total = average_regret(trace, spec, stream, optima[T].x, optima[T].y)
    try:
        slope = loglog_slope(sorted(values.items()))
    except DiagnosticUnavailable:
        slope = float("nan")
    return RegretReport(T, total, values, slope)


def loglog_slope(checkpoints) -> float:
    """Least-squares slope of log(regret) against log(t); non-positive regrets are dropped."""
    pts = [(float(t), float(r)) for t, r in checkpoints if r > 0 and np.isfinite(r) and t > 0]
    if len(pts) < 3:
        raise DiagnosticUnavailable(f"need >= 3 positive checkpoints, have {len(pts)}")
    lt = np.log([p[0] for p in pts])
    lr = np.log([p[1] for p in pts])
    slope, _ = np.polyfit(lt, lr, 1)
    return float(slope)


def seed_mean(values):
    """Mean and standard error over seeds."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise InvalidInputError("no values")
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
    return float(v.mean()), se
