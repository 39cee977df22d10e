"""Problem definition, constraint systems, step-size schedules and solver configuration."""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg


class ZooAdmmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ZooAdmmError, ValueError):
    pass


class InvalidConfigError(ZooAdmmError, ValueError):
    pass


class ScheduleError(ZooAdmmError):
    pass


class NumericalError(ZooAdmmError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SingularityError(NumericalError):
    """Raised by an oracle when its argument leaves the domain (e.g. loses positive definiteness)."""


class EstimationError(ZooAdmmError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SolverError(ZooAdmmError):
    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


class ReferenceFailureError(ZooAdmmError):
    pass


class DiagnosticUnavailable(ZooAdmmError):
    pass


# ---------------------------------------------------------------------------
# constraint system  A x + B y = c


class InvertibleSide(enum.Enum):
    B_INVERTIBLE = "B"
    A_INVERTIBLE = "A"


@dataclass(frozen=True)
class ConstraintSystem:
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    invertible_side: InvertibleSide = InvertibleSide.B_INVERTIBLE
    _lu: tuple = field(init=False, repr=False, compare=False)
    _cond: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if A.shape[0] != B.shape[0] or A.shape[0] != c.shape[0]:
            raise InvalidInputError(
                f"inconsistent constraint dimensions: A {A.shape}, B {B.shape}, c {c.shape}"
            )
        for name, arr in (("A", A), ("B", B), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} has non-finite entries")
        side = InvertibleSide(self.invertible_side)
        square = B if side is InvertibleSide.B_INVERTIBLE else A
        if square.shape[0] != square.shape[1]:
            raise InvalidInputError(f"{side.value} declared invertible but has shape {square.shape}")
        cond = float(np.linalg.cond(square))
        if not np.isfinite(cond) or cond > 1e14:
            raise NumericalError(f"{side.value} is numerically singular", condition=cond)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "invertible_side", side)
        object.__setattr__(self, "_lu", scipy.linalg.lu_factor(square))
        object.__setattr__(self, "_cond", cond)

    @classmethod
    def consensus(cls, m):
        """The splitting x - y = 0."""
        return cls(np.eye(m), -np.eye(m), np.zeros(m))

    @property
    def l(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.A.shape[1]

    @property
    def d(self):
        return self.B.shape[1]

    @property
    def condition(self):
        return self._cond

    def residual(self, x, y):
        return self.A @ x + self.B @ y - self.c

    def solve_square(self, rhs):
        """Solve with the declared invertible factor."""
        out = scipy.linalg.lu_solve(self._lu, rhs)
        if not np.all(np.isfinite(out)):
            raise NumericalError("solve produced non-finite values", condition=self._cond)
        return out

    def b_scalar(self):
        """Return b if B == b*I, else None."""
        B = self.B
        if B.shape[0] != B.shape[1]:
            return None
        b = B[0, 0]
        if b != 0 and np.array_equal(B, b * np.eye(B.shape[0])):
            return float(b)
        return None


# ---------------------------------------------------------------------------
# loss oracle and regularizer


class LossOracle:
    """Black-box loss ``f(x; w)`` that counts its evaluations.

    ``many`` optionally evaluates a stack of points (rows) for a single token;
    it must agree with ``fn`` row by row. The counter is thread-safe.
    """

    def __init__(self, fn, many=None):
        self._fn = fn
        self._many = many
        self._lock = threading.Lock()
        self._count = 0

    @property
    def query_count(self):
        return self._count

    def _bump(self, k):
        with self._lock:
            self._count += k

    def evaluate(self, x, w):
        self._bump(1)
        return float(self._fn(x, w))

    __call__ = evaluate

    def evaluate_many(self, X, w):
        X = np.atleast_2d(X)
        self._bump(X.shape[0])
        if self._many is not None:
            return np.asarray(self._many(X, w), dtype=float)
        return np.array([float(self._fn(row, w)) for row in X])

    def reset(self):
        with self._lock:
            self._count = 0


@dataclass(frozen=True)
class Regularizer:
    """Convex ``phi`` on a closed convex set Y.

    ``prox(v, weight)`` returns argmin_{y in Y} phi(y) + weight/2 ||y - v||^2.
    ``is_zero`` marks phi == 0 on Y = R^d, which lets the y-step become a plain
    linear solve for a general invertible B.
    """

    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    contains: Callable[[np.ndarray], bool] = lambda y: True
    is_zero: bool = False
    name: str = "phi"


# ---------------------------------------------------------------------------
# schedules


class ScheduleKind(enum.Enum):
    GENERAL = "general"
    STRONGLY_CONVEX = "strongly_convex"
    MINIBATCH = "minibatch"


@dataclass(frozen=True)
class Schedule:
    """Step size eta_t and smoothing beta_t.

    general:          eta_t = C1 / (m sqrt t)
    strongly_convex:  eta_t = alpha / (sigma t)
    minibatch:        eta_t = C1 / (sqrt(1 + m/(q1 q2)) sqrt t)
    all kinds:        beta_t = C2 / (M_mu t),  M_mu = m**1.5 unless given
    """

    kind: ScheduleKind
    m: int
    C1: float = 1.0
    C2: float = 1.0
    sigma: float = 0.0
    alpha: float = 1.0
    q1: int = 1
    q2: int = 1
    M_mu: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.m < 1:
            raise InvalidConfigError("schedule dimension m must be >= 1")
        if self.C2 < 0:
            raise InvalidConfigError("C2 must be nonnegative")
        if self.kind is ScheduleKind.STRONGLY_CONVEX:
            if self.sigma <= 0:
                raise InvalidConfigError("strongly convex schedule needs sigma > 0")
            if self.alpha <= 0:
                raise InvalidConfigError("alpha must be positive")
        elif self.C1 <= 0:
            raise InvalidConfigError("C1 must be positive")
        if self.q1 < 1 or self.q2 < 1:
            raise InvalidConfigError("q1 and q2 must be >= 1")
        if self.M_mu is not None and self.M_mu <= 0:
            raise InvalidConfigError("M_mu must be positive")

    @property
    def moment(self):
        return float(self.m) ** 1.5 if self.M_mu is None else float(self.M_mu)

    def eta(self, t):
        return eta_at(self, t)

    def beta(self, t):
        return beta_at(self, t)


def eta_at(s: Schedule, t: int) -> float:
    if t < 1:
        raise InvalidInputError("t must be >= 1")
    if s.kind is ScheduleKind.GENERAL:
        return s.C1 / (s.m * math.sqrt(t))
    if s.kind is ScheduleKind.STRONGLY_CONVEX:
        if s.sigma <= 0:
            raise InvalidConfigError("strongly convex schedule needs sigma > 0")
        return s.alpha / (s.sigma * t)
    return s.C1 / (math.sqrt(1.0 + s.m / (s.q1 * s.q2)) * math.sqrt(t))


def beta_at(s: Schedule, t: int) -> float:
    if t < 1:
        raise InvalidInputError("t must be >= 1")
    return s.C2 / (s.moment * t)


# ---------------------------------------------------------------------------
# alpha and lambda_max(A^T A)


def lambda_max_gram(A, tol=1e-10) -> float:
    """Largest eigenvalue of A^T A by power iteration on the Gram matrix.

    The iteration cap is 10*max(m, l). When the Rayleigh quotient has not
    settled by then (clustered top spectrum) the value is finished off with a
    dense symmetric eigensolve so the result is always accurate.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise InvalidInputError("A must be nonempty")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("A has non-finite entries")
    l, m = A.shape
    G = A.T @ A
    v = np.ones(m) + np.arange(m) / (10.0 * m)
    v /= np.linalg.norm(v)
    rq = float(v @ G @ v)
    for _ in range(10 * max(m, l)):
        u = G @ v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            break
        v = u / nu
        new = float(v @ G @ v)
        if abs(new - rq) <= tol * max(abs(new), 1e-300):
            return new
        rq = new
    return float(np.linalg.eigvalsh(G)[-1])


def minimal_alpha(rho, eta1, lam_max):
    return rho * eta1 * lam_max + 1.0


def strongly_convex_alpha(rho, sigma, lam_max):
    """Smallest alpha with alpha >= rho*(alpha/sigma)*lam_max + 1.

    Only exists when rho*lam_max < sigma.
    """
    ratio = rho * lam_max / sigma
    if ratio >= 1.0:
        raise InvalidConfigError(
            f"strongly convex schedule needs rho*lambda_max(A^T A) < sigma "
            f"(got {rho}*{lam_max:g} >= {sigma})"
        )
    return 1.0 / (1.0 - ratio)


# ---------------------------------------------------------------------------
# problem and solver configuration


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of  min (1/T) sum_t f(x; w_t) + phi(y)  s.t.  Ax + By = c.

    ``loss`` is the raw per-observation loss, used for metrics without
    touching the query counter; ``oracle`` wraps it for the solver.
    ``project_x`` is the Euclidean projection on X.
    ``gradient`` is only needed by the first-order baseline and the offline
    reference solve. ``reduced_prox(v, step)`` is the prox of phi + I_X for
    the eliminated problem in x (used by the offline reference).
    """

    loss: Callable[[np.ndarray, object], float]
    regularizer: Regularizer
    constraints: ConstraintSystem
    project_x: Callable[[np.ndarray], np.ndarray] = staticmethod(lambda v: v)
    contains_x: Callable[[np.ndarray], bool] = staticmethod(lambda x: True)
    gradient: Optional[Callable[[np.ndarray, object], np.ndarray]] = None
    loss_many: Optional[Callable[[np.ndarray, object], np.ndarray]] = None
    reduced_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    offline_solver: Optional[Callable[[Sequence], np.ndarray]] = None
    name: str = "problem"

    @property
    def m(self):
        return self.constraints.m

    @property
    def d(self):
        return self.constraints.d

    def make_oracle(self):
        return LossOracle(self.loss, self.loss_many)


class Distribution(enum.Enum):
    SPHERE = "sphere"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class SolverConfig:
    rho: float
    alpha: float
    x1: np.ndarray
    y1: np.ndarray
    T: int
    lambda1: Optional[np.ndarray] = None
    seed: int = 0
    distribution: Distribution = Distribution.SPHERE
    store_iterates: bool = False

    def __post_init__(self):
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        object.__setattr__(self, "x1", np.asarray(self.x1, dtype=float).copy())
        object.__setattr__(self, "y1", np.asarray(self.y1, dtype=float).copy())
        if self.rho <= 0:
            raise InvalidConfigError("rho must be positive")
        if self.alpha <= 0:
            raise InvalidConfigError("alpha must be positive")
        if self.T < 1:
            raise InvalidConfigError("T must be >= 1")

    def with_(self, **changes):
        return replace(self, **changes)


def check_alpha(cfg: SolverConfig, cs: ConstraintSystem, sched: Schedule, lam_max=None):
    """Raise unless alpha >= rho*eta_1*lambda_max(A^T A) + 1 (so G_t >= I for all t)."""
    lam = lambda_max_gram(cs.A) if lam_max is None else lam_max
    bound = minimal_alpha(cfg.rho, eta_at(sched, 1), lam)
    if cfg.alpha < bound * (1.0 - 1e-12):
        raise InvalidConfigError(
            f"alpha >= rho*eta_1*lambda_max(A^T A) + 1 violated: "
            f"alpha={cfg.alpha:g} < {cfg.rho:g}*{eta_at(sched, 1):g}*{lam:g} + 1 = {bound:g}"
        )
    if sched.kind is ScheduleKind.STRONGLY_CONVEX and not math.isclose(
        sched.alpha, cfg.alpha, rel_tol=1e-12
    ):
        raise InvalidConfigError("strongly convex schedule alpha must equal the solver alpha")
    return bound


def check_constraint_support(cs: ConstraintSystem, reg: Regularizer):
    """The y-step is solved exactly only for B = b*I, or invertible B with phi == 0."""
    if cs.b_scalar() is not None:
        return
    if reg.is_zero and cs.invertible_side is InvertibleSide.B_INVERTIBLE:
        return
    raise InvalidConfigError(
        "unsupported constraint structure: B must be a nonzero multiple of the identity "
        "(or invertible with a zero regularizer)"
    )


def build_config(
    spec: ProblemSpec,
    sched: Schedule,
    *,
    rho=10.0,
    T,
    x1=None,
    y1=None,
    seed=0,
    distribution=Distribution.SPHERE,
    alpha=None,
    store_iterates=False,
):
    """Assemble a SolverConfig with the smallest admissible alpha unless one is given.

    Returns (config, schedule); for the strongly convex kind the schedule is
    updated to carry the same alpha.
    """
    lam = lambda_max_gram(spec.constraints.A)
    if sched.kind is ScheduleKind.STRONGLY_CONVEX:
        if alpha is None:
            alpha = strongly_convex_alpha(rho, sched.sigma, lam)
        sched = replace(sched, alpha=alpha)
    elif alpha is None:
        alpha = minimal_alpha(rho, eta_at(sched, 1), lam)
    x1 = np.zeros(spec.m) if x1 is None else x1
    y1 = np.zeros(spec.d) if y1 is None else y1
    cfg = SolverConfig(
        rho=rho, alpha=alpha, x1=x1, y1=y1, T=T, seed=seed,
        distribution=distribution, store_iterates=store_iterates,
    )
    check_alpha(cfg, spec.constraints, sched, lam_max=lam)
    return cfg, sched
