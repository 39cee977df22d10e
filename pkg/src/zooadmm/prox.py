"""Closed-form projections and proximal maps used by the applications."""

import numpy as np

from .core import InvalidInputError, Regularizer


def project_box(v, lo, hi):
    """Euclidean projection of ``v`` on the box [lo, hi]^m."""
    if not lo < hi:
        raise InvalidInputError(f"empty box: lo={lo} >= hi={hi}")
    return np.clip(np.asarray(v, dtype=float), lo, hi)


def project_sum_hyperplane(v, m0):
    """Projection on {y : 1^T y = m0}."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise InvalidInputError("empty vector")
    return v + (m0 - v.sum()) / v.size


def soft_threshold(d, kappa):
    """argmin_y  kappa*||y||_1 + 1/2 ||y - d||^2 (two-sided)."""
    if kappa <= 0:
        raise InvalidInputError("kappa must be positive")
    d = np.asarray(d, dtype=float)
    return np.sign(d) * np.maximum(np.abs(d) - kappa, 0.0)


def project_capped_simplex(v, m0, lo=0.0, hi=1.0, tol=1e-14, max_iter=200):
    """Projection on {lo <= x <= hi, 1^T x = m0} by bisection on the shift."""
    v = np.asarray(v, dtype=float)
    n = v.size
    if not lo * n <= m0 <= hi * n:
        raise InvalidInputError(f"budget {m0} outside [{lo * n}, {hi * n}]")
    a, b = lo - v.max(), hi - v.min()
    for _ in range(max_iter):
        s = 0.5 * (a + b)
        total = np.clip(v + s, lo, hi).sum()
        if total < m0:
            a = s
        else:
            b = s
        if b - a <= tol * max(1.0, abs(s)):
            break
    return np.clip(v + 0.5 * (a + b), lo, hi)


# regularizers -----------------------------------------------------------------


def zero_regularizer():
    return Regularizer(
        value=lambda y: 0.0,
        prox=lambda v, weight: np.asarray(v, dtype=float).copy(),
        is_zero=True,
        name="zero",
    )


def l1_regularizer(gamma):
    if gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    return Regularizer(
        value=lambda y: gamma * float(np.abs(y).sum()),
        prox=lambda v, weight: soft_threshold(v, gamma / weight),
        name=f"l1({gamma:g})",
    )


def hyperplane_indicator(m0, tol=1e-9):
    """Indicator of {1^T y = m0}: 0 on the set, +inf off it."""

    def contains(y):
        return abs(float(np.sum(y)) - m0) <= tol * max(1.0, abs(m0))

    return Regularizer(
        value=lambda y: 0.0 if contains(y) else np.inf,
        prox=lambda v, weight: project_sum_hyperplane(v, m0),
        contains=contains,
        name=f"sum=={m0:g}",
    )


def box_contains(lo, hi, tol=1e-9):
    return lambda x: bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))
