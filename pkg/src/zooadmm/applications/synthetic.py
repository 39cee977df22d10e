"""Synthetic streaming instances for regret studies.

Two families:

* linear regression stream  f(x; k) = 1/2 (a_k^T x - r_k)^2, optionally with
  an l1 regularizer and a box constraint;
* centered quadratic stream f(x; k) = 1/2 ||x - b_k||^2 (1-strongly convex).

Observation tokens are row indices into the generated data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConstraintSystem, ProblemSpec, check_constraint_support
from ..metrics import fista
from ..prox import box_contains, l1_regularizer, soft_threshold, zero_regularizer


@dataclass(frozen=True)
class LinearStream:
    a: np.ndarray
    r: np.ndarray
    x_true: np.ndarray

    @property
    def m(self):
        return self.a.shape[1]

    def __len__(self):
        return self.a.shape[0]


def make_linear_stream(seed, m, n, noise=0.5, n_nonzero=None):
    rng = np.random.default_rng(seed)
    k = m if n_nonzero is None else int(n_nonzero)
    x_true = np.zeros(m)
    support = rng.choice(m, size=k, replace=False)
    x_true[np.sort(support)] = rng.uniform(0.5, 1.5, k) * rng.choice([-1.0, 1.0], k)
    a = rng.standard_normal((n, m))
    r = a @ x_true + noise * rng.standard_normal(n)
    return LinearStream(a, r, x_true)


def linear_problem(data: LinearStream, gamma=0.0, box=None, constraints=None):
    """Streaming least squares, with gamma*||y||_1 and X = [-box, box]^m when given."""
    a, r = data.a, data.r
    m = data.m
    cs = ConstraintSystem.consensus(m) if constraints is None else constraints
    reg = l1_regularizer(gamma) if gamma > 0 else zero_regularizer()
    check_constraint_support(cs, reg)

    def loss(x, k):
        e = a[k] @ x - r[k]
        return 0.5 * e * e

    def loss_many(X, k):
        e = X @ a[k] - r[k]
        return 0.5 * e * e

    def grad(x, k):
        return (a[k] @ x - r[k]) * a[k]

    if box is None:
        project = lambda v: v
        contains = lambda x: True
    else:
        project = lambda v: np.clip(v, -box, box)
        contains = box_contains(-box, box)

    def reduced_prox(v, step):
        out = soft_threshold(v, gamma * step) if gamma > 0 else np.asarray(v, dtype=float)
        return project(out)

    def offline(stream):
        idx = np.asarray(stream, dtype=np.int64)
        S = a[idx]
        H = S.T @ S / len(idx)
        b = S.T @ r[idx] / len(idx)
        if gamma == 0 and box is None:
            return np.linalg.solve(H, b)
        L = float(np.linalg.eigvalsh(H)[-1])
        return fista(lambda x: H @ x - b, lambda x: 0.5 * x @ H @ x - b @ x,
                     reduced_prox, np.zeros(m), L0=L)

    # with a general B, phi == 0 and y is eliminated, so the reduced problem is the same
    return ProblemSpec(
        loss=loss, regularizer=reg, constraints=cs, project_x=project, contains_x=contains,
        gradient=grad, loss_many=loss_many, reduced_prox=reduced_prox,
        offline_solver=offline, name="linear",
    )


@dataclass(frozen=True)
class CenterStream:
    b: np.ndarray
    center: np.ndarray

    @property
    def m(self):
        return self.b.shape[1]

    def __len__(self):
        return self.b.shape[0]


def make_center_stream(seed, m, n, noise=1.0):
    rng = np.random.default_rng(seed)
    center = rng.uniform(-1.0, 1.0, m)
    return CenterStream(center + noise * rng.standard_normal((n, m)), center)


def center_problem(data: CenterStream):
    """f(x; k) = 1/2 ||x - b_k||^2, phi = 0, x - y = 0."""
    b = data.b
    m = data.m

    def loss(x, k):
        e = x - b[k]
        return 0.5 * float(e @ e)

    def loss_many(X, k):
        E = X - b[k]
        return 0.5 * np.einsum("ij,ij->i", E, E)

    return ProblemSpec(
        loss=loss, regularizer=zero_regularizer(), constraints=ConstraintSystem.consensus(m),
        gradient=lambda x, k: x - b[k], loss_many=loss_many,
        reduced_prox=lambda v, step: np.asarray(v, dtype=float),
        offline_solver=lambda stream: b[np.asarray(stream, dtype=np.int64)].mean(axis=0),
        name="center",
    )


def random_constraints(seed, m, l=None):
    """Random A (l x m) and a well-conditioned random invertible B (l x l), random c."""
    rng = np.random.default_rng(seed)
    l = m if l is None else l
    A = rng.standard_normal((l, m))
    Q, _ = np.linalg.qr(rng.standard_normal((l, l)))
    R, _ = np.linalg.qr(rng.standard_normal((l, l)))
    B = Q @ np.diag(rng.uniform(1.0, 3.0, l)) @ R
    c = rng.standard_normal(l)
    return ConstraintSystem(A, B, c)
