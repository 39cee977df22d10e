"""Black-box linear blending of model predictions.

The loss of one rating is ``([C]_i^T x - r_i)^2``; the solver only sees its
values. Data are synthetic: predictions C ~ N(0, 1) and ratings
r = C x_true + noise with a configurable fraction of active models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConstraintSystem, InvalidInputError, ProblemSpec
from ..prox import zero_regularizer


@dataclass(frozen=True)
class BlendingInstance:
    C_train: np.ndarray
    r_train: np.ndarray
    C_test: np.ndarray
    r_test: np.ndarray
    x_true: np.ndarray

    def __post_init__(self):
        n, m = self.C_train.shape
        if self.r_train.shape != (n,) or self.C_test.shape[1] != m or \
                self.r_test.shape != (self.C_test.shape[0],) or self.x_true.shape != (m,):
            raise InvalidInputError("inconsistent blending dimensions")

    @property
    def m(self):
        return self.C_train.shape[1]

    @property
    def n(self):
        return self.C_train.shape[0]


def make_blending_instance(seed, n, m, noise=0.1, sparsity=1.0):
    """2n synthetic ratings split evenly into train and test halves."""
    rng = np.random.default_rng(seed)
    x_true = rng.uniform(0.0, 1.0, m) / m
    k = max(1, int(round(sparsity * m)))
    if k < m:
        off = rng.choice(m, size=m - k, replace=False)
        x_true[off] = 0.0
    C = rng.standard_normal((2 * n, m))
    r = C @ x_true + noise * rng.standard_normal(2 * n)
    return BlendingInstance(C[:n], r[:n], C[n:], r[n:], x_true)


def blending_loss(inst: BlendingInstance, x, i):
    e = inst.C_train[i] @ x - inst.r_train[i]
    return float(e * e)


def blending_grad(inst: BlendingInstance, x, i):
    return 2.0 * (inst.C_train[i] @ x - inst.r_train[i]) * inst.C_train[i]


def rmse(C_test, r_test, x):
    res = r_test - C_test @ x
    return float(np.sqrt(res @ res / len(r_test)))


def least_squares(inst: BlendingInstance, stream=None):
    """Offline optimum of the mean training loss via the normal equations."""
    idx = np.arange(inst.n) if stream is None else np.asarray(stream, dtype=np.int64)
    C = inst.C_train[idx]
    r = inst.r_train[idx]
    return np.linalg.solve(C.T @ C, C.T @ r)


def blending_stream(inst: BlendingInstance, T, seed=None):
    """Training rows in order, cycled (or reshuffled per pass when seeded) to length T."""
    rng = None if seed is None else np.random.default_rng(seed)
    out = []
    while len(out) < T:
        block = np.arange(inst.n) if rng is None else rng.permutation(inst.n)
        out.extend(int(i) for i in block)
    return out[:T]


def blending_problem(inst: BlendingInstance):
    C, r = inst.C_train, inst.r_train

    def loss_many(X, i):
        e = X @ C[i] - r[i]
        return e * e

    return ProblemSpec(
        loss=lambda x, i: blending_loss(inst, x, i),
        regularizer=zero_regularizer(),
        constraints=ConstraintSystem.consensus(inst.m),
        gradient=lambda x, i: blending_grad(inst, x, i),
        loss_many=loss_many,
        reduced_prox=lambda v, step: np.asarray(v, dtype=float),
        offline_solver=lambda stream: least_squares(inst, stream),
        name="blend",
    )
