"""Sparse Cox regression with an l1 penalty.

Per-subject loss  delta_i * (-a_i^T x + log sum_{j in R_i} exp(a_j^T x)),
risk sets R_i = {j : t_j >= t_i} (ties share risk sets, Breslow style).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import ConstraintSystem, InvalidInputError, ProblemSpec
from ..metrics import fista
from ..prox import l1_regularizer, soft_threshold


@dataclass(frozen=True)
class CoxDataset:
    a: np.ndarray  # n x m covariates
    delta: np.ndarray  # n, 0/1 event indicators
    time: np.ndarray  # n, positive times
    x_true: np.ndarray | None = None
    risk: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        delta = np.asarray(self.delta, dtype=float)
        time = np.asarray(self.time, dtype=float)
        n = a.shape[0]
        if delta.shape != (n,) or time.shape != (n,):
            raise InvalidInputError("inconsistent Cox dataset dimensions")
        if not np.all((delta == 0) | (delta == 1)):
            raise InvalidInputError("event indicators must be 0 or 1")
        if not np.all(time > 0) or not np.all(np.isfinite(a)):
            raise InvalidInputError("times must be positive and covariates finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "risk", time[None, :] >= time[:, None])

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.a.shape[1]

    def risk_set(self, i):
        return np.flatnonzero(self.risk[i])


def make_cox_dataset(seed, n, m, n_nonzero=10, censoring=0.3):
    """Exponential survival times with rate exp(a_i^T x_true), independent exponential censoring."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, m))
    x_true = np.zeros(m)
    support = np.sort(rng.choice(m, size=n_nonzero, replace=False))
    x_true[support] = rng.uniform(0.5, 1.0, n_nonzero) * rng.choice([-1.0, 1.0], n_nonzero)
    event = rng.exponential(1.0, n) / np.exp(a @ x_true)
    if censoring > 0:
        # censoring rate tuned so that roughly the requested fraction is censored
        rate = censoring / (1.0 - censoring) * np.median(np.exp(a @ x_true))
        cens = rng.exponential(1.0 / rate, n)
    else:
        cens = np.full(n, np.inf)
    delta = (event <= cens).astype(float)
    return CoxDataset(a, delta, np.minimum(event, cens), x_true)


def load_cox_csv(path):
    """Read ``id,time,event,x1..xm`` rows (UTF-8, comma separated)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["id", "time", "event"] or len(header) < 4:
            raise InvalidInputError(f"{path}: header must be id,time,event,x1..xm")
        m = len(header) - 3
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != m + 3:
                raise InvalidInputError(f"{path}:{lineno}: expected {m + 3} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
            if vals[1] not in (0.0, 1.0):
                raise InvalidInputError(f"{path}:{lineno}: event must be 0 or 1")
            if not vals[0] > 0:
                raise InvalidInputError(f"{path}:{lineno}: time must be positive")
            rows.append(vals)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    data = np.array(rows)
    return CoxDataset(data[:, 2:], data[:, 1], data[:, 0])


def write_cox_csv(ds: CoxDataset, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "time", "event"] + [f"x{k + 1}" for k in range(ds.m)])
        for i in range(ds.n):
            w.writerow([i + 1, repr(float(ds.time[i])), int(ds.delta[i])]
                       + [repr(float(v)) for v in ds.a[i]])


def _lse(v, axis=-1):
    mx = np.max(v, axis=axis, keepdims=True)
    return (mx + np.log(np.sum(np.exp(v - mx), axis=axis, keepdims=True))).squeeze(axis)


def cox_loss(ds: CoxDataset, x, i):
    if ds.delta[i] == 0:
        return 0.0
    R = ds.risk[i]
    if not R.any():
        raise InvalidInputError(f"empty risk set for subject {i}")
    eta = ds.a[R] @ x
    return float(-ds.a[i] @ x + _lse(eta))


def cox_loss_many(ds: CoxDataset, X, i):
    X = np.atleast_2d(X)
    if ds.delta[i] == 0:
        return np.zeros(X.shape[0])
    E = X @ ds.a[ds.risk[i]].T
    return -X @ ds.a[i] + _lse(E, axis=1)


def cox_grad(ds: CoxDataset, x, i):
    if ds.delta[i] == 0:
        return np.zeros(ds.m)
    aR = ds.a[ds.risk[i]]
    eta = aR @ x
    w = np.exp(eta - eta.max())
    return -ds.a[i] + (w @ aR) / w.sum()


def partial_likelihood(ds: CoxDataset, x):
    """Mean negative log partial likelihood over all subjects."""
    eta = ds.a @ x
    masked = np.where(ds.risk, eta[None, :], -np.inf)
    lse = _lse(masked, axis=1)
    return float(np.mean(ds.delta * (lse - eta)))


def partial_likelihood_grad(ds: CoxDataset, x, weights=None):
    eta = ds.a @ x
    masked = np.where(ds.risk, eta[None, :], -np.inf)
    mx = masked.max(axis=1, keepdims=True)
    P = np.exp(masked - mx)
    P /= P.sum(axis=1, keepdims=True)
    w = np.full(ds.n, 1.0 / ds.n) if weights is None else weights
    coef = w * ds.delta
    return -(coef @ ds.a) + (coef @ P) @ ds.a


def gene_selection(x, tol=1e-6):
    """Indices of coefficients with |x_k| > tol."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    return np.flatnonzero(np.abs(np.asarray(x)) > tol)


def cox_stream(ds: CoxDataset, T, seed=0):
    """Subjects in a fresh random order on every pass, concatenated to length T."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < T:
        out.extend(int(i) for i in rng.permutation(ds.n))
    return out[:T]


def cox_problem(ds: CoxDataset, gamma):
    def offline(stream):
        counts = np.bincount(np.asarray(stream, dtype=np.int64), minlength=ds.n).astype(float)
        weights = counts / counts.sum()

        def value(x):
            eta = ds.a @ x
            masked = np.where(ds.risk, eta[None, :], -np.inf)
            return float(weights @ (ds.delta * (_lse(masked, axis=1) - eta)))

        return fista(lambda x: partial_likelihood_grad(ds, x, weights), value,
                     lambda v, step: soft_threshold(v, gamma * step), np.zeros(ds.m))

    return ProblemSpec(
        loss=lambda x, i: cox_loss(ds, x, i),
        regularizer=l1_regularizer(gamma),
        constraints=ConstraintSystem.consensus(ds.m),
        gradient=lambda x, i: cox_grad(ds, x, i),
        loss_many=lambda X, i: cox_loss_many(ds, X, i),
        reduced_prox=lambda v, step: soft_threshold(v, gamma * step),
        offline_solver=offline,
        name="cox",
    )
