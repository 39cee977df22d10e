"""Sensor selection by the relaxed log-det criterion.

    min_x (1/T) sum_t -logdet(sum_i x_i a_{i,t} a_{i,t}^T)
    s.t.  0 <= x <= 1,  1^T x = m0

split as x in the box and y on the hyperplane with x - y = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConstraintSystem, InvalidInputError, ProblemSpec, SingularityError
from ..prox import box_contains, hyperplane_indicator, project_box, project_capped_simplex


@dataclass(frozen=True)
class SensorFieldInstance:
    sensor_positions: np.ndarray  # m x 2
    target_positions: np.ndarray  # n x 2
    mu: np.ndarray  # m
    a_stream: np.ndarray  # T x m x n
    m0: int

    @property
    def m(self):
        return self.mu.shape[0]

    @property
    def n(self):
        return self.target_positions.shape[0]

    @property
    def T(self):
        return self.a_stream.shape[0]


def field_intensities(sensor_positions, target_positions):
    """mu_i = 5 exp(mean_j ||s_j - s_i||)."""
    dist = np.linalg.norm(target_positions[None, :, :] - sensor_positions[:, None, :], axis=2)
    return 5.0 * np.exp(dist.mean(axis=1))


def make_sensor_instance(seed, m, n, T, m0):
    if not 0 < m0 <= m:
        raise InvalidInputError(f"budget m0={m0} must be in 1..{m}")
    rng = np.random.default_rng(seed)
    sensors = rng.uniform(0.0, 1.0, (m, 2))
    targets = rng.uniform(0.0, 1.0, (n, 2))
    mu = field_intensities(sensors, targets)
    a = mu[None, :, None] + rng.standard_normal((T, m, n))
    return SensorFieldInstance(sensors, targets, mu, a, int(m0))


def _cholesky(S):
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("information matrix is not positive definite") from exc


def logdet_loss(x, a):
    """-logdet(sum_i x_i a_i a_i^T) for the m x n coefficient matrix ``a``."""
    S = (a * np.asarray(x)[:, None]).T @ a
    L = _cholesky(S)
    return -2.0 * float(np.log(np.diagonal(L)).sum())


def logdet_loss_many(X, a):
    S = np.einsum("ki,ij,il->kjl", X, a, a)
    L = _cholesky(S)
    return -2.0 * np.log(np.diagonal(L, axis1=1, axis2=2)).sum(axis=1)


def logdet_grad(x, a):
    """d/dx_i = -a_i^T S^{-1} a_i."""
    S = (a * np.asarray(x)[:, None]).T @ a
    L = _cholesky(S)
    V = np.linalg.solve(L, a.T)
    return -np.einsum("ji,ji->i", V, V)


def sensor_problem(inst: SensorFieldInstance):
    a = inst.a_stream
    m0 = inst.m0
    return ProblemSpec(
        loss=lambda x, t: logdet_loss(x, a[t]),
        regularizer=hyperplane_indicator(m0),
        constraints=ConstraintSystem.consensus(inst.m),
        project_x=lambda v: project_box(v, 0.0, 1.0),
        contains_x=box_contains(0.0, 1.0),
        gradient=lambda x, t: logdet_grad(x, a[t]),
        loss_many=lambda X, t: logdet_loss_many(X, a[t]),
        reduced_prox=lambda v, step: project_capped_simplex(v, m0),
        name="sensors",
    )


def initial_point(inst: SensorFieldInstance):
    """Uniform relaxed selection m0/m: inside the box, on the hyperplane, log-det finite."""
    return np.full(inst.m, inst.m0 / inst.m)


def round_selection(x_relaxed, m0):
    """Top-m0 entries (ties go to the lowest index) as a Boolean mask."""
    x = np.asarray(x_relaxed, dtype=float)
    order = np.argsort(-x, kind="stable")
    sel = np.zeros(x.size, dtype=bool)
    sel[order[:m0]] = True
    return sel


@dataclass(frozen=True)
class ValidationDraw:
    coeffs: np.ndarray  # snapshots x m x n
    theta: np.ndarray  # n
    noise: np.ndarray  # snapshots x m


def make_validation_draws(inst: SensorFieldInstance, n_draws, seed, snapshots=1, noise_std=1.0):
    """Fresh sensor coefficients, a true field theta ~ N(0, I) and measurement noise per draw."""
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(n_draws):
        coeffs = inst.mu[None, :, None] + rng.standard_normal((snapshots, inst.m, inst.n))
        theta = rng.standard_normal(inst.n)
        noise = noise_std * rng.standard_normal((snapshots, inst.m))
        draws.append(ValidationDraw(coeffs, theta, noise))
    return draws


def sensor_mse(selection, draws):
    """Mean squared error of the least-squares field estimate from the selected sensors.

    A draw whose selected design is rank deficient contributes +inf.
    """
    sel = np.asarray(selection, dtype=bool)
    errs = []
    for d in draws:
        rows = d.coeffs[:, sel, :].reshape(-1, d.theta.size)
        obs = rows @ d.theta + d.noise[:, sel].reshape(-1)
        est, _, rank, _ = np.linalg.lstsq(rows, obs, rcond=None)
        if rank < d.theta.size:
            errs.append(np.inf)
        else:
            e = est - d.theta
            errs.append(float(e @ e) / d.theta.size)
    return float(np.mean(errs))
