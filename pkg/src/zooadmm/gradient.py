"""Two-point random gradient estimators and their direction samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Distribution, EstimationError, InvalidInputError, SingularityError

MAX_HALVINGS = 30


class DirectionSampler:
    """Draws z with E[z z^T] = I.

    ``sphere``: uniform on the sphere of radius sqrt(m), so ||z|| = sqrt(m).
    ``gaussian``: z ~ N(0, I_m).
    """

    def __init__(self, distribution, m, seed=None):
        if m < 1:
            raise InvalidInputError("dimension must be >= 1")
        self.distribution = Distribution(distribution)
        self.m = int(m)
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def sample(self):
        return self.sample_many(1)[0]

    def sample_many(self, q):
        Z = self.rng.standard_normal((q, self.m))
        if self.distribution is Distribution.SPHERE:
            if self.m == 1:
                return np.sign(Z) + (Z == 0)  # the 0-sphere {-1, +1}
            Z /= np.linalg.norm(Z, axis=1, keepdims=True) / np.sqrt(self.m)
        return Z


def sample_direction(sampler: DirectionSampler) -> np.ndarray:
    return sampler.sample()


@dataclass
class GradientEstimate:
    g_hat: np.ndarray
    queries_used: int
    beta_used: float
    halvings: int = 0


def _check_finite(value, point):
    if not np.all(np.isfinite(value)):
        raise EstimationError(f"oracle returned a non-finite value ({value!r})", point=point)


def estimate_hybrid(oracle, x, ws, beta, directions, max_halvings=MAX_HALVINGS):
    """Double average over q1 directions and q2 observations.

    g = 1/(q1 q2) sum_j sum_i (f(x + beta z_j; w_i) - f(x; w_i)) / beta * z_j

    ``directions`` is either q1 x m (the same directions for every
    observation) or q2 x q1 x m (independent directions per observation).
    f(x; w_i) is evaluated once per observation, so a clean call costs
    q2*(q1 + 1) queries. If the oracle raises ``SingularityError`` at a
    perturbed point, beta is halved and the perturbed evaluations repeated
    (at most ``max_halvings`` times).
    """
    x = np.asarray(x, dtype=float)
    ws = list(ws)
    if not ws:
        raise InvalidInputError("empty observation window")
    if not beta > 0:
        raise InvalidInputError("beta must be positive")
    Z = np.asarray(directions, dtype=float)
    shared = Z.ndim < 3
    if shared:
        Z = np.atleast_2d(Z)
        per_obs = [Z] * len(ws)
    else:
        if Z.shape[0] != len(ws):
            raise InvalidInputError(f"{Z.shape[0]} direction blocks for {len(ws)} observations")
        per_obs = list(Z)
    q1, q2 = per_obs[0].shape[0], len(ws)

    base = np.empty(q2)
    queries = 0
    for i, w in enumerate(ws):
        queries += 1
        try:
            base[i] = oracle.evaluate(x, w)
        except SingularityError as exc:
            raise EstimationError(f"oracle undefined at the current iterate: {exc}", point=x) from exc
        _check_finite(base[i], x)

    b = float(beta)
    halvings = 0
    while True:
        coef = np.zeros((q2, q1))
        try:
            for i, w in enumerate(ws):
                P = x + b * per_obs[i]
                queries += q1
                vals = oracle.evaluate_many(P, w)
                if not np.all(np.isfinite(vals)):
                    bad = int(np.flatnonzero(~np.isfinite(vals))[0])
                    _check_finite(vals[bad], P[bad])
                coef[i] = (vals - base[i]) / b
            break
        except SingularityError:
            halvings += 1
            if halvings > max_halvings:
                raise EstimationError(
                    f"perturbed point still singular after {max_halvings} halvings of beta", point=x
                ) from None
            b *= 0.5
    coef /= q1 * q2
    # index-ascending accumulation
    if shared:
        g = np.cumsum(np.cumsum(coef, axis=0)[-1][:, None] * per_obs[0], axis=0)[-1]
    else:
        g = np.cumsum((coef[:, :, None] * Z).reshape(-1, x.size), axis=0)[-1]
    return GradientEstimate(g, queries, b, halvings)


def estimate_single(oracle, x, w, beta, z):
    """g = (f(x + beta z; w) - f(x; w)) / beta * z  (two queries)."""
    return estimate_hybrid(oracle, x, [w], beta, np.atleast_2d(z))


def estimate_avg_directions(oracle, x, w, beta, directions):
    return estimate_hybrid(oracle, x, [w], beta, directions)


def estimate_avg_observations(oracle, x, ws, beta, z):
    return estimate_hybrid(oracle, x, ws, beta, np.atleast_2d(z))


def window_tokens(stream, t, q):
    """Sliding window w_{t,i} = w_{t-i+1}, i = 1..q, truncated at the stream start (t is 1-based)."""
    if q < 1:
        raise InvalidInputError("window length must be >= 1")
    lo = max(0, t - q)
    return [stream[k] for k in range(t - 1, lo - 1, -1)]
