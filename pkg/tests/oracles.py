"""Reference implementations used only by the tests.

Each one is written independently of the package code it checks: dense
linear algebra instead of power iteration, explicit loops instead of
vectorized sums, generic scalar minimizers instead of closed forms.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def dense_lambda_max(A):
    A = np.asarray(A, dtype=float)
    return float(np.linalg.eigh(A.T @ A)[0][-1])


def central_diff(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def naive_hybrid(f, x, ws, beta, Z):
    """Plain double loop, no base-value reuse."""
    total = np.zeros(len(x))
    for z in Z:
        for w in ws:
            total = total + (f(x + beta * z, w) - f(x, w)) / beta * z
    return total / (len(Z) * len(ws))


def scalar_prox(h, d):
    """argmin_y h(y) + 1/2 (y - d)^2 for a scalar convex h, by bounded Brent search."""
    width = 10.0 + 2.0 * abs(d)
    res = minimize_scalar(lambda y: h(y) + 0.5 * (y - d) ** 2,
                          bounds=(d - width, d + width), method="bounded",
                          options={"xatol": 1e-12})
    return res.x


def box_projection_oracle(v, lo, hi):
    return np.array([minimize_scalar(lambda y: (y - vi) ** 2, bounds=(lo, hi), method="bounded",
                                     options={"xatol": 1e-12}).x for vi in v])


def hyperplane_projection_oracle(v, m0):
    """Minimize ||x - v||^2 over 1^T x = m0 by eliminating the last coordinate."""
    v = np.asarray(v, dtype=float)
    n = v.size
    # x = (u, m0 - 1^T u): least squares in u
    M = np.vstack([np.eye(n - 1), -np.ones((1, n - 1))])
    rhs = v - np.concatenate([np.zeros(n - 1), [m0]])
    u, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return np.concatenate([u, [m0 - u.sum()]])


def linearized_xstep_oracle(x, y, lam, g, A, B, c, rho, eta, alpha, project, iters=50000):
    """Direct minimization of the linearized x-step objective

        g^T u - lam^T (A u + B y - c) + rho/2 ||A u + B y - c||^2 + 1/(2 eta) ||u - x||_{G}^2,
        G = alpha I - rho eta A^T A,

    over the feasible set, by projected gradient with step 1/L.
    """
    m = x.size
    G = alpha * np.eye(m) - rho * eta * A.T @ A
    H = rho * A.T @ A + G / eta
    L = float(np.linalg.eigvalsh(H)[-1])
    u = np.array(x, dtype=float)
    for _ in range(iters):
        r = A @ u + B @ y - c
        grad = g - A.T @ lam + rho * A.T @ r + G @ (u - x) / eta
        u_new = project(u - grad / L)
        if np.linalg.norm(u_new - u) < 1e-14:
            u = u_new
            break
        u = u_new
    return u


def lasso_cd(H, b, gamma, iters=100000, tol=1e-13):
    """Coordinate descent for 1/2 x^T H x - b^T x + gamma ||x||_1."""
    m = len(b)
    x = np.zeros(m)
    for _ in range(iters):
        biggest = 0.0
        for k in range(m):
            rk = b[k] - H[k] @ x + H[k, k] * x[k]
            new = np.sign(rk) * max(abs(rk) - gamma, 0.0) / H[k, k]
            biggest = max(biggest, abs(new - x[k]))
            x[k] = new
        if biggest < tol:
            return x
    raise RuntimeError("coordinate descent did not converge")


def lu_logdet(M):
    """-log det via an explicit Doolittle LU with partial pivoting (no numpy.linalg)."""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    sign = 1.0
    logdet = 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0:
            return np.inf
        if p != k:
            A[[k, p]] = A[[p, k]]
            sign = -sign
        for i in range(k + 1, n):
            A[i, k:] -= (A[i, k] / A[k, k]) * A[k, k:]
        sign *= np.sign(A[k, k])
        logdet += np.log(abs(A[k, k]))
    assert sign > 0
    return -logdet


def replay_regret(spec, stream, x_feas, y_feas, x_star, y_star, T):
    """Average regret recomputed from stored feasible iterates, term by term."""
    online = 0.0
    offline = 0.0
    for k in range(T):
        online += spec.loss(x_feas[k], stream[k]) + spec.regularizer.value(y_feas[k])
        offline += spec.loss(x_star, stream[k]) + spec.regularizer.value(y_star)
    return (online - offline) / T
