"""Graphical lasso solver (block coordinate descent).

Maximizes ``logdet(Theta) - tr(S Theta) - rho * ||Theta||_1`` with the L1
penalty applied to every entry including the diagonal, which fixes the
working covariance diagonal at ``w_ii = s_ii + rho`` throughout.  The
solver returns both the precision estimate and the working covariance
``W`` it maintained; downstream shrinkage estimators consume ``W``
directly rather than re-inverting the precision estimate.

The per-column lasso subproblem and the outer sweep both run inside
numba-compiled kernels; a fit at p=20 costs well under a millisecond
after JIT warm-up, which is what makes dense cross-validation grids
affordable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import matcore
from .errors import InvalidInput, SingularMatrix

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 1000


@dataclass
class GlassoFit:
    """Result of one graphical-lasso solve.

    ``w`` is the solver's working covariance (``theta``'s inverse up to the
    convergence tolerance, with ``w_ii = s_ii + rho`` exactly).
    ``objective_trace`` holds the penalized objective after each outer sweep
    when the fit was run with ``return_objective_trace=True``.
    """

    theta: np.ndarray
    w: np.ndarray
    rho: float
    iterations: int
    converged: bool
    objective_trace: np.ndarray | None = field(default=None, repr=False)


@njit(cache=True, nogil=True)
def _lasso_cd_core(gram, target, rho, tol, max_iter, beta):
    """Coordinate descent on 0.5 b'Gb - t'b + rho*||b||_1, warm-started at beta."""
    p = gram.shape[0]
    resid = gram @ beta
    for it in range(max_iter):
        delta_max = 0.0
        for k in range(p):
            g_kk = gram[k, k]
            if g_kk <= 0.0:
                continue
            c = target[k] - resid[k] + g_kk * beta[k]
            if c > rho:
                b_new = (c - rho) / g_kk
            elif c < -rho:
                b_new = (c + rho) / g_kk
            else:
                b_new = 0.0
            d = b_new - beta[k]
            if d != 0.0:
                beta[k] = b_new
                for l in range(p):
                    resid[l] += d * gram[l, k]
                if abs(d) > delta_max:
                    delta_max = abs(d)
        if delta_max < tol:
            return it + 1
    return max_iter


@njit(cache=True, nogil=True)
def _recover_theta(s, w, betas):
    """Rebuild the precision matrix from the working covariance and betas."""
    p = w.shape[0]
    theta = np.zeros((p, p))
    for j in range(p):
        dot = 0.0
        m = 0
        for i in range(p):
            if i == j:
                continue
            dot += w[i, j] * betas[j, m]
            m += 1
        theta_jj = 1.0 / (w[j, j] - dot)
        theta[j, j] = theta_jj
        m = 0
        for i in range(p):
            if i == j:
                continue
            theta[i, j] = -betas[j, m] * theta_jj
            m += 1
    return (theta + theta.T) / 2.0


@njit(cache=True, nogil=True)
def _penalized_objective(s, theta, rho):
    sign, ld = np.linalg.slogdet(theta)
    if sign <= 0.0:
        return np.nan
    tr = 0.0
    l1 = 0.0
    p = s.shape[0]
    for i in range(p):
        for j in range(p):
            tr += s[i, j] * theta[j, i]
            l1 += abs(theta[i, j])
    return ld - tr - rho * l1


@njit(cache=True, nogil=True)
def _glasso_core(s, rho, max_iter, tol, inner_tol, w, betas, compute_trace):
    p = s.shape[0]
    trace = np.full(max_iter, np.nan)
    w11 = np.empty((p - 1, p - 1))
    s12 = np.empty(p - 1)
    n_sweeps = 0
    converged = False
    for sweep in range(max_iter):
        change = 0.0
        for j in range(p):
            m = 0
            for i in range(p):
                if i == j:
                    continue
                s12[m] = s[i, j]
                n = 0
                for k in range(p):
                    if k == j:
                        continue
                    w11[m, n] = w[i, k]
                    n += 1
                m += 1
            _lasso_cd_core(w11, s12, rho, inner_tol, 10 * p + 100, betas[j])
            w12 = w11 @ betas[j]
            m = 0
            for i in range(p):
                if i == j:
                    continue
                change += abs(w[i, j] - w12[m]) + abs(w[j, i] - w12[m])
                w[i, j] = w12[m]
                w[j, i] = w12[m]
                m += 1
        n_sweeps = sweep + 1
        if compute_trace:
            trace[sweep] = _penalized_objective(s, _recover_theta(s, w, betas), rho)
        if change / (p * p) < tol:
            converged = True
            break
    theta = _recover_theta(s, w, betas)
    return theta, n_sweeps, converged, trace


def glasso_fit(
    s: np.ndarray,
    rho: float,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    w_init: np.ndarray | None = None,
    return_objective_trace: bool = False,
) -> GlassoFit:
    """Solve the graphical lasso at penalty ``rho``.

    Parameters
    ----------
    s : (p, p) ndarray
        Symmetric PSD sample covariance.
    rho : float
        Nonnegative L1 penalty.  ``rho = 0`` requires ``s`` to be PD and
        returns the plain inverse.
    max_iter : int
        Cap on outer sweeps; hitting it returns ``converged=False``.
    tol : float
        Convergence threshold on the mean absolute change of ``W`` per sweep.
    w_init : ndarray, optional
        Warm-start working covariance (diagonal is reset to ``s_ii + rho``).
    return_objective_trace : bool
        Record the penalized objective after every sweep (costs one
        log-determinant per sweep).
    """
    s = matcore.check_sym(s, name="s")
    rho = float(rho)
    if not np.isfinite(rho) or rho < 0:
        raise InvalidInput(f"rho must be nonnegative, got {rho}")
    p = s.shape[0]
    if rho == 0.0:
        theta = matcore.spd_inverse(s)  # raises SingularMatrix if singular
        return GlassoFit(theta=theta, w=s.copy(), rho=0.0, iterations=0, converged=True)
    if p == 1:
        w = np.array([[s[0, 0] + rho]])
        theta = np.array([[1.0 / w[0, 0]]])
        return GlassoFit(theta=theta, w=w, rho=rho, iterations=0, converged=True)

    if w_init is not None:
        w = matcore.check_sym(w_init, name="w_init")
        if w.shape != s.shape:
            raise InvalidInput("w_init shape does not match s")
        w = w.copy()
    else:
        w = s.copy()
    np.fill_diagonal(w, np.diag(s) + rho)

    betas = np.zeros((p, p - 1))
    inner_tol = max(tol * 1e-2, 1e-14)
    theta, n_sweeps, converged, trace = _glasso_core(
        s, rho, int(max_iter), float(tol), inner_tol, w, betas, return_objective_trace
    )
    return GlassoFit(
        theta=theta,
        w=w,
        rho=rho,
        iterations=n_sweeps,
        converged=bool(converged),
        objective_trace=trace[:n_sweeps] if return_objective_trace else None,
    )


def lasso_cd(
    gram: np.ndarray,
    target: np.ndarray,
    rho: float,
    tol: float = 1e-10,
    max_iter: int = 10000,
) -> np.ndarray:
    """Solve ``min_b 0.5 b'Gb - t'b + rho*||b||_1`` by coordinate descent.

    ``gram`` must be PD on the support of the solution for the subgradient
    conditions to pin it down.
    """
    gram = np.asarray(gram, dtype=float)
    target = np.asarray(target, dtype=float)
    if not (np.all(np.isfinite(gram)) and np.all(np.isfinite(target))):
        raise InvalidInput("lasso_cd requires finite inputs")
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] != target.shape[0]:
        raise InvalidInput("gram/target dimensions do not agree")
    if rho < 0:
        raise InvalidInput(f"rho must be nonnegative, got {rho}")
    beta = np.zeros(target.shape[0])
    _lasso_cd_core(gram, target, float(rho), float(tol), int(max_iter), beta)
    return beta


def penalized_objective(s: np.ndarray, theta: np.ndarray, rho: float) -> float:
    """Evaluate ``logdet(Theta) - tr(S Theta) - rho*||Theta||_1`` (NaN if not PD)."""
    return float(_penalized_objective(np.asarray(s, float), np.asarray(theta, float), rho))


def kkt_check(fit: GlassoFit, s: np.ndarray, rho: float) -> float:
    """Maximum violation of the off-diagonal stationarity conditions.

    Zero entries of ``theta`` must satisfy ``|w - s| <= rho``; nonzero
    entries must satisfy ``w - s = rho * sign(theta)``.
    """
    s = matcore.check_sym(s, name="s")
    if fit.theta.shape != s.shape:
        raise InvalidInput("fit dimensions do not match s")
    p = s.shape[0]
    if p == 1:
        return 0.0
    resid = 0.0
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            d = fit.w[i, j] - s[i, j]
            if fit.theta[i, j] == 0.0:
                resid = max(resid, abs(d) - rho)
            else:
                resid = max(resid, abs(d - rho * np.sign(fit.theta[i, j])))
    return max(resid, 0.0)
