"""Shared random-matrix helpers for the test suite."""

from __future__ import annotations

import numpy as np


def rand_sym(rng: np.random.Generator, p: int, scale: float = 1.0) -> np.ndarray:
    """Random symmetric matrix with N(0, scale^2) entries."""
    m = rng.standard_normal((p, p)) * scale
    return (m + m.T) / 2.0


def rand_spd(
    rng: np.random.Generator, p: int, eig_lo: float = 0.3, eig_hi: float = 3.0
) -> np.ndarray:
    """Random SPD matrix with eigenvalues uniform in [eig_lo, eig_hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    eigs = rng.uniform(eig_lo, eig_hi, p)
    m = (q * eigs) @ q.T
    return (m + m.T) / 2.0


def rand_cov(rng: np.random.Generator, p: int, n: int) -> np.ndarray:
    """Sample covariance X'X/n of standard-normal data; singular when n < p."""
    x = rng.standard_normal((n, p))
    s = x.T @ x / n
    return (s + s.T) / 2.0


def rand_orthogonal(rng: np.random.Generator, p: int) -> np.ndarray:
    """Haar-ish random orthogonal matrix from a QR factorization."""
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))
