"""Synthetic network generators and Gaussian sampling.

Six covariance/precision structures used throughout the simulation study,
ranging from dense structured (compound symmetry) to sparse (star, moving
average) to unstructured random models.  Each generator returns the
(Sigma, Theta) pair as a consistency-checked :class:`GroundTruth`.

Randomness is counter-based: every replication derives its own
``SeedSequence`` from (master seed, replication index), so replications
can run concurrently in any order and still reproduce bit-identically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import GenerationFailure, InvalidInput, NotPositiveDefinite

_WISHART_N0 = 10000
_COND_BISECT_ITERS = 200
_COND_REL_TOL = 1e-3


class NetworkModel(enum.Enum):
    """The six synthetic structures, numbered as in the simulation study."""

    CompoundSymmetry = 1
    RandomSparse = 2
    WishartLike = 3
    Star = 4
    MovingAverage = 5
    DiagDominant = 6

    @classmethod
    def from_id(cls, k: int) -> "NetworkModel":
        try:
            return cls(int(k))
        except ValueError:
            raise InvalidInput(f"network id must be 1..6, got {k}") from None


@dataclass(frozen=True)
class NetworkSpec:
    """Generator request: which model, at what dimension, from which seed."""

    model: NetworkModel
    p: int
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.model, NetworkModel):
            raise InvalidInput(f"model must be a NetworkModel, got {self.model!r}")
        if self.p < 2:
            raise InvalidInput(f"p must be at least 2, got {self.p}")


@dataclass(frozen=True)
class GroundTruth:
    """Consistent (Sigma, Theta) pair for one generated network."""

    sigma: np.ndarray
    theta: np.ndarray
    spec: NetworkSpec

    def __post_init__(self):
        prod = self.sigma @ self.theta
        err = np.max(np.abs(prod - np.eye(self.sigma.shape[0])))
        if err > 1e-8:
            raise GenerationFailure(
                f"sigma*theta deviates from identity by {err:.3e}"
            )


def spawn_rng(master_seed: int, *indices: int) -> np.random.Generator:
    """Independent generator for a (seed, index...) coordinate of the study."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, indices)]))


def _pd_inverse_pair(m: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Return (m, inv(m)) after verifying positive definiteness."""
    if matcore.min_eigenvalue(m) <= 0:
        raise GenerationFailure(f"{what} is not positive definite")
    return m, matcore.spd_inverse(m)


def _compound_symmetry(p: int) -> tuple[np.ndarray, np.ndarray]:
    sigma = np.full((p, p), 0.36)
    np.fill_diagonal(sigma, 1.0)
    sigma, theta = _pd_inverse_pair(sigma, "compound symmetry covariance")
    return sigma, theta


def _random_sparse(p: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random((p, p))
    a = np.where(np.triu(u, 1) < 0.1, 0.5, 0.0)
    a = np.triu(a, 1)
    a = a + a.T

    def cond_of(shift: float) -> float:
        eigs = np.linalg.eigvalsh(a + shift * np.eye(p))
        if eigs[0] <= 0:
            return np.inf
        return eigs[-1] / eigs[0]

    # cond is decreasing in the shift once PD: bisect for cond == p
    lo, hi = 0.0, 10.0 * p
    if cond_of(hi) > p:
        raise GenerationFailure("no diagonal shift in [0, 10p] reaches the target conditioning")
    for _ in range(_COND_BISECT_ITERS):
        mid = (lo + hi) / 2.0
        if cond_of(mid) > p:
            lo = mid
        else:
            hi = mid
    shift = (lo + hi) / 2.0
    achieved = cond_of(shift)
    if not np.isfinite(achieved) or abs(achieved - p) / p > _COND_REL_TOL:
        raise GenerationFailure(
            f"conditioning target {p} not attained (got {achieved:.4g}); "
            "the sparse draw may have produced an empty graph"
        )
    theta0 = a + shift * np.eye(p)
    d = 1.0 / np.sqrt(np.diag(theta0))
    theta = matcore.symmetrize(theta0 * d[:, None] * d[None, :])
    np.fill_diagonal(theta, 1.0)
    theta, sigma = _pd_inverse_pair(theta, "standardized sparse precision")
    return sigma, theta


def _wishart_like(p: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    y = rng.standard_normal((_WISHART_N0, p))
    theta = matcore.symmetrize(y.T @ y / _WISHART_N0)
    theta, sigma = _pd_inverse_pair(theta, "scaled Wishart precision")
    return sigma, theta


def _star(p: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.eye(p)
    theta[0, 1:] = 0.1
    theta[1:, 0] = 0.1
    # PD requires 1 - 0.01*(p-1) > 0, i.e. p < 101
    theta, sigma = _pd_inverse_pair(theta, "star precision")
    return sigma, theta


def _moving_average(p: int) -> tuple[np.ndarray, np.ndarray]:
    sigma = np.eye(p)
    idx = np.arange(p - 1)
    sigma[idx, idx + 1] = 0.2
    sigma[idx + 1, idx] = 0.2
    if p > 2:
        idx2 = np.arange(p - 2)
        sigma[idx2, idx2 + 2] = 0.04
        sigma[idx2 + 2, idx2] = 0.04
    sigma, theta = _pd_inverse_pair(sigma, "moving average covariance")
    return sigma, theta


def _diag_dominant(p: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    a = rng.random((p, p))
    np.fill_diagonal(a, 0.0)
    b = (a + a.T) / 2.0
    gamma = np.max(np.sum(np.abs(b), axis=1))
    if gamma <= 0:
        raise GenerationFailure("degenerate all-zero dominance draw")
    sigma = b / gamma
    sigma[np.diag_indices(p)] = 1.0 + 0.1 * rng.random(p)
    sigma = matcore.symmetrize(sigma)
    sigma, theta = _pd_inverse_pair(sigma, "diagonally dominant covariance")
    return sigma, theta


def make_network(spec: NetworkSpec) -> GroundTruth:
    """Generate the requested structure and its exact inverse."""
    rng = spawn_rng(spec.seed, spec.model.value)
    model = spec.model
    if model is NetworkModel.CompoundSymmetry:
        sigma, theta = _compound_symmetry(spec.p)
    elif model is NetworkModel.RandomSparse:
        sigma, theta = _random_sparse(spec.p, rng)
    elif model is NetworkModel.WishartLike:
        sigma, theta = _wishart_like(spec.p, rng)
    elif model is NetworkModel.Star:
        sigma, theta = _star(spec.p)
    elif model is NetworkModel.MovingAverage:
        sigma, theta = _moving_average(spec.p)
    else:
        sigma, theta = _diag_dominant(spec.p, rng)
    return GroundTruth(sigma=sigma, theta=theta, spec=spec)


def sample_mvn(
    truth: GroundTruth, n: int, seed: int | np.random.SeedSequence
) -> np.ndarray:
    """``n`` i.i.d. rows from N(0, Sigma) via the Cholesky factor.

    ``seed`` is an integer or a ``SeedSequence`` (replication drivers pass
    pre-split sequences so every (replication, network) cell owns an
    independent stream).
    """
    if n < 2:
        raise InvalidInput(f"n must be at least 2, got {n}")
    try:
        chol = np.linalg.cholesky(truth.sigma)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("covariance has no Cholesky factor") from None
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence([int(seed)])
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, truth.sigma.shape[0]))
    return z @ chol.T


def sample_cov(x: np.ndarray) -> np.ndarray:
    """Zero-mean sample covariance ``X^T X / n`` (divisor n, no centering).

    Matches the population model the estimators assume; observational data
    should be centered by the caller before this op.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidInput("x must be a nonempty 2-D data matrix")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("x contains non-finite entries")
    n = x.shape[0]
    return matcore.symmetrize(x.T @ x / n)


def save_matrix_csv(m: np.ndarray, path: str) -> None:
    """Write a matrix as plain CSV rows with full-precision floats."""
    with open(path, "w") as fh:
        for row in np.asarray(m, dtype=float):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def save_ground_truth(truth: GroundTruth, prefix: str) -> tuple[str, str]:
    """Dump sigma and theta to ``{prefix}_sigma.csv`` / ``{prefix}_theta.csv``."""
    sigma_path = f"{prefix}_sigma.csv"
    theta_path = f"{prefix}_theta.csv"
    save_matrix_csv(truth.sigma, sigma_path)
    save_matrix_csv(truth.theta, theta_path)
    return sigma_path, theta_path
