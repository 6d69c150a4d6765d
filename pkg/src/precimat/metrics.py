"""Loss functions scoring a precision estimate against ground truth.

Four losses: Kullback-Leibler divergence between the fitted and true
Gaussians, Frobenius distance between precision matrices, the quadratic
loss ``tr((Sigma Theta_hat - I)^2)``, and the spectral norm of the
squared difference matrix.

The spectral loss squares the difference matrix before taking the norm;
for symmetric inputs that equals the square of the plain spectral
distance, and ``squared=False`` exposes the un-squared variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import InvalidInput, NotPositiveDefinite


@dataclass(frozen=True)
class LossReport:
    """One estimate's scores under all four losses."""

    kl: float
    l2: float
    ql: float
    sp: float


def _pair(a: np.ndarray, b: np.ndarray, names: tuple[str, str]) -> tuple[np.ndarray, np.ndarray]:
    a = matcore.check_sym(a, name=names[0])
    b = matcore.check_sym(b, name=names[1])
    if a.shape != b.shape:
        raise InvalidInput(f"{names[0]} and {names[1]} must have matching dimensions")
    return a, b


def kl_loss(sigma: np.ndarray, theta_hat: np.ndarray) -> float:
    """``tr(Sigma Theta_hat) - logdet(Sigma Theta_hat) - p``, clamped at 0.

    Zero exactly when ``theta_hat`` inverts ``sigma``; grows with the
    divergence between the two Gaussians.
    """
    sigma, theta_hat = _pair(sigma, theta_hat, ("sigma", "theta_hat"))
    eig_s = np.linalg.eigvalsh(sigma)
    eig_t = np.linalg.eigvalsh(theta_hat)
    if eig_s[0] <= 0 or eig_t[0] <= 0:
        raise NotPositiveDefinite("kl_loss needs both matrices positive definite")
    p = sigma.shape[0]
    tr = float(np.sum(sigma * theta_hat))
    logdet = float(np.sum(np.log(eig_s)) + np.sum(np.log(eig_t)))
    return max(tr - logdet - p, 0.0)


def l2_loss(theta: np.ndarray, theta_hat: np.ndarray) -> float:
    """Frobenius norm of the estimation error ``Theta - Theta_hat``."""
    theta, theta_hat = _pair(theta, theta_hat, ("theta", "theta_hat"))
    return matcore.frobenius_norm(theta - theta_hat)


def ql_loss(sigma: np.ndarray, theta_hat: np.ndarray) -> float:
    """Quadratic loss ``tr((Sigma Theta_hat - I)^2)``."""
    sigma, theta_hat = _pair(sigma, theta_hat, ("sigma", "theta_hat"))
    m = sigma @ theta_hat
    np.fill_diagonal(m, np.diag(m) - 1.0)
    # tr(M^2) for the possibly asymmetric M = Sigma*Theta_hat - I
    return float(np.sum(m * m.T))


def sp_loss(theta: np.ndarray, theta_hat: np.ndarray, squared: bool = True) -> float:
    """Spectral norm of ``(Theta - Theta_hat)^2``; with ``squared=False``,
    of the difference itself."""
    theta, theta_hat = _pair(theta, theta_hat, ("theta", "theta_hat"))
    norm = matcore.spectral_norm(theta - theta_hat)
    return norm * norm if squared else norm


def all_losses(truth_sigma: np.ndarray, truth_theta: np.ndarray, theta_hat: np.ndarray) -> LossReport:
    """Evaluate all four losses for one estimate."""
    return LossReport(
        kl=kl_loss(truth_sigma, theta_hat),
        l2=l2_loss(truth_theta, theta_hat),
        ql=ql_loss(truth_sigma, theta_hat),
        sp=sp_loss(truth_theta, theta_hat),
    )


def losses_csv_row(
    method: str, target: str, network: int, p: int, replication: int | str, report: LossReport
) -> str:
    """Serialize one report as ``method,target,network,p,replication,kl,l2,ql,sp``."""
    vals = ",".join(repr(float(v)) for v in (report.kl, report.l2, report.ql, report.sp))
    return f"{method},{target},{network},{p},{replication},{vals}"
