"""Closed-form ridge-family precision estimators.

Covers the two archetypal ridge inverses, the Frobenius-penalty ridge
estimator in both of its algebraic forms (with and without a final
inversion), the 2-step estimator that feeds a graphical-lasso working
covariance into the ridge closed form, the generalized estimator that
blends both penalty families, and the elastic-net objective those
estimators relate to.

The Frobenius-penalty closed form solves the quadratic matrix equation

    (S - lam*T) Theta + lam * Theta^2 = I

whose solution is ``[(lam*I + (S - lam*T)^2 / 4)^{1/2} + (S - lam*T)/2]^{-1}``.
All outputs are symmetric positive definite for every valid input,
including singular sample covariances with p > n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import glasso as glasso_mod
from . import matcore
from .errors import (
    ConvergenceFailure,
    InvalidInput,
    NotPositiveDefinite,
    NotPositiveSemiDefinite,
)


@dataclass(frozen=True)
class TuningParams:
    """Elastic-net tuning pair: ``lam >= 0`` overall strength, ``alpha`` in [0, 1]
    the L1 share."""

    lam: float
    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidInput(f"lam must be nonnegative, got {self.lam}")
        if not np.isfinite(self.alpha) or not 0 <= self.alpha <= 1:
            raise InvalidInput(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class GenTuningParams:
    """Tuning pair of the generalized estimator: ``lambda1`` in [0, 1] blends the
    sample covariance with the first target, ``lambda2 >= 0`` scales the
    Frobenius penalty."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not np.isfinite(self.lambda1) or not 0 <= self.lambda1 <= 1:
            raise InvalidInput(f"lambda1 must lie in [0, 1], got {self.lambda1}")
        if not np.isfinite(self.lambda2) or self.lambda2 < 0:
            raise InvalidInput(f"lambda2 must be nonnegative, got {self.lambda2}")


_TARGET_KINDS = ("zero", "identity", "scalar_nu", "scalar", "custom")


@dataclass(frozen=True)
class TargetSpec:
    """Shrinkage target resolved to a concrete matrix at estimation time.

    Kinds: ``zero``; ``identity``; ``scalar_nu`` (``nu * I`` with
    ``nu = p^2 / tr(S)`` computed from the covariance at hand); ``scalar``
    (``gamma * I``); ``custom`` (explicit symmetric PSD matrix).
    """

    kind: str
    gamma: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _TARGET_KINDS:
            raise InvalidInput(f"unknown target kind {self.kind!r}")
        if self.kind == "scalar":
            if self.gamma is None or not np.isfinite(self.gamma) or self.gamma < 0:
                raise InvalidInput("scalar target requires a nonnegative gamma")
        if self.kind == "custom":
            if self.matrix is None:
                raise InvalidInput("custom target requires a matrix")
            m = matcore.check_sym(self.matrix, name="target")
            if matcore.min_eigenvalue(m) < -matcore.PSD_CLAMP:
                raise NotPositiveSemiDefinite("custom target must be PSD")
            object.__setattr__(self, "matrix", m)

    def resolve(self, p: int, s: np.ndarray | None = None) -> np.ndarray:
        """Materialize the target as a ``(p, p)`` matrix."""
        if self.kind == "zero":
            return np.zeros((p, p))
        if self.kind == "identity":
            return np.eye(p)
        if self.kind == "scalar":
            return self.gamma * np.eye(p)
        if self.kind == "scalar_nu":
            if s is None:
                raise InvalidInput("scalar_nu target needs the sample covariance")
            tr = float(np.trace(s))
            if tr <= 0:
                raise InvalidInput("scalar_nu target undefined for tr(S) <= 0")
            return (p * p / tr) * np.eye(p)
        if self.matrix.shape[0] != p:
            raise InvalidInput(
                f"custom target has dimension {self.matrix.shape[0]}, expected {p}"
            )
        return self.matrix

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.gamma is not None:
            d["gamma"] = self.gamma
        if self.matrix is not None:
            d["matrix"] = self.matrix.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TargetSpec":
        unknown = set(d) - {"kind", "gamma", "matrix"}
        if unknown:
            raise InvalidInput(f"unknown target keys: {sorted(unknown)}")
        matrix = np.asarray(d["matrix"], dtype=float) if "matrix" in d else None
        return cls(kind=d.get("kind", ""), gamma=d.get("gamma"), matrix=matrix)


def _check_lambda_positive(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0:
        raise InvalidInput(f"lam must be strictly positive, got {lam}")
    return lam


def _riccati_bracket(m: np.ndarray, lam: float) -> np.ndarray:
    """``(lam*I + m^2/4)^{1/2} + m/2`` — the matrix whose inverse is the estimator."""
    half = m / 2.0
    inner = matcore.symmetrize(half @ half)
    np.fill_diagonal(inner, np.diag(inner) + lam)
    return matcore.spd_sqrt(inner) + half


def archetype1(s: np.ndarray, gamma: np.ndarray, lam: float) -> np.ndarray:
    """Inverse of the convex blend ``(1-lam)*S + lam*Gamma``, ``lam`` in (0, 1]."""
    s = matcore.check_sym(s, name="s")
    gamma = matcore.check_sym(gamma, name="gamma")
    lam = float(lam)
    if not np.isfinite(lam) or not 0 < lam <= 1:
        raise InvalidInput(f"lam must lie in (0, 1], got {lam}")
    blend = matcore.symmetrize((1.0 - lam) * s + lam * gamma)
    return matcore.spd_inverse(blend)


def archetype2(s: np.ndarray, lam: float) -> np.ndarray:
    """Inverse of the diagonally loaded covariance ``S + lam*I``."""
    s = matcore.check_sym(s, name="s")
    lam = _check_lambda_positive(lam)
    return matcore.spd_inverse(s + lam * np.eye(s.shape[0]))


def alt_ridge_I(s: np.ndarray, t: np.ndarray, lam: float) -> np.ndarray:
    """Frobenius-penalty ridge estimator shrinking toward a PD target ``t``.

    Computed in the inversion form: the bracket matrix is assembled and
    then explicitly inverted.  See :func:`alt_ridge_I_noinv` for the
    algebraically equivalent inversion-free form.
    """
    s = matcore.check_sym(s, name="s")
    t = matcore.check_sym(t, name="t")
    lam = _check_lambda_positive(lam)
    if matcore.min_eigenvalue(t) <= 0:
        raise NotPositiveDefinite("target t must be positive definite")
    return matcore.spd_inverse(_riccati_bracket(s - lam * t, lam))


def alt_ridge_I_noinv(s: np.ndarray, t: np.ndarray, lam: float) -> np.ndarray:
    """Same estimator as :func:`alt_ridge_I`, computed without any inversion:
    ``(1/lam) * [(lam*I + (S - lam*T)^2/4)^{1/2} - (S - lam*T)/2]``."""
    s = matcore.check_sym(s, name="s")
    t = matcore.check_sym(t, name="t")
    lam = _check_lambda_positive(lam)
    if matcore.min_eigenvalue(t) <= 0:
        raise NotPositiveDefinite("target t must be positive definite")
    half = (s - lam * t) / 2.0
    inner = matcore.symmetrize(half @ half)
    np.fill_diagonal(inner, np.diag(inner) + lam)
    return (matcore.spd_sqrt(inner) - half) / lam


def alt_ridge_II(s: np.ndarray, lam: float) -> np.ndarray:
    """Frobenius-penalty ridge estimator with the null target:
    ``[(lam*I + S^2/4)^{1/2} + S/2]^{-1}``."""
    s = matcore.check_sym(s, name="s")
    lam = _check_lambda_positive(lam)
    return matcore.spd_inverse(_riccati_bracket(s, lam))


def two_step(
    s: np.ndarray,
    t: np.ndarray,
    tp: TuningParams,
    glasso_max_iter: int = glasso_mod.DEFAULT_MAX_ITER,
    glasso_tol: float = glasso_mod.DEFAULT_TOL,
    dual_consistent: bool = False,
    w: np.ndarray | None = None,
) -> np.ndarray:
    """Two-step estimator: graphical lasso at penalty ``alpha*lam`` produces a
    working covariance ``W``, then the ridge closed form is applied to ``W``.

    ``t`` must be PSD and diagonal.  With ``alpha = 0`` the lasso step is
    skipped entirely and ``W = S``, which reproduces :func:`alt_ridge_I`
    exactly (and stays well-defined for singular ``S``).

    ``dual_consistent=True`` replaces the ``lam*I`` term inside the matrix
    square root by ``lam*(1-alpha)*I``, the scaling the dual derivation of
    the elastic-net problem produces; the default keeps the published form.

    ``w`` short-circuits the lasso step with a precomputed working
    covariance (callers doing grid searches cache these).
    """
    s = matcore.check_sym(s, name="s")
    t = matcore.check_sym(t, name="t")
    lam = _check_lambda_positive(tp.lam)
    alpha = float(tp.alpha)
    if matcore.max_abs_offdiag(t) > 0:
        raise InvalidInput("two_step target must be diagonal")
    if matcore.min_eigenvalue(t) < -matcore.PSD_CLAMP:
        raise NotPositiveSemiDefinite("two_step target must be PSD")

    if w is None:
        if alpha == 0.0:
            w = s
        else:
            fit = glasso_mod.glasso_fit(
                s, alpha * lam, max_iter=glasso_max_iter, tol=glasso_tol
            )
            if not fit.converged:
                raise ConvergenceFailure(
                    f"glasso did not converge at rho={alpha * lam:.6g}", fit=fit
                )
            w = fit.w
    else:
        w = matcore.check_sym(w, name="w")

    m = w - lam * (1.0 - alpha) * t
    inner_lam = lam * (1.0 - alpha) if dual_consistent else lam
    if inner_lam == 0.0:
        # dual-consistent form at alpha=1 degenerates to the plain inverse of W
        return matcore.spd_inverse(w)
    return matcore.spd_inverse(_riccati_bracket(m, inner_lam))


def generalized(
    s: np.ndarray,
    gamma: np.ndarray,
    t: np.ndarray,
    gp: GenTuningParams,
) -> np.ndarray:
    """Estimator combining both penalty families: the sample covariance is
    first blended with ``gamma`` (weight ``lambda1``), then the Frobenius
    ridge closed form with target ``t`` and strength ``lambda2`` is applied.

    ``lambda1 = 0`` reduces to :func:`alt_ridge_I`; ``lambda2 = 0`` reduces
    to :func:`archetype1`; ``lambda1 = 1`` with a lasso working covariance as
    ``gamma`` reproduces :func:`two_step`.
    """
    s = matcore.check_sym(s, name="s")
    gamma = matcore.check_sym(gamma, name="gamma")
    t = matcore.check_sym(t, name="t")
    blend = matcore.symmetrize((1.0 - gp.lambda1) * s + gp.lambda1 * gamma)
    if gp.lambda2 == 0.0:
        return matcore.spd_inverse(blend)  # SingularMatrix if the blend degenerates
    return matcore.spd_inverse(_riccati_bracket(blend - gp.lambda2 * t, gp.lambda2))


def en_objective(
    theta: np.ndarray, s: np.ndarray, t: np.ndarray, tp: TuningParams
) -> float:
    """Elastic-net penalized log-likelihood
    ``logdet(Theta) - tr(S Theta) - lam*(alpha*||Theta||_1
    + (1-alpha)/2 * ||Theta - T||_F^2)``, with the L1 norm taken over all
    entries including the diagonal."""
    theta = matcore.check_sym(theta, name="theta")
    s = matcore.check_sym(s, name="s")
    t = matcore.check_sym(t, name="t")
    eigs = np.linalg.eigvalsh(theta)
    if eigs[0] <= 0:
        raise NotPositiveDefinite("theta must be positive definite")
    logdet = float(np.sum(np.log(eigs)))
    trace = float(np.sum(s * theta))
    l1 = float(np.sum(np.abs(theta)))
    frob2 = float(np.sum(np.square(theta - t)))
    return logdet - trace - tp.lam * (tp.alpha * l1 + (1.0 - tp.alpha) / 2.0 * frob2)


def stationarity_residual(
    theta: np.ndarray, s: np.ndarray, t: np.ndarray, lam: float
) -> float:
    """Max-abs residual of the ridge normal equation
    ``Theta^{-1} - S - lam*(Theta - T) = 0``."""
    resid = matcore.spd_inverse(theta) - s - lam * (theta - t)
    return float(np.max(np.abs(resid)))


def riccati_residual(
    theta: np.ndarray, s: np.ndarray, t: np.ndarray, lam: float
) -> float:
    """Max-abs residual of the quadratic matrix equation
    ``(S - lam*T) Theta + lam*Theta^2 = I``."""
    resid = (s - lam * t) @ theta + lam * (theta @ theta) - np.eye(s.shape[0])
    return float(np.max(np.abs(resid)))
