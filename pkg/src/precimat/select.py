"""K-fold cross-validation and tuning-grid search for every estimator.

The score is held-out Gaussian log-likelihood
``logdet(Theta_hat) - tr(S_heldout * Theta_hat)``, maximized over the
grid.  Grid points that fail (invalid tuning for an estimator, solver
breakdown, singular refit) are recorded and skipped; only a fully failed
grid raises.

Estimator ids accepted by :func:`grid_search` and :func:`point_estimate`:

``glasso``      L1 penalty ``lam``; the target and alpha grid are ignored.
``archetype1``  convex blend inverse; valid only for ``lam`` in (0, 1].
``archetype2``  diagonally loaded inverse.
``alt_ridge``   Frobenius-ridge closed form; a zero target dispatches to
                the null-target variant, any other target to the PD form.
``two_step``    lasso working covariance + ridge closed form; the alpha
                grid sets the L1 share, with per-fold warm-started lasso
                fits shared across the grid.
``generalized`` two-penalty blend; ``lambda1`` runs over the alpha grid,
                ``lambda2`` over the lambda grid, and the same resolved
                target serves both penalty families.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import glasso as glasso_mod
from . import matcore
from .errors import (
    InvalidInput,
    NotPositiveDefinite,
    PrecimatError,
    SelectionFailure,
)
from .estimators import (
    GenTuningParams,
    TargetSpec,
    TuningParams,
    alt_ridge_I,
    alt_ridge_II,
    archetype1,
    archetype2,
    generalized,
    two_step,
)
from .simgen import sample_cov

ESTIMATOR_IDS = (
    "glasso",
    "archetype1",
    "archetype2",
    "alt_ridge",
    "two_step",
    "generalized",
)

# estimators whose grid has a second axis (the alpha grid)
_TWO_AXIS = ("two_step", "generalized")


def default_lambda_grid() -> np.ndarray:
    return np.logspace(-3, 1, 25)


def default_alpha_grid() -> np.ndarray:
    return np.linspace(0.0, 1.0, 11)


@dataclass(frozen=True)
class CvConfig:
    """Fold count, tuning grids, and the fold-assignment seed."""

    folds: int = 5
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    alpha_grid: np.ndarray = field(default_factory=default_alpha_grid)
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise InvalidInput(f"folds must be at least 2, got {self.folds}")
        lam = np.asarray(self.lambda_grid, dtype=float)
        alp = np.asarray(self.alpha_grid, dtype=float)
        if lam.size == 0 or alp.size == 0:
            raise InvalidInput("tuning grids must be non-empty")
        if np.any(~np.isfinite(lam)) or np.any(lam <= 0) or np.any(lam > 10):
            raise InvalidInput("lambda grid must lie within (0, 10]")
        if np.any(np.diff(lam) <= 0):
            raise InvalidInput("lambda grid must be strictly ascending")
        if np.any(~np.isfinite(alp)) or np.any(alp < 0) or np.any(alp > 1):
            raise InvalidInput("alpha grid must lie within [0, 1]")
        object.__setattr__(self, "lambda_grid", lam)
        object.__setattr__(self, "alpha_grid", alp)


@dataclass
class CvPoint:
    """One grid point's cross-validated score (NaN when the point failed)."""

    lam: float
    alpha: float | None
    mean_score: float
    sd_score: float
    error: str | None = None


@dataclass
class CvResult:
    """Grid-search outcome: best pair, full score surface, fold layout."""

    best_lambda: float
    best_alpha: float | None
    points: list[CvPoint]
    fold_assignments: np.ndarray

    def surface_to_csv(self, path: str) -> None:
        """Write ``lambda,alpha,mean_score,sd_score`` rows (failed points
        keep empty score cells)."""
        with open(path, "w") as fh:
            fh.write("lambda,alpha,mean_score,sd_score\n")
            for pt in self.points:
                alpha = "" if pt.alpha is None else repr(float(pt.alpha))
                if pt.error is None:
                    fh.write(
                        f"{float(pt.lam)!r},{alpha},{pt.mean_score!r},{pt.sd_score!r}\n"
                    )
                else:
                    fh.write(f"{float(pt.lam)!r},{alpha},,\n")


def kfold_split(n: int, folds: int, seed: int) -> np.ndarray:
    """Deterministic fold-id vector; sizes differ by at most one."""
    if folds < 2:
        raise InvalidInput(f"folds must be at least 2, got {folds}")
    if n < folds:
        raise InvalidInput(f"cannot split n={n} observations into {folds} folds")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    perm = rng.permutation(n)
    assign = np.empty(n, dtype=np.int64)
    base = n // folds
    extra = n % folds
    start = 0
    for k in range(folds):
        size = base + (1 if k < extra else 0)
        assign[perm[start : start + size]] = k
        start += size
    return assign


def cv_score(theta_hat: np.ndarray, s_heldout: np.ndarray) -> float:
    """Held-out Gaussian log-likelihood ``logdet(Theta) - tr(S_ho Theta)``."""
    theta_hat = matcore.check_sym(theta_hat, name="theta_hat")
    s_heldout = matcore.check_sym(s_heldout, name="s_heldout")
    if theta_hat.shape != s_heldout.shape:
        raise InvalidInput("theta_hat and s_heldout must have matching dimensions")
    eigs = np.linalg.eigvalsh(theta_hat)
    if eigs[0] <= 0:
        raise NotPositiveDefinite("cv_score needs a positive definite estimate")
    return float(np.sum(np.log(eigs)) - np.sum(s_heldout * theta_hat))


def point_estimate(
    estimator: str,
    s: np.ndarray,
    target: TargetSpec,
    lam: float,
    alpha: float | None = None,
    w: np.ndarray | None = None,
    glasso_max_iter: int = glasso_mod.DEFAULT_MAX_ITER,
    glasso_tol: float = glasso_mod.DEFAULT_TOL,
) -> np.ndarray:
    """Single estimate at one tuning point, shared by CV, refit, and the CLI.

    ``w`` optionally injects a precomputed lasso working covariance for the
    two-step path (and is ignored by the others).
    """
    if estimator not in ESTIMATOR_IDS:
        raise InvalidInput(f"unknown estimator id {estimator!r}")
    p = s.shape[0]
    if estimator == "glasso":
        fit = glasso_mod.glasso_fit(s, lam, max_iter=glasso_max_iter, tol=glasso_tol)
        return fit.theta
    if estimator == "archetype1":
        return archetype1(s, target.resolve(p, s), lam)
    if estimator == "archetype2":
        return archetype2(s, lam)
    if estimator == "alt_ridge":
        t = target.resolve(p, s)
        if np.all(t == 0):
            return alt_ridge_II(s, lam)
        return alt_ridge_I(s, t, lam)
    if estimator == "two_step":
        tp = TuningParams(lam, 0.0 if alpha is None else float(alpha))
        return two_step(
            s,
            target.resolve(p, s),
            tp,
            glasso_max_iter=glasso_max_iter,
            glasso_tol=glasso_tol,
            w=w,
        )
    gp = GenTuningParams(0.0 if alpha is None else float(alpha), lam)
    t = target.resolve(p, s)
    return generalized(s, t, t, gp)


def _fold_cov(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return sample_cov(x[mask])


def _rho_cache(
    s_train: np.ndarray,
    rhos: np.ndarray,
    max_iter: int,
    tol: float,
) -> dict[float, np.ndarray]:
    """Working covariances for a descending penalty path, warm-started."""
    cache: dict[float, np.ndarray] = {}
    w = None
    for rho in sorted(set(float(r) for r in rhos), reverse=True):
        fit = glasso_mod.glasso_fit(s_train, rho, max_iter=max_iter, tol=tol, w_init=w)
        if not fit.converged:
            continue  # leave the point uncached; it will fail with a clear error
        cache[rho] = fit.w
        w = fit.w
    return cache


def grid_search(
    x: np.ndarray,
    estimator: str,
    target: TargetSpec,
    cfg: CvConfig | None = None,
    glasso_max_iter: int = glasso_mod.DEFAULT_MAX_ITER,
    glasso_tol: float = glasso_mod.DEFAULT_TOL,
) -> CvResult:
    """Exhaustive cross-validated search over the tuning grid.

    Maximizes the mean held-out log-likelihood; exact score ties go to the
    larger ``lam`` (then larger ``alpha``), favoring the stronger
    regularization.
    """
    if estimator not in ESTIMATOR_IDS:
        raise InvalidInput(f"unknown estimator id {estimator!r}")
    cfg = cfg or CvConfig()
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidInput("x must be a 2-D data matrix")
    n = x.shape[0]
    assign = kfold_split(n, cfg.folds, cfg.seed)

    alphas: list[float | None]
    if estimator in _TWO_AXIS:
        alphas = [float(a) for a in cfg.alpha_grid]
    else:
        alphas = [None]
    lams = [float(l) for l in cfg.lambda_grid]

    # per-fold train/held-out covariances and resolved targets
    fold_data = []
    for k in range(cfg.folds):
        mask = assign != k
        s_tr = _fold_cov(x, mask)
        s_ho = _fold_cov(x, ~mask)
        w_cache: dict[float, np.ndarray] = {}
        if estimator == "two_step":
            rhos = np.array(
                [a * l for a in alphas for l in lams if a is not None and a > 0]
            )
            if rhos.size:
                w_cache = _rho_cache(s_tr, rhos, glasso_max_iter, glasso_tol)
        fold_data.append((s_tr, s_ho, w_cache))

    points: list[CvPoint] = []
    point_errors: dict[tuple[float, float | None], str] = {}
    for lam in lams:
        for alpha in alphas:
            scores = []
            err = None
            for s_tr, s_ho, w_cache in fold_data:
                try:
                    w = None
                    if estimator == "two_step" and alpha is not None and alpha > 0:
                        w = w_cache.get(float(alpha * lam))
                    theta = point_estimate(
                        estimator,
                        s_tr,
                        target,
                        lam,
                        alpha,
                        w=w,
                        glasso_max_iter=glasso_max_iter,
                        glasso_tol=glasso_tol,
                    )
                    scores.append(cv_score(theta, s_ho))
                except PrecimatError as exc:
                    err = f"{type(exc).__name__}: {exc}"
                    break
            if err is not None:
                points.append(CvPoint(lam, alpha, np.nan, np.nan, error=err))
                point_errors[(lam, alpha)] = err
            else:
                arr = np.asarray(scores)
                points.append(
                    CvPoint(lam, alpha, float(np.mean(arr)), float(np.std(arr)))
                )

    best = None
    for pt in points:
        if pt.error is not None:
            continue
        if best is None:
            best = pt
            continue
        better = pt.mean_score > best.mean_score
        tie = pt.mean_score == best.mean_score
        if better or (
            tie
            and (
                pt.lam > best.lam
                or (
                    pt.lam == best.lam
                    and (best.alpha is None or (pt.alpha is not None and pt.alpha > best.alpha))
                )
            )
        ):
            best = pt
    if best is None:
        raise SelectionFailure(
            "every grid point failed cross-validation", point_errors=point_errors
        )
    return CvResult(
        best_lambda=best.lam,
        best_alpha=best.alpha,
        points=points,
        fold_assignments=assign,
    )


def refit(
    x: np.ndarray,
    estimator: str,
    target: TargetSpec,
    result: CvResult,
    glasso_max_iter: int = glasso_mod.DEFAULT_MAX_ITER,
    glasso_tol: float = glasso_mod.DEFAULT_TOL,
) -> np.ndarray:
    """Estimate on the full-sample covariance at the selected tuning."""
    s = sample_cov(np.asarray(x, dtype=float))
    return point_estimate(
        estimator,
        s,
        target,
        result.best_lambda,
        result.best_alpha,
        glasso_max_iter=glasso_max_iter,
        glasso_tol=glasso_tol,
    )
