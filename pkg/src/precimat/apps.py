"""Application pipelines: discriminant classification and financial networks.

Two consumers of the precision estimators.  The first plugs an estimate
into the linear discriminant rule and measures misclassification over
repeated random splits.  The second maps asset prices to daily log
returns, estimates the partial-correlation network on rolling windows,
and tracks mean node strength through time.

CSV conventions: tables carry a header row with observations as rows;
price files put an ISO-8601 date in the first column.  All emitted floats
use full repr precision so files are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import (
    InputError,
    InvalidInput,
    InvalidSplit,
    NotPositiveDefinite,
    PrecimatError,
    SpanError,
)
from .estimators import TargetSpec
from .select import CvConfig, grid_search, point_estimate
from .simgen import sample_cov, spawn_rng

_PRUNE_TOL = 1e-4


# ---------------------------------------------------------------------------
# discriminant classification


@dataclass(frozen=True)
class LdaModel:
    """Linear discriminant rule built from class means and a precision
    estimate: assign group 1 when ``a'(x - mu) > 0`` with
    ``a = Theta_hat (mu1 - mu2)`` and ``mu`` the midpoint of the means."""

    mu1: np.ndarray
    mu2: np.ndarray
    a: np.ndarray
    mu: np.ndarray
    theta_hat: np.ndarray


@dataclass(frozen=True)
class LdaProtocol:
    """Split sizes and tuning strategy for the repeated-split experiment.

    ``validation > 0`` holds out that many rows per repetition and picks
    the tuning with the lowest validation misclassification; otherwise the
    tuning is cross-validated on the training rows by held-out likelihood.
    """

    train: int = 40
    validation: int = 40
    cv: CvConfig = field(default_factory=CvConfig)

    def __post_init__(self):
        if self.train < 4:
            raise InvalidInput(f"train size must be at least 4, got {self.train}")
        if self.validation < 0:
            raise InvalidInput("validation size cannot be negative")


def lda_fit(x1: np.ndarray, x2: np.ndarray, theta_hat: np.ndarray) -> LdaModel:
    """Build the discriminant rule from per-class samples and an estimate."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    theta_hat = matcore.check_sym(theta_hat, name="theta_hat")
    p = theta_hat.shape[0]
    if x1.ndim != 2 or x2.ndim != 2 or x1.shape[1] != p or x2.shape[1] != p:
        raise InvalidInput("class samples must be 2-D with columns matching theta_hat")
    if x1.shape[0] < 1 or x2.shape[0] < 1:
        raise InvalidInput("each class needs at least one observation")
    mu1 = x1.mean(axis=0)
    mu2 = x2.mean(axis=0)
    return LdaModel(
        mu1=mu1,
        mu2=mu2,
        a=theta_hat @ (mu1 - mu2),
        mu=(mu1 + mu2) / 2.0,
        theta_hat=theta_hat,
    )


def lda_classify(model: LdaModel, x: np.ndarray) -> int:
    """Label one observation: 1 when the discriminant is strictly positive,
    2 otherwise (ties go to group 2)."""
    x = np.asarray(x, dtype=float)
    if x.shape != model.mu.shape:
        raise InvalidInput("observation dimension does not match the model")
    return 1 if float(model.a @ (x - model.mu)) > 0.0 else 2


def classify_batch(model: LdaModel, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`lda_classify` over the rows of ``x``."""
    x = np.asarray(x, dtype=float)
    scores = (x - model.mu) @ model.a
    return np.where(scores > 0.0, 1, 2)


def pooled_within_cov(x: np.ndarray, labels01: np.ndarray) -> np.ndarray:
    """Sample covariance of rows centered by their own class mean."""
    centered = x.copy()
    for g in (0, 1):
        mask = labels01 == g
        centered[mask] -= x[mask].mean(axis=0)
    return sample_cov(centered)


def _binary_labels(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    classes = np.unique(labels)
    if classes.size != 2:
        raise InvalidInput(f"need exactly two classes, got {classes.size}")
    return (labels == classes[1]).astype(np.int64), classes


def _rate_for_tuning(
    estimator: str,
    target: TargetSpec,
    s_train: np.ndarray,
    x_tr: np.ndarray,
    y_tr: np.ndarray,
    x_eval: np.ndarray,
    y_eval: np.ndarray,
    lam: float,
    alpha: float | None,
) -> float:
    theta = point_estimate(estimator, s_train, target, lam, alpha)
    model = lda_fit(x_tr[y_tr == 0], x_tr[y_tr == 1], theta)
    pred = classify_batch(model, x_eval)
    return float(np.mean(pred != (y_eval + 1)))


def misclassification_experiment(
    x: np.ndarray,
    labels: np.ndarray,
    estimator: str,
    target: TargetSpec,
    protocol: LdaProtocol,
    repetitions: int,
    seed: int,
) -> np.ndarray:
    """Per-repetition test misclassification rates under random splits.

    Every repetition draws ``protocol.train`` training rows (plus the
    optional validation block); the remainder is the test set.  The class
    with the ``np.unique``-smaller label plays group 1.  Deterministic
    given ``seed``; repetition r uses an independent substream.
    """
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] != labels.shape[0]:
        raise InvalidInput("x and labels must align row-wise")
    if repetitions < 1:
        raise InvalidInput("repetitions must be positive")
    y, _ = _binary_labels(labels)
    n = x.shape[0]
    need = protocol.train + protocol.validation
    if n <= need:
        raise InvalidSplit(f"need more than {need} rows, got {n}")

    alphas: list[float | None]
    if estimator in ("two_step", "generalized"):
        alphas = [float(a) for a in protocol.cv.alpha_grid]
    else:
        alphas = [None]
    lams = [float(l) for l in protocol.cv.lambda_grid]

    rates = np.empty(repetitions)
    for rep in range(repetitions):
        rng = spawn_rng(seed, rep)
        perm = rng.permutation(n)
        tr = perm[: protocol.train]
        va = perm[protocol.train : need]
        te = perm[need:]
        y_tr = y[tr]
        if np.sum(y_tr == 0) < 2 or np.sum(y_tr == 1) < 2:
            raise InvalidSplit(
                f"repetition {rep}: a class has fewer than 2 training rows"
            )
        x_tr = x[tr]
        s_train = pooled_within_cov(x_tr, y_tr)

        if protocol.validation > 0:
            best = None
            for lam in lams:
                for alpha in alphas:
                    try:
                        rate = _rate_for_tuning(
                            estimator, target, s_train, x_tr, y_tr, x[va], y[va], lam, alpha
                        )
                    except (InvalidInput, NotPositiveDefinite):
                        continue
                    key = (-rate, lam, -1.0 if alpha is None else alpha)
                    if best is None or key > best[0]:
                        best = (key, lam, alpha)
            if best is None:
                raise InvalidSplit(f"repetition {rep}: no tuning point succeeded")
            lam_star, alpha_star = best[1], best[2]
        else:
            centered = x_tr.copy()
            for g in (0, 1):
                mask = y_tr == g
                centered[mask] -= x_tr[mask].mean(axis=0)
            res = grid_search(centered, estimator, target, protocol.cv)
            lam_star, alpha_star = res.best_lambda, res.best_alpha

        theta = point_estimate(estimator, s_train, target, lam_star, alpha_star)
        model = lda_fit(x_tr[y_tr == 0], x_tr[y_tr == 1], theta)
        pred = classify_batch(model, x[te])
        rates[rep] = float(np.mean(pred != (y[te] + 1)))
    return rates


def rates_to_csv(rates: np.ndarray, path: str) -> None:
    """Write ``repetition,rate`` rows."""
    with open(path, "w") as fh:
        fh.write("repetition,rate\n")
        for i, r in enumerate(np.asarray(rates, dtype=float)):
            fh.write(f"{i},{float(r)!r}\n")


# ---------------------------------------------------------------------------
# financial networks


@dataclass(frozen=True)
class EdgeList:
    """Pruned partial-correlation graph: node labels plus (i, j, weight)
    triples with i < j and weights in [-1, 1]."""

    nodes: list[str]
    edges: list[tuple[int, int, float]]

    def strengths(self, signed: bool = False) -> np.ndarray:
        """Per-node strength: sum of incident edge weights, absolute by
        default (the signed variant can cancel on balanced graphs)."""
        out = np.zeros(len(self.nodes))
        for i, j, w in self.edges:
            v = w if signed else abs(w)
            out[i] += v
            out[j] += v
        return out

    def to_csv(self, path: str) -> None:
        """Write ``source,target,weight`` rows using node labels."""
        with open(path, "w") as fh:
            fh.write("source,target,weight\n")
            for i, j, w in self.edges:
                fh.write(f"{self.nodes[i]},{self.nodes[j]},{float(w)!r}\n")


@dataclass(frozen=True)
class StrengthSeries:
    """Mean node strength per rolling window; skipped windows kept aside."""

    window_starts: list[np.datetime64]
    mean_strength: np.ndarray
    skipped: list[np.datetime64]

    def to_csv(self, path: str) -> None:
        """Write ``window_start,mean_strength`` rows (ISO dates)."""
        with open(path, "w") as fh:
            fh.write("window_start,mean_strength\n")
            for d, v in zip(self.window_starts, self.mean_strength):
                fh.write(f"{np.datetime_as_string(np.datetime64(d, 'D'))},{float(v)!r}\n")


def log_returns(prices: np.ndarray) -> np.ndarray:
    """Daily log returns ``ln(p[t+1] / p[t])`` per column."""
    prices = np.asarray(prices, dtype=float)
    if prices.ndim == 1:
        prices = prices[:, None]
    if prices.ndim != 2 or prices.shape[0] < 2:
        raise InvalidInput("prices must have at least two time rows")
    bad = ~(prices > 0) | ~np.isfinite(prices)
    if np.any(bad):
        r, c = map(int, np.argwhere(bad)[0])
        raise InvalidInput(f"nonpositive or non-finite price at row {r}, column {c}")
    return np.log(prices[1:] / prices[:-1])


def partial_correlations(
    theta_hat: np.ndarray,
    labels: list[str] | None = None,
    prune_tol: float = _PRUNE_TOL,
) -> EdgeList:
    """Edge weights ``rho_ij = -theta_ij / sqrt(theta_ii * theta_jj)``,
    omitting entries with ``|rho| < prune_tol``."""
    theta_hat = matcore.check_sym(theta_hat, name="theta_hat")
    if matcore.min_eigenvalue(theta_hat) <= 0:
        raise NotPositiveDefinite("partial correlations need a PD precision matrix")
    p = theta_hat.shape[0]
    if labels is None:
        labels = [f"v{i}" for i in range(p)]
    elif len(labels) != p:
        raise InvalidInput("label count does not match the matrix dimension")
    d = 1.0 / np.sqrt(np.diag(theta_hat))
    rho = -theta_hat * d[:, None] * d[None, :]
    edges = [
        (i, j, float(rho[i, j]))
        for i in range(p)
        for j in range(i + 1, p)
        if abs(rho[i, j]) >= prune_tol
    ]
    return EdgeList(nodes=list(labels), edges=edges)


def rolling_strength(
    dates: np.ndarray,
    returns: np.ndarray,
    estimator: str,
    target: TargetSpec,
    cfg: CvConfig | None = None,
    window_days: int = 365,
    shift_days: int = 30,
    labels: list[str] | None = None,
    signed: bool = False,
    prune_tol: float = _PRUNE_TOL,
) -> StrengthSeries:
    """Mean node strength of the CV-tuned partial-correlation network on
    rolling windows of ``window_days`` calendar days, advanced by
    ``shift_days``.  Windows with fewer than p+1 rows, or whose fit fails
    outright (degenerate covariance, no valid grid point), are skipped and
    reported in ``skipped``."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    returns = np.asarray(returns, dtype=float)
    if returns.ndim != 2 or dates.shape[0] != returns.shape[0]:
        raise InvalidInput("dates and returns must align row-wise")
    if np.any(np.diff(dates.astype("int64")) < 0):
        raise InvalidInput("dates must be non-decreasing")
    if window_days < 2 or shift_days < 1:
        raise InvalidInput("window and shift must be positive durations")
    p = returns.shape[1]
    cfg = cfg or CvConfig()
    span_ok = dates[-1] - dates[0] >= np.timedelta64(window_days - 1, "D")
    if not span_ok:
        raise SpanError("data span is shorter than one window")

    window = np.timedelta64(window_days, "D")
    shift = np.timedelta64(shift_days, "D")
    starts: list[np.datetime64] = []
    start = dates[0]
    while start + window <= dates[-1] + np.timedelta64(1, "D"):
        starts.append(start)
        start = start + shift

    kept: list[np.datetime64] = []
    values: list[float] = []
    skipped: list[np.datetime64] = []
    for start in starts:
        mask = (dates >= start) & (dates < start + window)
        rows = returns[mask]
        if rows.shape[0] < p + 1:
            skipped.append(start)
            continue
        centered = rows - rows.mean(axis=0)
        try:
            res = grid_search(centered, estimator, target, cfg)
            theta = point_estimate(
                estimator, sample_cov(centered), target, res.best_lambda, res.best_alpha
            )
            edges = partial_correlations(theta, labels=labels, prune_tol=prune_tol)
        except PrecimatError:
            skipped.append(start)
            continue
        values.append(float(np.mean(edges.strengths(signed=signed))))
        kept.append(start)
    return StrengthSeries(
        window_starts=kept, mean_strength=np.asarray(values), skipped=skipped
    )


# ---------------------------------------------------------------------------
# CSV input


def _parse_float(token: str, row: int, col: int, path: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise InputError(
            f"{path}: cannot parse {token!r} as a number at row {row}, column {col}",
            row=row,
            col=col,
        ) from None


def read_matrix_csv(path: str, require_symmetric: bool = True) -> np.ndarray:
    """Read a square numeric matrix (no header) and verify symmetry."""
    rows: list[list[float]] = []
    with open(path) as fh:
        for r, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            rows.append(
                [_parse_float(tok, r, c, path) for c, tok in enumerate(line.split(","))]
            )
    if not rows:
        raise InputError(f"{path}: empty matrix file", row=0, col=0)
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise InputError(f"{path}: ragged row", row=r, col=len(row))
    m = np.asarray(rows, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise InputError(
            f"{path}: matrix is {m.shape[0]}x{m.shape[1]}, expected square",
            row=m.shape[0] - 1,
            col=m.shape[1] - 1,
        )
    if require_symmetric and np.max(np.abs(m - m.T)) > 1e-8:
        i, j = map(int, np.argwhere(np.abs(m - m.T) > 1e-8)[0])
        raise InputError(f"{path}: matrix is not symmetric", row=i, col=j)
    return matcore.symmetrize(m)


def read_table_csv(path: str) -> tuple[list[str], np.ndarray]:
    """Read a headed numeric table: first row names, later rows observations."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise InputError(f"{path}: need a header and at least one row", row=0, col=0)
    header = lines[0].split(",")
    data = []
    for r, line in enumerate(lines[1:], start=1):
        toks = line.split(",")
        if len(toks) != len(header):
            raise InputError(f"{path}: ragged row", row=r, col=len(toks))
        data.append([_parse_float(t, r, c, path) for c, t in enumerate(toks)])
    return header, np.asarray(data, dtype=float)


def read_prices_csv(path: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a price table whose first column is an ISO-8601 date."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 3:
        raise InputError(f"{path}: need a header and at least two rows", row=0, col=0)
    header = lines[0].split(",")
    tickers = header[1:]
    dates, data = [], []
    for r, line in enumerate(lines[1:], start=1):
        toks = line.split(",")
        if len(toks) != len(header):
            raise InputError(f"{path}: ragged row", row=r, col=len(toks))
        try:
            dates.append(np.datetime64(toks[0], "D"))
        except ValueError:
            raise InputError(f"{path}: bad date {toks[0]!r}", row=r, col=0) from None
        data.append([_parse_float(t, r, c + 1, path) for c, t in enumerate(toks[1:])])
    return np.asarray(dates), np.asarray(data, dtype=float), tickers


def read_labeled_csv(path: str, label_col: int = -1) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a headed table whose ``label_col`` holds class labels; all other
    columns must be numeric.  Returns (features, labels, feature names)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise InputError(f"{path}: need a header and at least one row", row=0, col=0)
    header = lines[0].split(",")
    ncol = len(header)
    lab = label_col % ncol
    feats, labels = [], []
    for r, line in enumerate(lines[1:], start=1):
        toks = line.split(",")
        if len(toks) != ncol:
            raise InputError(f"{path}: ragged row", row=r, col=len(toks))
        labels.append(toks[lab])
        feats.append(
            [
                _parse_float(t, r, c, path)
                for c, t in enumerate(toks)
                if c != lab
            ]
        )
    names = [h for c, h in enumerate(header) if c != lab]
    return np.asarray(feats, dtype=float), np.asarray(labels), names


def drop_constant_columns(x: np.ndarray, names: list[str] | None = None):
    """Remove zero-variance columns; returns (reduced x, kept indices[, names])."""
    x = np.asarray(x, dtype=float)
    keep = np.where(np.std(x, axis=0) > 0)[0]
    if names is None:
        return x[:, keep], keep
    return x[:, keep], keep, [names[i] for i in keep]
