"""Batch command-line driver.

Subcommands: ``simulate`` (replicated loss study over synthetic networks),
``estimate`` (one fit from a CSV, fixed or CV-tuned), ``cv`` (score
surface export), ``lda`` (repeated-split misclassification, plus a
tuning-sweep mode), ``network`` (rolling partial-correlation strength
from a price table), ``dualcheck`` (box-constrained dual vs. closed-form
comparison table).

Every command is a pure function of its JSON config plus input files:
outputs are plain CSV with repr-precision floats, tasks own
counter-derived seeds, and aggregation is keyed by task index, so results
are byte-identical for any ``--threads`` value.  Failures exit nonzero
with a one-line JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .apps import (
    LdaProtocol,
    classify_batch,
    drop_constant_columns,
    lda_fit,
    log_returns,
    misclassification_experiment,
    partial_correlations,
    pooled_within_cov,
    rates_to_csv,
    read_labeled_csv,
    read_matrix_csv,
    read_prices_csv,
    read_table_csv,
    rolling_strength,
)
from .dualcheck import (
    DualProblem,
    DualSolverConfig,
    compare_with_two_step,
    solve_dual_numeric,
    u_difference,
)
from .errors import InvalidInput, PrecimatError, UnsupportedDimension
from .estimators import TargetSpec, TuningParams
from .metrics import LossReport, all_losses
from .select import (
    CvConfig,
    ESTIMATOR_IDS,
    default_alpha_grid,
    default_lambda_grid,
    grid_search,
    point_estimate,
)
from .simgen import (
    NetworkModel,
    NetworkSpec,
    make_network,
    sample_cov,
    sample_mvn,
    save_matrix_csv,
)


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise InvalidInput(f"{where}: unknown config keys {sorted(unknown)}")


def _parse_target(v) -> TargetSpec:
    if isinstance(v, str):
        return TargetSpec(kind=v)
    if isinstance(v, dict):
        return TargetSpec.from_dict(v)
    raise InvalidInput(f"target must be a kind string or object, got {v!r}")


def _target_dict(t: TargetSpec):
    d = t.to_dict()
    return d["kind"] if list(d) == ["kind"] else d


def _parse_grid(v, default_fn) -> np.ndarray:
    if v is None:
        return default_fn()
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise InvalidInput("grids must be flat lists of numbers")
    return arr


def _check_estimator(v: str) -> str:
    if v not in ESTIMATOR_IDS:
        raise InvalidInput(f"unknown estimator id {v!r}; choose from {ESTIMATOR_IDS}")
    return v


def _derived_seed(*parts: int) -> int:
    """Stable 32-bit seed for components that take a single integer."""
    return int(np.random.SeedSequence(list(map(int, parts))).generate_state(1)[0])


# ---------------------------------------------------------------------------
# configs


@dataclass(frozen=True)
class SimulateConfig:
    networks: tuple[int, ...]
    p: int
    n: int
    replications: int
    methods: tuple[str, ...]
    targets: tuple[TargetSpec, ...]
    folds: int = 5
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    alpha_grid: np.ndarray = field(default_factory=default_alpha_grid)
    seed: int = 0

    _KEYS = {
        "networks", "p", "n", "replications", "methods", "targets",
        "folds", "lambda_grid", "alpha_grid", "seed",
    }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulateConfig":
        _reject_unknown(d, cls._KEYS, "simulate")
        for key in ("networks", "p", "n", "replications", "methods", "targets"):
            if key not in d:
                raise InvalidInput(f"simulate: missing config key {key!r}")
        nets = tuple(int(k) for k in d["networks"])
        for k in nets:
            NetworkModel.from_id(k)
        methods = tuple(_check_estimator(m) for m in d["methods"])
        if not methods:
            raise InvalidInput("simulate: methods list is empty")
        targets = tuple(_parse_target(t) for t in d["targets"])
        if not targets:
            raise InvalidInput("simulate: targets list is empty")
        if int(d["replications"]) < 1:
            raise InvalidInput("simulate: replications must be positive")
        return cls(
            networks=nets,
            p=int(d["p"]),
            n=int(d["n"]),
            replications=int(d["replications"]),
            methods=methods,
            targets=targets,
            folds=int(d.get("folds", 5)),
            lambda_grid=_parse_grid(d.get("lambda_grid"), default_lambda_grid),
            alpha_grid=_parse_grid(d.get("alpha_grid"), default_alpha_grid),
            seed=int(d.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "networks": list(self.networks),
            "p": self.p,
            "n": self.n,
            "replications": self.replications,
            "methods": list(self.methods),
            "targets": [_target_dict(t) for t in self.targets],
            "folds": self.folds,
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "alpha_grid": [float(v) for v in self.alpha_grid],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EstimateConfig:
    input: str
    estimator: str
    target: TargetSpec
    input_kind: str = "data"
    lam: float | None = None
    alpha: float | None = None
    cv: bool = False
    folds: int = 5
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    alpha_grid: np.ndarray = field(default_factory=default_alpha_grid)
    prune_tol: float = 1e-4
    seed: int = 0

    _KEYS = {
        "input", "estimator", "target", "input_kind", "lam", "alpha", "cv",
        "folds", "lambda_grid", "alpha_grid", "prune_tol", "seed",
    }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimateConfig":
        _reject_unknown(d, cls._KEYS, "estimate")
        for key in ("input", "estimator", "target"):
            if key not in d:
                raise InvalidInput(f"estimate: missing config key {key!r}")
        kind = d.get("input_kind", "data")
        if kind not in ("data", "covariance"):
            raise InvalidInput("estimate: input_kind must be 'data' or 'covariance'")
        cfg = cls(
            input=str(d["input"]),
            estimator=_check_estimator(d["estimator"]),
            target=_parse_target(d["target"]),
            input_kind=kind,
            lam=None if d.get("lam") is None else float(d["lam"]),
            alpha=None if d.get("alpha") is None else float(d["alpha"]),
            cv=bool(d.get("cv", False)),
            folds=int(d.get("folds", 5)),
            lambda_grid=_parse_grid(d.get("lambda_grid"), default_lambda_grid),
            alpha_grid=_parse_grid(d.get("alpha_grid"), default_alpha_grid),
            prune_tol=float(d.get("prune_tol", 1e-4)),
            seed=int(d.get("seed", 0)),
        )
        if not cfg.cv and cfg.lam is None:
            raise InvalidInput("estimate: either fix 'lam' or set 'cv': true")
        if cfg.cv and cfg.input_kind == "covariance":
            raise InvalidInput("estimate: cv tuning needs observation data, not a covariance")
        return cfg

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "estimator": self.estimator,
            "target": _target_dict(self.target),
            "input_kind": self.input_kind,
            "lam": self.lam,
            "alpha": self.alpha,
            "cv": self.cv,
            "folds": self.folds,
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "alpha_grid": [float(v) for v in self.alpha_grid],
            "prune_tol": self.prune_tol,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CvCommandConfig:
    input: str
    estimator: str
    target: TargetSpec
    folds: int = 5
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    alpha_grid: np.ndarray = field(default_factory=default_alpha_grid)
    seed: int = 0

    _KEYS = {"input", "estimator", "target", "folds", "lambda_grid", "alpha_grid", "seed"}

    @classmethod
    def from_dict(cls, d: dict) -> "CvCommandConfig":
        _reject_unknown(d, cls._KEYS, "cv")
        for key in ("input", "estimator", "target"):
            if key not in d:
                raise InvalidInput(f"cv: missing config key {key!r}")
        return cls(
            input=str(d["input"]),
            estimator=_check_estimator(d["estimator"]),
            target=_parse_target(d["target"]),
            folds=int(d.get("folds", 5)),
            lambda_grid=_parse_grid(d.get("lambda_grid"), default_lambda_grid),
            alpha_grid=_parse_grid(d.get("alpha_grid"), default_alpha_grid),
            seed=int(d.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "estimator": self.estimator,
            "target": _target_dict(self.target),
            "folds": self.folds,
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "alpha_grid": [float(v) for v in self.alpha_grid],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class LdaConfig:
    input: str
    estimator: str
    target: TargetSpec
    label_col: int = -1
    drop_constant: bool = True
    mode: str = "rates"
    repetitions: int = 100
    train: int = 40
    validation: int = 40
    folds: int = 5
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    alpha_grid: np.ndarray = field(default_factory=default_alpha_grid)
    sweep_methods: tuple[str, ...] = ()
    sweep_count: int = 50
    sweep_min: float = 0.1
    sweep_max: float = 0.9
    sweep_alpha: float = 0.2
    seed: int = 0

    _KEYS = {
        "input", "estimator", "target", "label_col", "drop_constant", "mode",
        "repetitions", "train", "validation", "folds", "lambda_grid",
        "alpha_grid", "sweep_methods", "sweep_count", "sweep_min",
        "sweep_max", "sweep_alpha", "seed",
    }

    @classmethod
    def from_dict(cls, d: dict) -> "LdaConfig":
        _reject_unknown(d, cls._KEYS, "lda")
        for key in ("input", "estimator", "target"):
            if key not in d:
                raise InvalidInput(f"lda: missing config key {key!r}")
        mode = d.get("mode", "rates")
        if mode not in ("rates", "sweep"):
            raise InvalidInput("lda: mode must be 'rates' or 'sweep'")
        sweep = tuple(_check_estimator(m) for m in d.get("sweep_methods", []))
        return cls(
            input=str(d["input"]),
            estimator=_check_estimator(d["estimator"]),
            target=_parse_target(d["target"]),
            label_col=int(d.get("label_col", -1)),
            drop_constant=bool(d.get("drop_constant", True)),
            mode=mode,
            repetitions=int(d.get("repetitions", 100)),
            train=int(d.get("train", 40)),
            validation=int(d.get("validation", 40)),
            folds=int(d.get("folds", 5)),
            lambda_grid=_parse_grid(d.get("lambda_grid"), default_lambda_grid),
            alpha_grid=_parse_grid(d.get("alpha_grid"), default_alpha_grid),
            sweep_methods=sweep,
            sweep_count=int(d.get("sweep_count", 50)),
            sweep_min=float(d.get("sweep_min", 0.1)),
            sweep_max=float(d.get("sweep_max", 0.9)),
            sweep_alpha=float(d.get("sweep_alpha", 0.2)),
            seed=int(d.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "estimator": self.estimator,
            "target": _target_dict(self.target),
            "label_col": self.label_col,
            "drop_constant": self.drop_constant,
            "mode": self.mode,
            "repetitions": self.repetitions,
            "train": self.train,
            "validation": self.validation,
            "folds": self.folds,
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "alpha_grid": [float(v) for v in self.alpha_grid],
            "sweep_methods": list(self.sweep_methods),
            "sweep_count": self.sweep_count,
            "sweep_min": self.sweep_min,
            "sweep_max": self.sweep_max,
            "sweep_alpha": self.sweep_alpha,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class NetworkConfig:
    input: str
    estimator: str
    target: TargetSpec
    window_days: int = 365
    shift_days: int = 30
    folds: int = 5
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    alpha_grid: np.ndarray = field(default_factory=default_alpha_grid)
    signed: bool = False
    prune_tol: float = 1e-4
    yearly: bool = True
    seed: int = 0

    _KEYS = {
        "input", "estimator", "target", "window_days", "shift_days", "folds",
        "lambda_grid", "alpha_grid", "signed", "prune_tol", "yearly", "seed",
    }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        _reject_unknown(d, cls._KEYS, "network")
        for key in ("input", "estimator", "target"):
            if key not in d:
                raise InvalidInput(f"network: missing config key {key!r}")
        return cls(
            input=str(d["input"]),
            estimator=_check_estimator(d["estimator"]),
            target=_parse_target(d["target"]),
            window_days=int(d.get("window_days", 365)),
            shift_days=int(d.get("shift_days", 30)),
            folds=int(d.get("folds", 5)),
            lambda_grid=_parse_grid(d.get("lambda_grid"), default_lambda_grid),
            alpha_grid=_parse_grid(d.get("alpha_grid"), default_alpha_grid),
            signed=bool(d.get("signed", False)),
            prune_tol=float(d.get("prune_tol", 1e-4)),
            yearly=bool(d.get("yearly", True)),
            seed=int(d.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "estimator": self.estimator,
            "target": _target_dict(self.target),
            "window_days": self.window_days,
            "shift_days": self.shift_days,
            "folds": self.folds,
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "alpha_grid": [float(v) for v in self.alpha_grid],
            "signed": self.signed,
            "prune_tol": self.prune_tol,
            "yearly": self.yearly,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class DualcheckConfig:
    p: int = 3
    iterations: int = 15
    lam: float = 0.6
    alpha: float = 0.4
    n: int = 200
    network: int = 1
    seed: int = 0

    _KEYS = {"p", "iterations", "lam", "alpha", "n", "network", "seed"}

    @classmethod
    def from_dict(cls, d: dict) -> "DualcheckConfig":
        _reject_unknown(d, cls._KEYS, "dualcheck")
        p = int(d.get("p", 3))
        if p not in (2, 3):
            raise UnsupportedDimension(f"dualcheck table supports p in {{2, 3}}, got {p}")
        NetworkModel.from_id(d.get("network", 1))
        return cls(
            p=p,
            iterations=int(d.get("iterations", 15)),
            lam=float(d.get("lam", 0.6)),
            alpha=float(d.get("alpha", 0.4)),
            n=int(d.get("n", 200)),
            network=int(d.get("network", 1)),
            seed=int(d.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "iterations": self.iterations,
            "lam": self.lam,
            "alpha": self.alpha,
            "n": self.n,
            "network": self.network,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# simulate


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _sim_cell(
    cfg: SimulateConfig, net_id: int, method: str, target: TargetSpec, rep: int
):
    """One (network, method, target, replication) evaluation."""
    truth = make_network(
        NetworkSpec(NetworkModel.from_id(net_id), cfg.p, seed=cfg.seed)
    )
    x = sample_mvn(
        truth, cfg.n, np.random.SeedSequence([cfg.seed, net_id, rep])
    )
    cv = CvConfig(
        folds=cfg.folds,
        lambda_grid=cfg.lambda_grid,
        alpha_grid=cfg.alpha_grid,
        seed=_derived_seed(cfg.seed, net_id, rep, 1),
    )
    res = grid_search(x, method, target, cv)
    theta = point_estimate(
        method, sample_cov(x), target, res.best_lambda, res.best_alpha
    )
    return all_losses(truth.sigma, truth.theta, theta)


def cmd_simulate(cfg: SimulateConfig, out_dir: str, threads: int = 1) -> list[str]:
    """Replicated loss study; writes ``losses.csv``.

    Detail rows carry per-replication losses; each block closes with a
    ``replication=mean`` row carrying means and (for R >= 2) sample SDs
    over the successful replications.  Failures occupy their row's error
    column and never abort the run.
    """
    cells = [
        (net, method, t_idx)
        for net in cfg.networks
        for method in cfg.methods
        for t_idx in range(len(cfg.targets))
    ]
    tasks = [
        (ci, rep) for ci in range(len(cells)) for rep in range(cfg.replications)
    ]

    def run(task):
        ci, rep = task
        net, method, t_idx = cells[ci]
        try:
            return _sim_cell(cfg, net, method, cfg.targets[t_idx], rep)
        except PrecimatError as exc:
            return f"{type(exc).__name__}: {exc}"

    results: dict[tuple[int, int], LossReport | str] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for task, out in zip(tasks, pool.map(run, tasks)):
                results[task] = out
    else:
        for task in tasks:
            results[task] = run(task)

    path = os.path.join(out_dir, "losses.csv")
    with open(path, "w") as fh:
        fh.write(
            "method,target,network,p,replication,kl,l2,ql,sp,"
            "kl_sd,l2_sd,ql_sd,sp_sd,error\n"
        )
        for ci, (net, method, t_idx) in enumerate(cells):
            label = cfg.targets[t_idx].kind
            good: list[LossReport] = []
            for rep in range(cfg.replications):
                out = results[(ci, rep)]
                base = f"{method},{label},{net},{cfg.p},{rep}"
                if isinstance(out, str):
                    fh.write(f"{base},,,,,,,,,{out}\n")
                else:
                    good.append(out)
                    fh.write(
                        f"{base},{out.kl!r},{out.l2!r},{out.ql!r},{out.sp!r},,,,,\n"
                    )
            base = f"{method},{label},{net},{cfg.p},mean"
            if not good:
                fh.write(f"{base},,,,,,,,,all replications failed\n")
                continue
            arr = np.array([[r.kl, r.l2, r.ql, r.sp] for r in good])
            means = ",".join(repr(float(v)) for v in arr.mean(axis=0))
            if len(good) >= 2:
                sds = ",".join(repr(float(v)) for v in arr.std(axis=0, ddof=1))
            else:
                sds = ",,,"
            fh.write(f"{base},{means},{sds},\n")
    return [path]


# ---------------------------------------------------------------------------
# estimate / cv


def _load_observations(path: str):
    header, x = read_table_csv(path)
    return header, x - x.mean(axis=0)


def cmd_estimate(cfg: EstimateConfig, out_dir: str, threads: int = 1) -> list[str]:
    """Single fit; writes ``theta.csv`` and ``edges.csv``."""
    if cfg.input_kind == "covariance":
        s = read_matrix_csv(cfg.input)
        labels = [f"v{i}" for i in range(s.shape[0])]
        lam, alpha = cfg.lam, cfg.alpha
    else:
        labels, x = _load_observations(cfg.input)
        s = sample_cov(x)
        if cfg.cv:
            cv = CvConfig(
                folds=cfg.folds,
                lambda_grid=cfg.lambda_grid,
                alpha_grid=cfg.alpha_grid,
                seed=cfg.seed,
            )
            res = grid_search(x, cfg.estimator, cfg.target, cv)
            lam, alpha = res.best_lambda, res.best_alpha
        else:
            lam, alpha = cfg.lam, cfg.alpha
    theta = point_estimate(cfg.estimator, s, cfg.target, lam, alpha)
    theta_path = os.path.join(out_dir, "theta.csv")
    save_matrix_csv(theta, theta_path)
    edges_path = os.path.join(out_dir, "edges.csv")
    partial_correlations(theta, labels=labels, prune_tol=cfg.prune_tol).to_csv(
        edges_path
    )
    return [theta_path, edges_path]


def cmd_cv(cfg: CvCommandConfig, out_dir: str, threads: int = 1) -> list[str]:
    """Score-surface export; writes ``surface.csv`` and ``best.json``."""
    _, x = _load_observations(cfg.input)
    cv = CvConfig(
        folds=cfg.folds,
        lambda_grid=cfg.lambda_grid,
        alpha_grid=cfg.alpha_grid,
        seed=cfg.seed,
    )
    res = grid_search(x, cfg.estimator, cfg.target, cv)
    surface_path = os.path.join(out_dir, "surface.csv")
    res.surface_to_csv(surface_path)
    best_path = os.path.join(out_dir, "best.json")
    with open(best_path, "w") as fh:
        json.dump({"lambda": res.best_lambda, "alpha": res.best_alpha}, fh)
        fh.write("\n")
    return [surface_path, best_path]


# ---------------------------------------------------------------------------
# lda


def _sweep_rates(cfg: LdaConfig, x: np.ndarray, labels: np.ndarray) -> list[str]:
    """Mean misclassification per (method, tuning value) at fixed splits."""
    classes = np.unique(labels)
    if classes.size != 2:
        raise InvalidInput(f"need exactly two classes, got {classes.size}")
    y = (labels == classes[1]).astype(np.int64)
    n = x.shape[0]
    if n <= cfg.train:
        raise InvalidInput("sweep needs more rows than the training size")
    methods = cfg.sweep_methods or (cfg.estimator,)
    rhos = np.linspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_count)

    splits = []
    for rep in range(cfg.repetitions):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, rep]))
        perm = rng.permutation(n)
        tr, te = perm[: cfg.train], perm[cfg.train :]
        if np.sum(y[tr] == 0) < 2 or np.sum(y[tr] == 1) < 2:
            continue  # unusable draw; deterministic, so identical on re-runs
        s_tr = pooled_within_cov(x[tr], y[tr])
        splits.append((tr, te, s_tr))
    if not splits:
        raise InvalidInput("no usable training split was drawn")

    lines = []
    for method in methods:
        alpha = cfg.sweep_alpha if method in ("two_step", "generalized") else None
        for rho in rhos:
            rates = []
            for tr, te, s_tr in splits:
                try:
                    theta = point_estimate(method, s_tr, cfg.target, float(rho), alpha)
                except PrecimatError:
                    continue
                model = lda_fit(x[tr][y[tr] == 0], x[tr][y[tr] == 1], theta)
                pred = classify_batch(model, x[te])
                rates.append(float(np.mean(pred != (y[te] + 1))))
            mean_rate = "" if not rates else repr(float(np.mean(rates)))
            lines.append(f"{method},{float(rho)!r},{mean_rate}")
    return lines


def cmd_lda(cfg: LdaConfig, out_dir: str, threads: int = 1) -> list[str]:
    """Misclassification study; writes ``rates.csv`` or ``sweep.csv``."""
    x, labels, _ = read_labeled_csv(cfg.input, label_col=cfg.label_col)
    if cfg.drop_constant:
        x, _ = drop_constant_columns(x)
    if cfg.mode == "sweep":
        path = os.path.join(out_dir, "sweep.csv")
        with open(path, "w") as fh:
            fh.write("method,rho,mean_rate\n")
            for line in _sweep_rates(cfg, x, labels):
                fh.write(line + "\n")
        return [path]
    protocol = LdaProtocol(
        train=cfg.train,
        validation=cfg.validation,
        cv=CvConfig(
            folds=cfg.folds,
            lambda_grid=cfg.lambda_grid,
            alpha_grid=cfg.alpha_grid,
            seed=_derived_seed(cfg.seed, 2),
        ),
    )
    rates = misclassification_experiment(
        x, labels, cfg.estimator, cfg.target, protocol, cfg.repetitions, cfg.seed
    )
    path = os.path.join(out_dir, "rates.csv")
    rates_to_csv(rates, path)
    return [path]


# ---------------------------------------------------------------------------
# network


def cmd_network(cfg: NetworkConfig, out_dir: str, threads: int = 1) -> list[str]:
    """Rolling-strength series plus per-year edge lists from a price table."""
    dates, prices, tickers = read_prices_csv(cfg.input)
    returns = log_returns(prices)
    rdates = dates[1:]
    cv = CvConfig(
        folds=cfg.folds,
        lambda_grid=cfg.lambda_grid,
        alpha_grid=cfg.alpha_grid,
        seed=cfg.seed,
    )
    series = rolling_strength(
        rdates,
        returns,
        cfg.estimator,
        cfg.target,
        cv,
        window_days=cfg.window_days,
        shift_days=cfg.shift_days,
        labels=tickers,
        signed=cfg.signed,
        prune_tol=cfg.prune_tol,
    )
    strength_path = os.path.join(out_dir, "strength.csv")
    series.to_csv(strength_path)
    skipped_path = os.path.join(out_dir, "skipped_windows.csv")
    with open(skipped_path, "w") as fh:
        fh.write("window_start\n")
        for d in series.skipped:
            fh.write(np.datetime_as_string(np.datetime64(d, "D")) + "\n")
    written = [strength_path, skipped_path]

    if cfg.yearly:
        years = np.unique(rdates.astype("datetime64[Y]"))
        status_lines = []
        p = returns.shape[1]
        for yr in years:
            mask = rdates.astype("datetime64[Y]") == yr
            rows = returns[mask]
            year_str = str(yr)
            if rows.shape[0] < p + 1:
                status_lines.append(f"{year_str},skipped")
                continue
            centered = rows - rows.mean(axis=0)
            try:
                res = grid_search(centered, cfg.estimator, cfg.target, cv)
                theta = point_estimate(
                    cfg.estimator,
                    sample_cov(centered),
                    cfg.target,
                    res.best_lambda,
                    res.best_alpha,
                )
                edges = partial_correlations(
                    theta, labels=tickers, prune_tol=cfg.prune_tol
                )
            except PrecimatError:
                status_lines.append(f"{year_str},skipped")
                continue
            epath = os.path.join(out_dir, f"edges_{year_str}.csv")
            edges.to_csv(epath)
            written.append(epath)
            status_lines.append(f"{year_str},fitted")
        years_path = os.path.join(out_dir, "years.csv")
        with open(years_path, "w") as fh:
            fh.write("year,status\n")
            for line in status_lines:
                fh.write(line + "\n")
        written.append(years_path)
    return written


# ---------------------------------------------------------------------------
# dualcheck


def cmd_dualcheck(cfg: DualcheckConfig, out_dir: str, threads: int = 1) -> list[str]:
    """Dual-vs-closed-form comparison table; writes ``udiff.csv`` and
    ``theta_diff.csv``."""
    truth = make_network(
        NetworkSpec(NetworkModel.from_id(cfg.network), cfg.p, seed=cfg.seed)
    )
    tp = TuningParams(cfg.lam, cfg.alpha)
    off_cols = (
        ["u12_diff"] if cfg.p == 2 else ["u12_diff", "u13_diff", "u23_diff"]
    )
    pairs = [(0, 1)] if cfg.p == 2 else [(0, 1), (0, 2), (1, 2)]

    def run(it: int):
        x = sample_mvn(truth, cfg.n, np.random.SeedSequence([cfg.seed, it]))
        s = sample_cov(x)
        prob = DualProblem(s, np.eye(cfg.p), tp)
        sol = solve_dual_numeric(
            prob, DualSolverConfig(seed=_derived_seed(cfg.seed, it, 3))
        )
        ud = u_difference(prob, sol)
        return (
            [float(ud[i, j]) for i, j in pairs],
            compare_with_two_step(prob, sol),
        )

    indices = list(range(1, cfg.iterations + 1))
    results: dict[int, tuple[list[float], float]] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for it, out in zip(indices, pool.map(run, indices)):
                results[it] = out
    else:
        for it in indices:
            results[it] = run(it)

    udiff_path = os.path.join(out_dir, "udiff.csv")
    with open(udiff_path, "w") as fh:
        fh.write("iteration," + ",".join(off_cols) + "\n")
        for it in indices:
            vals = ",".join(repr(v) for v in results[it][0])
            fh.write(f"{it},{vals}\n")
    theta_path = os.path.join(out_dir, "theta_diff.csv")
    with open(theta_path, "w") as fh:
        fh.write("iteration,theta_diff\n")
        for it in indices:
            fh.write(f"{it},{results[it][1]!r}\n")
    return [udiff_path, theta_path]


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "simulate": (SimulateConfig, cmd_simulate),
    "estimate": (EstimateConfig, cmd_estimate),
    "cv": (CvCommandConfig, cmd_cv),
    "lda": (LdaConfig, cmd_lda),
    "network": (NetworkConfig, cmd_network),
    "dualcheck": (DualcheckConfig, cmd_dualcheck),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precimat",
        description="Precision-matrix estimation toolkit batch driver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file", default=None)
        sp.add_argument("--out", help="output directory", default=".")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--threads", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw: dict = {}
        if args.config is not None:
            with open(args.config) as fh:
                raw = json.load(fh)
            if not isinstance(raw, dict):
                raise InvalidInput("config JSON must be an object")
        if args.seed is not None:
            raw = {**raw, "seed": int(args.seed)}
        if args.threads < 1:
            raise InvalidInput("--threads must be at least 1")
        cfg_cls, runner = _COMMANDS[args.command]
        cfg = cfg_cls.from_dict(raw)
        os.makedirs(args.out, exist_ok=True)
        written = runner(cfg, args.out, args.threads)
        for path in written:
            print(path)
        return 0
    except (PrecimatError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
