"""Cross-validation, grid search, metrics, robustness sweeps, and the
Nemenyi critical-difference test."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

from .data import Dataset, fit_scaler, inject_label_noise
from .errors import InvalidInputError
from .lifting import LiftingMode
from .model import predict_many
from .solver_cl1 import SolverConfig, fit
from .solver_lsq import DEFAULT_RIDGE, fit_lsq

# Studentized-range critical values over sqrt(2), alpha = 0.05.
Q_ALPHA_05 = {
    2: 1.959964,
    3: 2.343701,
    4: 2.569032,
    5: 2.727774,
    6: 2.849705,
    7: 2.948319,
    8: 3.030879,
    9: 3.101730,
    10: 3.163684,
}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def counts_from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionCounts:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    return ConfusionCounts(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        tn=int(np.sum((y_true == -1) & (y_pred == -1))),
        fp=int(np.sum((y_true == -1) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == -1))),
    )


def accuracy(counts: ConfusionCounts) -> float:
    if counts.total < 1:
        raise InvalidInputError("accuracy needs at least one sample")
    return (counts.tp + counts.tn) / counts.total


def f1(counts: ConfusionCounts) -> float:
    """F1 score; NaN when 2TP + FN + FP = 0 (no positives anywhere)."""
    if counts.total < 1:
        raise InvalidInputError("f1 needs at least one sample")
    denom = 2 * counts.tp + counts.fn + counts.fp
    if denom == 0:
        return float("nan")
    return 2 * counts.tp / denom


class CL1Trainer:
    """Grid-searchable wrapper around the capped-L1 solver."""

    name = "cl1qtsvm"

    def __init__(self, base: SolverConfig | None = None):
        self.base = base if base is not None else SolverConfig()

    def train(self, dataset, params, mode, scaler):
        cfg = replace(self.base, **params)
        model, _ = fit(dataset, cfg, mode=mode, scaler=scaler)
        return lambda X: predict_many(model, X)


class LSQTrainer:
    """Grid-searchable wrapper around the least-squares baseline."""

    name = "lsqtsvm"

    def __init__(self, ridge: float = DEFAULT_RIDGE):
        self.ridge = ridge

    def train(self, dataset, params, mode, scaler):
        model = fit_lsq(dataset, C=params["C"], ridge=self.ridge, mode=mode,
                        scaler=scaler)
        return lambda X: predict_many(model, X)


def default_grid(method: str) -> list[dict]:
    """The 10^i, i = -5..5 hyperparameter grid for either method."""
    powers = [10.0**i for i in range(-5, 6)]
    if method == "cl1qtsvm":
        return [{"c1": a, "c2": b} for a in powers for b in powers]
    if method == "lsqtsvm":
        return [{"C": c} for c in powers]
    raise InvalidInputError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CvSpec:
    """Cross-validation protocol: outer k-fold repeated r times, grid
    selection either nested (inner CV per outer split) or flat (one grid
    point chosen by mean outer CV accuracy)."""

    folds: int = 5
    repeats: int = 2
    seed: int = 0
    grid: tuple = ()
    mode: LiftingMode = LiftingMode.FULL
    inner_folds: int = 5
    selection: str = "nested"  # "nested" | "flat"
    normalize: str = "full"  # "full" | "per-fold"

    def __post_init__(self):
        if self.folds < 2:
            raise InvalidInputError("folds must be >= 2")
        if not self.grid:
            raise InvalidInputError("hyperparameter grid must be nonempty")
        if self.selection not in ("nested", "flat"):
            raise InvalidInputError(f"unknown selection {self.selection!r}")
        if self.normalize not in ("full", "per-fold"):
            raise InvalidInputError(f"unknown normalize mode {self.normalize!r}")


@dataclass(frozen=True)
class FoldRecord:
    repeat: int
    fold: int
    params: dict
    counts: ConfusionCounts
    seconds: float


@dataclass(frozen=True)
class EvalResult:
    acc_mean: float
    acc_std: float
    f1_mean: float
    f1_std: float
    best_params: dict
    wall_time: float
    folds: tuple  # of FoldRecord


def _stratified_folds(m_pos, m_neg, k, seed_key):
    """Fold index per sample (positives first), stratified per class.

    Deterministic in seed_key; each class is permuted then dealt
    round-robin so every fold keeps both classes as balanced as possible.
    """
    rng = np.random.default_rng(seed_key)
    assign = np.empty(m_pos + m_neg, dtype=int)
    assign[:m_pos] = np.arange(m_pos) % k
    assign[:m_pos] = assign[:m_pos][rng.permutation(m_pos)]
    assign[m_pos:] = np.arange(m_neg) % k
    assign[m_pos:] = assign[m_pos:][rng.permutation(m_neg)]
    return assign


def _split(dataset: Dataset, assign: np.ndarray, fold: int):
    pos_mask = assign[: dataset.m_pos] == fold
    neg_mask = assign[dataset.m_pos :] == fold
    test = Dataset(X_pos=dataset.X_pos[pos_mask], X_neg=dataset.X_neg[neg_mask],
                   provenance=dataset.provenance)
    train = Dataset(X_pos=dataset.X_pos[~pos_mask], X_neg=dataset.X_neg[~neg_mask],
                    provenance=dataset.provenance)
    return train, test


def _evaluate(trainer, train, test, params, mode, scaler):
    predictor = trainer.train(train, params, mode, scaler)
    X, y = test.stacked()
    return counts_from_predictions(y, predictor(X))


def _inner_select(trainer, train, spec: CvSpec, scaler, seed_key):
    """Pick the grid point with the best inner-CV mean accuracy."""
    k = min(spec.inner_folds, train.m_pos, train.m_neg)
    if k < 2:
        raise InvalidInputError(
            "training split too small for inner model selection; use fewer folds"
        )
    assign = _stratified_folds(train.m_pos, train.m_neg, k, seed_key)
    best_params, best_acc = None, -1.0
    for params in spec.grid:
        accs = []
        for fold in range(k):
            tr, te = _split(train, assign, fold)
            counts = _evaluate(trainer, tr, te, params, spec.mode, scaler)
            accs.append(accuracy(counts))
        mean_acc = float(np.mean(accs))
        if mean_acc > best_acc:
            best_params, best_acc = params, mean_acc
    return best_params


def cross_validate(dataset: Dataset, trainer, spec: CvSpec) -> EvalResult:
    """Stratified repeated k-fold evaluation with grid search.

    Fold assignment and all derived seeds flow deterministically from
    spec.seed, so reruns (and any parallel evaluation order) reproduce
    the same result exactly.
    """
    if dataset.m_pos < spec.folds or dataset.m_neg < spec.folds:
        raise InvalidInputError(
            f"each class needs at least {spec.folds} samples for "
            f"{spec.folds}-fold CV; use a smaller k"
        )
    t0 = time.perf_counter()
    full_scaler = fit_scaler(dataset) if spec.normalize == "full" else None

    if spec.selection == "flat":
        records = _cross_validate_flat(dataset, trainer, spec, full_scaler)
    else:
        records = _cross_validate_nested(dataset, trainer, spec, full_scaler)

    accs = [accuracy(r.counts) for r in records]
    f1s = [f1(r.counts) for r in records]
    chosen = [tuple(sorted(r.params.items())) for r in records]
    winner = max(set(chosen), key=chosen.count)
    return EvalResult(
        acc_mean=float(np.mean(accs)),
        acc_std=float(np.std(accs)),
        f1_mean=float(np.mean(f1s)),
        f1_std=float(np.std(f1s)),
        best_params=dict(winner),
        wall_time=time.perf_counter() - t0,
        folds=tuple(records),
    )


def _cross_validate_nested(dataset, trainer, spec, full_scaler):
    records = []
    for rep in range(spec.repeats):
        assign = _stratified_folds(dataset.m_pos, dataset.m_neg, spec.folds,
                                   [spec.seed, rep])
        for fold in range(spec.folds):
            t0 = time.perf_counter()
            train, test = _split(dataset, assign, fold)
            params = _inner_select(trainer, train, spec, full_scaler,
                                   [spec.seed, rep, fold, 1])
            counts = _evaluate(trainer, train, test, params, spec.mode, full_scaler)
            records.append(FoldRecord(repeat=rep, fold=fold, params=params,
                                      counts=counts,
                                      seconds=time.perf_counter() - t0))
    return records


def _cross_validate_flat(dataset, trainer, spec, full_scaler):
    # One grid point for the whole run, chosen by mean CV accuracy.
    per_grid: list[list] = [[] for _ in spec.grid]
    for rep in range(spec.repeats):
        assign = _stratified_folds(dataset.m_pos, dataset.m_neg, spec.folds,
                                   [spec.seed, rep])
        for fold in range(spec.folds):
            train, test = _split(dataset, assign, fold)
            for gi, params in enumerate(spec.grid):
                t0 = time.perf_counter()
                counts = _evaluate(trainer, train, test, params, spec.mode,
                                   full_scaler)
                per_grid[gi].append(
                    FoldRecord(repeat=rep, fold=fold, params=params,
                               counts=counts, seconds=time.perf_counter() - t0)
                )
    means = [float(np.mean([accuracy(r.counts) for r in recs])) for recs in per_grid]
    return per_grid[int(np.argmax(means))]


def robustness_sweep(datasets: dict, trainers: list, noise_ratios, spec: CvSpec,
                     grids: dict | None = None) -> list[dict]:
    """Long-format table of (dataset, noise ratio, trainer) evaluations.

    ``grids`` optionally maps trainer name to its grid; otherwise
    spec.grid is used for every trainer.
    """
    rows = []
    for ds_name, dataset in datasets.items():
        for ratio in noise_ratios:
            noisy = inject_label_noise(dataset, ratio, seed=spec.seed + 1)
            for trainer in trainers:
                grid = (grids or {}).get(trainer.name, spec.grid)
                result = cross_validate(noisy, trainer,
                                        replace(spec, grid=tuple(grid)))
                for rec in result.folds:
                    row = {
                        "dataset": ds_name,
                        "method": trainer.name,
                        "noise_ratio": ratio,
                        "fold": rec.fold,
                        "repeat": rec.repeat,
                        "c1": rec.params.get("c1", ""),
                        "c2": rec.params.get("c2", rec.params.get("C", "")),
                        "acc": accuracy(rec.counts),
                        "f1": f1(rec.counts),
                        "seconds": rec.seconds,
                    }
                    rows.append(row)
    return rows


def nemenyi_cd(k: int, N: int, q_alpha: float | None = None) -> float:
    """Critical difference q_alpha(k) * sqrt(k(k+1) / (6N))."""
    if k < 2:
        raise InvalidInputError("need at least two methods")
    if N < 1:
        raise InvalidInputError("need at least one dataset")
    if q_alpha is None:
        if k not in Q_ALPHA_05:
            raise InvalidInputError(
                f"no tabulated critical value for k={k} (alpha=0.05, k<=10)"
            )
        q_alpha = Q_ALPHA_05[k]
    return q_alpha * np.sqrt(k * (k + 1) / (6.0 * N))


def mean_ranks(scores: np.ndarray) -> np.ndarray:
    """Mean rank per method (columns) over datasets (rows); rank 1 is the
    best score, ties get midranks."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    ranks = np.vstack([rankdata(-row, method="average") for row in scores])
    return ranks.mean(axis=0)


def nemenyi_test(scores: np.ndarray, q_alpha: float | None = None):
    """Mean ranks, CD, and the pairwise significance matrix
    |rank_i - rank_j| > CD."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    N, k = scores.shape
    cd = nemenyi_cd(k, N, q_alpha)
    ranks = mean_ranks(scores)
    diff = np.abs(ranks[:, None] - ranks[None, :])
    return ranks, cd, diff > cd
