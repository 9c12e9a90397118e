"""Penalized-logistic-regression pool: the cheap multiplicity comparator.

Fits a grid of elastic-net logistic models by cyclic coordinate descent,
picks a baseline by 5-fold cross-validated error, and reads ambiguity and
discrepancy off the pool.  Pool estimates are lower bounds by construction
(the pool is a subset of the level set), so every emitted value is marked
uncertified.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import (
    Dataset,
    LinearClassifier,
    RiskReport,
    SingleClassError,
    empirical_risk,
    predictions,
)
from .profiles import EpsilonGrid, MeasureValue, MultiplicityProfile, ProfileEntry

CD_TOL = 1e-7
CD_MAX_SWEEPS = 10_000
# glmnet-style guard: a pure ridge path has no finite zeroing lambda, so the
# lambda_max formula substitutes a small floor for alpha.
ALPHA_FLOOR = 1e-3
N_FOLDS = 5


@dataclass(frozen=True)
class PenaltyGrid:
    """Elastic-net mixing values and a geometric lambda path per value."""

    alphas: tuple = tuple(round(0.1 * k, 1) for k in range(11))
    lambdas_per_alpha: int = 100
    lambda_min_ratio: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if any(a < 0 or a > 1 for a in self.alphas):
            raise ValueError("alpha values must lie in [0, 1]")
        if self.lambdas_per_alpha < 1:
            raise ValueError("need at least one lambda per alpha")

    @property
    def size(self) -> int:
        return len(self.alphas) * self.lambdas_per_alpha

    def lambda_path(self, lambda_max: float) -> np.ndarray:
        if self.lambdas_per_alpha == 1:
            return np.array([lambda_max])
        return lambda_max * np.power(
            self.lambda_min_ratio,
            np.arange(self.lambdas_per_alpha) / (self.lambdas_per_alpha - 1),
        )


@dataclass(frozen=True)
class PoolModel:
    classifier: LinearClassifier
    raw_coefficients: tuple
    alpha: float
    lam: float
    train_risk: RiskReport
    cv_risk: float
    converged: bool


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -30.0, 30.0)))


def _cd_fit(X, targets, weights, alpha, lam, w_init, penalized):
    """Cyclic coordinate descent on the weighted elastic-net logistic loss.

    Each coordinate step minimizes the quadratic majorizer built from the
    0.25 curvature bound of the logistic loss, with soft-thresholding for
    the l1 part.  The intercept (penalized[0] = False) is never shrunk.
    Returns (coefficients, converged).
    """
    n_total = weights.sum()
    w = w_init.copy()
    scores = X @ w
    curv = 0.25 * (weights @ (X * X)) / n_total
    ridge = lam * (1.0 - alpha)
    l1 = lam * alpha
    for _ in range(CD_MAX_SWEEPS):
        max_delta = 0.0
        for j in range(X.shape[1]):
            if curv[j] == 0.0 and ridge == 0.0:
                continue  # all-zero column with no ridge: coefficient inert
            mu = _sigmoid(scores)
            grad = float(weights @ ((mu - targets) * X[:, j])) / n_total
            if penalized[j]:
                h = curv[j] + ridge
                raw = w[j] - (grad + ridge * w[j]) / h
                new = math.copysign(max(abs(raw) - l1 / h, 0.0), raw)
            else:
                h = curv[j] if curv[j] > 0 else 1.0
                new = w[j] - grad / h
            delta = new - w[j]
            if delta != 0.0:
                scores = scores + delta * X[:, j]
                w[j] = new
                max_delta = max(max_delta, abs(delta))
        if max_delta < CD_TOL:
            return w, True
    return w, False


def _null_intercept(targets, weights) -> float:
    p = float(weights @ targets) / weights.sum()
    if p <= 0.0 or p >= 1.0:
        raise SingleClassError("pool fitting needs both classes present")
    return math.log(p / (1.0 - p))


def _lambda_max(X, targets, weights, alpha) -> float:
    """Smallest lambda that zeroes every non-intercept coefficient.

    A hair of relative headroom keeps the head-of-path coefficients exactly
    zero despite the round trip through division by alpha.
    """
    n_total = weights.sum()
    w0 = _null_intercept(targets, weights)
    mu = _sigmoid(np.full(X.shape[0], w0))
    grads = np.abs(weights * (mu - targets) @ X[:, 1:]) / n_total
    top = float(grads.max()) if grads.size else 1.0
    return max(top, 1e-12) * (1.0 + 1e-10) / max(alpha, ALPHA_FLOOR)


def _fit_path(X, targets, weights, alpha, lambdas):
    """Pathwise fits from lambda_max down, warm-started along the path."""
    w = np.zeros(X.shape[1])
    w[0] = _null_intercept(targets, weights)
    penalized = np.ones(X.shape[1], dtype=bool)
    penalized[0] = False
    out = []
    for lam in lambdas:
        w, converged = _cd_fit(X, targets, weights, alpha, lam, w, penalized)
        out.append((w.copy(), converged))
    return out


def _fold_assignment(n_examples: int, seed: int) -> np.ndarray:
    order = list(range(n_examples))
    random.Random(seed).shuffle(order)
    folds = np.empty(n_examples, dtype=int)
    for pos, idx in enumerate(order):
        folds[idx] = pos % N_FOLDS
    return folds


def fit_pool(
    dataset: Dataset, grid: Optional[PenaltyGrid] = None, seed: int = 0
) -> list:
    """Fit the (alpha, lambda) grid and cross-validate every model.

    Deterministic for a fixed seed: fold assignment, path order and the
    coordinate sweeps have no randomness of their own.
    """
    grid = grid or PenaltyGrid()
    X = dataset.X
    targets = (dataset.y + 1) / 2.0
    weights = dataset.weights.astype(float)
    folds = _fold_assignment(len(dataset.examples), seed)

    models = []
    for alpha in grid.alphas:
        lam_max = _lambda_max(X, targets, weights, alpha)
        lambdas = grid.lambda_path(lam_max)
        full_path = _fit_path(X, targets, weights, alpha, lambdas)
        # one path per held-out fold for CV error; folds whose training part
        # collapses to a single class are skipped
        fold_scores = np.zeros((N_FOLDS, len(lambdas), X.shape[0]))
        fold_usable = np.zeros(N_FOLDS, dtype=bool)
        for f in range(N_FOLDS):
            mask = folds != f
            if mask.all() or not mask.any():
                continue
            try:
                path = _fit_path(
                    X[mask], targets[mask], weights[mask], alpha, lambdas
                )
            except SingleClassError:
                continue
            fold_usable[f] = True
            for li, (w, _) in enumerate(path):
                fold_scores[f, li] = X @ w
        for li, lam in enumerate(lambdas):
            w, converged = full_path[li]
            errors = 0.0
            total = 0.0
            for f in range(N_FOLDS):
                held = folds == f
                if not held.any() or not fold_usable[f]:
                    continue
                preds = np.where(fold_scores[f, li][held] > 0.0, 1, -1)
                errors += float(weights[held][preds != dataset.y[held]].sum())
                total += float(weights[held].sum())
            cv_risk = errors / total if total else math.inf
            clf = LinearClassifier.from_raw(w)
            models.append(
                PoolModel(
                    classifier=clf,
                    raw_coefficients=tuple(float(v) for v in w),
                    alpha=float(alpha),
                    lam=float(lam),
                    train_risk=empirical_risk(clf, dataset),
                    cv_risk=cv_risk,
                    converged=converged,
                )
            )
    return models


def pool_baseline_index(models: Sequence[PoolModel]) -> int:
    """Minimum 5-fold CV error; ties go to larger lambda, then larger alpha."""
    best = min(
        range(len(models)),
        key=lambda i: (models[i].cv_risk, -models[i].lam, -models[i].alpha, i),
    )
    return best


def adhoc_measures(
    models: Sequence[PoolModel], dataset: Dataset, grid: EpsilonGrid
) -> MultiplicityProfile:
    """Pool-based ambiguity and discrepancy around the pool's CV baseline.

    Level-set membership uses exact mistake counts.  Every entry is marked
    uncertified: with only a pool in hand these are lower-bound estimates of
    the exact measures, not bracketing intervals.
    """
    if not models:
        raise ValueError("pool must be nonempty")
    base_idx = pool_baseline_index(models)
    base = models[base_idx]
    base_preds = predictions(base.classifier, dataset)
    n = dataset.n
    if grid.n != n:
        raise ValueError("grid denominator does not match dataset weight")

    pred_matrix = np.stack([predictions(m.classifier, dataset) for m in models])
    entries = []
    for eps, threshold in zip(grid.values, grid.thresholds(base.train_risk.mistakes)):
        in_set = [
            k for k, m in enumerate(models) if m.train_risk.mistakes <= threshold
        ]
        conflicts = pred_matrix[in_set] != base_preds[None, :]
        flipped_any = conflicts.any(axis=0)
        ambiguity = Fraction(int(dataset.weights[flipped_any].sum()), n)
        discrepancy = Fraction(
            max(int(dataset.weights[row].sum()) for row in conflicts), n
        )
        entries.append(
            ProfileEntry(
                epsilon=eps,
                discrepancy=MeasureValue(discrepancy, discrepancy, certified=False),
                ambiguity=MeasureValue(ambiguity, ambiguity, certified=False),
            )
        )
    return MultiplicityProfile(
        baseline=base.train_risk, entries=tuple(entries), witnesses={}
    )
