"""1vs1 dispute classifiers trained on two classes' support vectors.

Each classifier is a soft-margin Gaussian-kernel binary SVM over the pooled
support vectors of the two classes, with (C, s) picked by stratified
cross-validated grid search. The lower class id sits on the positive side
of the decision function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix, KernelWidth, candidate_widths, gram_from_sqdist, kernel_matrix, squared_distances
from .smo import SolverConfig, solve_binary_dual

DEFAULT_COST_GRID = tuple(2.0 ** e for e in range(-3, 8))

# Multiplier on max_passes for the final refit, which should converge even
# when a few grid-search solves did not.
_FINAL_PASS_BOOST = 10


@dataclass(frozen=True)
class CvConfig:
    """Grid-search settings for pairwise training."""

    folds: int = 5
    cost_grid: tuple[float, ...] = DEFAULT_COST_GRID
    width_grid: tuple[float, ...] | None = None  # None -> candidate grid on pooled SVs
    width_count: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if len(self.cost_grid) == 0:
            raise ValueError("cost_grid must be nonempty")
        if self.width_grid is not None and len(self.width_grid) == 0:
            raise ValueError("width_grid must be nonempty when given")


@dataclass(frozen=True)
class PairwiseClassifier:
    label_a: int  # a < b; positive decision side
    label_b: int
    vectors: np.ndarray  # m x d pooled training vectors
    coeffs: np.ndarray  # m, alpha_i * y_i
    bias: float
    width: KernelWidth
    cost: float
    cv_accuracy: float
    train_accuracy: float

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def decision_pair(clf: PairwiseClassifier, x: np.ndarray) -> float:
    """Raw decision value; positive favors label_a."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != clf.d:
        raise ValueError(f"dimension mismatch: classifier expects d={clf.d}, got {x.shape[0]}")
    return float(kernel_matrix(x[None, :], clf.vectors, clf.width)[0] @ clf.coeffs + clf.bias)


def predict_pair(clf: PairwiseClassifier, x: np.ndarray) -> int:
    """label_a on a strictly positive decision, else label_b."""
    return clf.label_a if decision_pair(clf, x) > 0.0 else clf.label_b


def _fold_assignment(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Stratified fold ids: per class, seeded shuffle then round-robin deal."""
    rng = np.random.default_rng(seed)
    fold_of = np.empty(y.shape[0], dtype=int)
    for cls in np.unique(y):
        idx = np.nonzero(y == cls)[0]
        perm = rng.permutation(idx)
        fold_of[perm] = np.arange(perm.size) % folds
    return fold_of


def _fit_predict_fold(
    Kv: np.ndarray, y: np.ndarray, C: float, width: float, tr: np.ndarray, va: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, bool]:
    sub = GramMatrix(values=Kv[np.ix_(tr, tr)], width=width)
    sol = solve_binary_dual(sub, y[tr], C, cfg)
    coeffs = sol.alphas * y[tr]
    dec = Kv[np.ix_(va, tr)] @ coeffs + sol.offset
    return np.where(dec > 0.0, 1.0, -1.0), sol.converged


def train_pair(
    sv_a: np.ndarray,
    label_a: int,
    sv_b: np.ndarray,
    label_b: int,
    cv: CvConfig,
    cfg: SolverConfig,
) -> PairwiseClassifier:
    """Grid-search and train the dispute classifier for one class pair.

    Stratified k-fold CV on the pooled vectors, with folds capped at the
    smaller class size and leave-one-out when any fold would hold fewer than
    two of the smaller class. Accuracy ties prefer smaller C, then smaller
    width. The winner is refit on the full pool.
    """
    if label_a == label_b:
        raise ValueError("pair labels must differ")
    if label_a > label_b:
        sv_a, sv_b = sv_b, sv_a
        label_a, label_b = label_b, label_a
    A = np.atleast_2d(np.asarray(sv_a, dtype=float))
    B = np.atleast_2d(np.asarray(sv_b, dtype=float))
    if A.shape[0] < 2 or B.shape[0] < 2:
        raise ValueError("each side needs at least 2 vectors")
    if A.shape[1] != B.shape[1]:
        raise ValueError("dimension mismatch between the two SV sets")

    X = np.vstack([A, B])
    y = np.concatenate([np.ones(A.shape[0]), -np.ones(B.shape[0])])
    n = X.shape[0]
    n_small = min(A.shape[0], B.shape[0])

    widths = cv.width_grid if cv.width_grid is not None else tuple(candidate_widths(X, cv.width_count))
    widths = tuple(sorted(float(s) for s in widths))
    costs = tuple(sorted(float(c) for c in cv.cost_grid))

    if n_small >= 2 * cv.folds:
        folds = min(cv.folds, n_small)
        fold_of = _fold_assignment(y, folds, cv.seed)
    else:
        folds = n  # leave-one-out
        fold_of = np.arange(n)

    d2 = squared_distances(X)
    np.fill_diagonal(d2, 0.0)

    best = None  # (accuracy, C, s)
    any_converged = False
    for s in widths:
        Kv = gram_from_sqdist(d2, s).values
        for C in costs:
            fold_acc = []
            for f in range(folds):
                va = np.nonzero(fold_of == f)[0]
                tr = np.nonzero(fold_of != f)[0]
                if va.size == 0 or np.unique(y[tr]).size < 2:
                    continue
                pred, conv = _fit_predict_fold(Kv, y, C, s, tr, va, cfg)
                any_converged = any_converged or conv
                fold_acc.append(float(np.mean(pred == y[va])))
            acc = float(np.mean(fold_acc)) if fold_acc else 0.0
            # ties prefer smaller C, then smaller width
            if best is None or acc > best[0] or (acc == best[0] and (C, s) < (best[1], best[2])):
                best = (acc, C, s)

    cv_accuracy, C_win, s_win = best
    final_cfg = SolverConfig(
        kkt_tolerance=cfg.kkt_tolerance,
        max_passes=cfg.resolve_max_passes(n) * _FINAL_PASS_BOOST,
        seed=cfg.seed,
    )
    K = gram_from_sqdist(d2, s_win)
    sol = solve_binary_dual(K, y, C_win, final_cfg)
    if not sol.converged and not any_converged:
        raise RuntimeError(
            f"pairwise training diverged for every solve (labels {label_a} vs {label_b})"
        )
    coeffs = sol.alphas * y
    train_dec = K.values @ coeffs + sol.offset
    train_accuracy = float(np.mean(np.where(train_dec > 0.0, 1.0, -1.0) == y))
    return PairwiseClassifier(
        label_a=int(label_a),
        label_b=int(label_b),
        vectors=X,
        coeffs=coeffs,
        bias=float(sol.offset),
        width=float(s_win),
        cost=float(C_win),
        cv_accuracy=cv_accuracy,
        train_accuracy=train_accuracy,
    )
