"""Per-class one-class SVM: training, decision values, normalized distances.

A trained model keeps only the rows with nonzero dual coefficients (the
support vectors); everything needed at predict time is (SVs, alphas, rho,
width). The normalized distance divides the decision value by ||w|| so that
values are geometric margins, comparable across kernel widths.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix, KernelWidth, check_width, gram, kernel_matrix
from .smo import DualSolution, SolverConfig, solve_ocsvm_dual

# Dual coefficients at or below this are treated as zero and dropped.
SV_THRESHOLD = 1e-8

# Empirically sensible range for nu; values outside it are legal but warned.
NU_SOFT_RANGE = (0.1, 0.4)


@dataclass(frozen=True)
class OcsvmModel:
    class_label: int
    support_vectors: np.ndarray  # m x d
    sv_alphas: np.ndarray  # m
    rho: float
    width: KernelWidth
    nu: float
    train_count: int
    w_norm: float
    converged: bool
    kkt_tolerance: float

    @property
    def m(self) -> int:
        return self.support_vectors.shape[0]

    @property
    def d(self) -> int:
        return self.support_vectors.shape[1]


def train_ocsvm(
    X_class: np.ndarray,
    nu: float,
    s: KernelWidth,
    cfg: SolverConfig,
    class_label: int = 0,
    K: GramMatrix | None = None,
) -> OcsvmModel:
    """Train a one-class SVM on one class's rows at kernel width s.

    Pass a precomputed GramMatrix over X_class to skip the kernel work
    (width-selection sweeps do this). A non-converged solve still yields a
    model, flagged so callers can reject it.
    """
    X = np.asarray(X_class, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need an n x d matrix with n >= 2")
    s = check_width(s)
    if K is None:
        K = gram(X, s)
    elif K.values.shape[0] != X.shape[0]:
        raise ValueError("precomputed Gram size does not match X_class")
    if not NU_SOFT_RANGE[0] <= nu <= NU_SOFT_RANGE[1]:
        warnings.warn(
            f"nu={nu} outside the usual [{NU_SOFT_RANGE[0]}, {NU_SOFT_RANGE[1]}] range",
            stacklevel=2,
        )
    sol = solve_ocsvm_dual(K, nu, cfg)
    return model_from_solution(X, nu, s, sol, cfg.kkt_tolerance, class_label, K)


def model_from_solution(
    X: np.ndarray,
    nu: float,
    s: KernelWidth,
    sol: DualSolution,
    kkt_tolerance: float,
    class_label: int = 0,
    K: GramMatrix | None = None,
) -> OcsvmModel:
    """Build the retained-SV model from a dual solution over X."""
    keep = sol.alphas > SV_THRESHOLD
    sv = X[keep]
    a = sol.alphas[keep]
    if sv.shape[0] == 0:
        raise RuntimeError("no support vectors retained; solver produced a zero solution")
    if K is not None:
        Ksv = K.values[np.ix_(keep.nonzero()[0], keep.nonzero()[0])]
    else:
        Ksv = kernel_matrix(sv, sv, s)
    w_norm = float(np.sqrt(max(a @ Ksv @ a, 0.0)))
    return OcsvmModel(
        class_label=int(class_label),
        support_vectors=sv,
        sv_alphas=a,
        rho=float(sol.offset),
        width=float(s),
        nu=float(nu),
        train_count=int(X.shape[0]),
        w_norm=w_norm,
        converged=bool(sol.converged),
        kkt_tolerance=float(kkt_tolerance),
    )


def _kernel_row(model: OcsvmModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.d:
        raise ValueError(f"dimension mismatch: model expects d={model.d}, got {x.shape[0]}")
    return kernel_matrix(x[None, :], model.support_vectors, model.width)[0]


def decision_value(model: OcsvmModel, x: np.ndarray) -> float:
    """Sum of alpha_i * k(sv_i, x) minus rho."""
    return float(_kernel_row(model, x) @ model.sv_alphas - model.rho)


def decision_values(model: OcsvmModel, X: np.ndarray) -> np.ndarray:
    """Decision values for many rows at once."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.d:
        raise ValueError(f"dimension mismatch: model expects d={model.d}, got {X.shape[1]}")
    return kernel_matrix(X, model.support_vectors, model.width) @ model.sv_alphas - model.rho


def predict_one(model: OcsvmModel, x: np.ndarray) -> int:
    """+1 inside the learned support (decision strictly positive), else -1."""
    return 1 if decision_value(model, x) > 0.0 else -1


def normalized_distance(model: OcsvmModel, x: np.ndarray) -> float:
    """Signed feature-space distance from x's image to the hyperplane.

    Dividing by ||w|| makes the value a geometric distance, so models with
    different widths can be compared. Positive means inside.
    """
    return decision_value(model, x) / model.w_norm


def normalized_distances(model: OcsvmModel, X: np.ndarray) -> np.ndarray:
    return decision_values(model, X) / model.w_norm


def sv_fraction(model: OcsvmModel) -> float:
    """Retained support vectors as a fraction of the training rows."""
    return model.m / model.train_count
