"""Sequential pairwise coordinate optimization for the two SVM duals.

Both problems are solved as minimizations over a box with one equality
constraint, using maximal-KKT-violating-pair working-set selection:

  one-class:  min 1/2 a'Ka        s.t. sum(a) = 1,    0 <= a_i <= 1/(nu*l)
  binary:     min 1/2 a'Qa - e'a  s.t. sum(y*a) = 0,  0 <= a_i <= C
              with Q_ij = y_i y_j K_ij

The one-class objective is the negated form of the usual maximization of
-1/2 a'Ka; the optimizer and constraints are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix

# Alphas within this margin of a bound count as bound-active when recovering
# the offset; well below 1/(nu*l) for any dataset in scope.
BOUND_MARGIN = 1e-8

# Floor for the curvature term K_ii + K_jj - 2 K_ij of a working pair.
_CURVATURE_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Stopping and determinism knobs for one dual solve."""

    kkt_tolerance: float = 1e-3
    max_passes: int | None = None  # None -> max(10 * n, 10000)
    seed: int = 0

    def __post_init__(self):
        if self.kkt_tolerance <= 0:
            raise ValueError("kkt_tolerance must be positive")

    def resolve_max_passes(self, n: int) -> int:
        if self.max_passes is not None:
            return int(self.max_passes)
        return max(10 * n, 10000)


@dataclass(frozen=True)
class DualSolution:
    """Result of one dual solve."""

    alphas: np.ndarray
    offset: float  # rho for the one-class dual, bias b for the binary dual
    objective: float
    iterations: int
    converged: bool
    kkt_violation: float


def _midpoint(lo_vals: np.ndarray, hi_vals: np.ndarray) -> float:
    """Midpoint of the KKT bracket; one-sided if a side is empty."""
    has_lo, has_hi = lo_vals.size > 0, hi_vals.size > 0
    if has_lo and has_hi:
        return 0.5 * (float(np.max(lo_vals)) + float(np.min(hi_vals)))
    if has_lo:
        return float(np.max(lo_vals))
    if has_hi:
        return float(np.min(hi_vals))
    raise RuntimeError("cannot recover offset: no active constraints at all")


def solve_ocsvm_dual(K: GramMatrix, nu: float, cfg: SolverConfig) -> DualSolution:
    """Solve the one-class dual over the Gram matrix K.

    The start point puts equal mass on ceil(nu*l) points chosen in seeded
    order (the projection of the uniform-1/l assignment onto the feasible
    set). rho is recovered from the gradient at the solution: the mean of
    K@a over unbounded support vectors, falling back to the midpoint of the
    KKT bracket formed by the bound-active points.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    Kv = K.values
    l = Kv.shape[0]
    if nu * l < 1.0:
        raise ValueError(f"infeasible: nu * l = {nu * l:.3g} < 1")
    C = 1.0 / (nu * l)
    tol = cfg.kkt_tolerance
    max_iter = cfg.resolve_max_passes(l)

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(l)
    m = int(np.ceil(nu * l))
    alpha = np.zeros(l)
    alpha[order[:m]] = 1.0 / m

    G = Kv @ alpha
    it = 0
    violation = np.inf
    while it < max_iter:
        up = alpha < C - BOUND_MARGIN  # can receive mass
        dn = alpha > BOUND_MARGIN  # can give mass
        Gi = np.where(up, G, np.inf)
        Gj = np.where(dn, G, -np.inf)
        i = int(np.argmin(Gi))
        j = int(np.argmax(Gj))
        violation = float(Gj[j] - Gi[i])
        if violation <= tol:
            break
        eta = max(Kv[i, i] + Kv[j, j] - 2.0 * Kv[i, j], _CURVATURE_FLOOR)
        delta = violation / eta
        room_i = C - alpha[i]
        room_j = alpha[j]
        delta = min(delta, room_i, room_j)
        if delta == room_i:
            alpha[i] = C
            alpha[j] -= room_i
        elif delta == room_j:
            alpha[j] = 0.0
            alpha[i] += room_j
        else:
            alpha[i] += delta
            alpha[j] -= delta
        G += delta * (Kv[:, i] - Kv[:, j])
        it += 1

    converged = violation <= tol
    unbounded = (alpha > BOUND_MARGIN) & (alpha < C - BOUND_MARGIN)
    if np.any(unbounded):
        rho = float(np.mean(G[unbounded]))
    else:
        rho = _midpoint(G[alpha >= C - BOUND_MARGIN], G[alpha <= BOUND_MARGIN])
    objective = 0.5 * float(alpha @ G)
    return DualSolution(
        alphas=alpha,
        offset=rho,
        objective=objective,
        iterations=it,
        converged=converged,
        kkt_violation=max(violation, 0.0),
    )


def solve_binary_dual(K: GramMatrix, y: np.ndarray, C: float, cfg: SolverConfig) -> DualSolution:
    """Solve the soft-margin binary dual over the Gram matrix K.

    y must contain both +1 and -1. The bias is recovered like rho above:
    mean of y_t - f_t over unbounded support vectors, else the KKT-bracket
    midpoint over bound-active points.
    """
    Kv = K.values
    y = np.asarray(y, dtype=float).ravel()
    n = Kv.shape[0]
    if y.shape[0] != n:
        raise ValueError("label vector length must match Gram size")
    if not (np.all(np.abs(y) == 1.0) and np.any(y > 0) and np.any(y < 0)):
        raise ValueError("labels must be in {-1,+1} with both classes present")
    if C <= 0:
        raise ValueError("C must be positive")
    tol = cfg.kkt_tolerance
    max_iter = cfg.resolve_max_passes(n)

    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - e'a at a = 0
    pos = y > 0
    it = 0
    violation = np.inf
    while it < max_iter:
        can_inc = alpha < C - BOUND_MARGIN
        can_dec = alpha > BOUND_MARGIN
        in_up = (can_inc & pos) | (can_dec & ~pos)
        in_low = (can_inc & ~pos) | (can_dec & pos)
        r = -y * G
        ri = np.where(in_up, r, -np.inf)
        rj = np.where(in_low, r, np.inf)
        i = int(np.argmax(ri))
        j = int(np.argmin(rj))
        violation = float(ri[i] - rj[j])
        if violation <= tol:
            break
        eta = max(Kv[i, i] + Kv[j, j] - 2.0 * Kv[i, j], _CURVATURE_FLOOR)
        # move along u = y_i e_i - y_j e_j, which keeps sum(y*a) fixed
        t = violation / eta
        yi, yj = y[i], y[j]
        t_hi_i = C - alpha[i] if yi > 0 else alpha[i]
        t_hi_j = alpha[j] if yj > 0 else C - alpha[j]
        t = min(t, t_hi_i, t_hi_j)
        old_i, old_j = alpha[i], alpha[j]
        alpha[i] = min(max(old_i + yi * t, 0.0), C)
        alpha[j] = min(max(old_j - yj * t, 0.0), C)
        dai = alpha[i] - old_i
        daj = alpha[j] - old_j
        G += y * (Kv[:, i] * (yi * dai) + Kv[:, j] * (yj * daj))
        it += 1

    converged = violation <= tol
    r = -y * G  # the bias each point's KKT condition suggests
    unbounded = (alpha > BOUND_MARGIN) & (alpha < C - BOUND_MARGIN)
    if np.any(unbounded):
        bias = float(np.mean(r[unbounded]))
    else:
        at_zero = alpha <= BOUND_MARGIN
        at_c = alpha >= C - BOUND_MARGIN
        lower = r[(at_zero & pos) | (at_c & ~pos)]  # b >= r there
        upper = r[(at_zero & ~pos) | (at_c & pos)]  # b <= r there
        bias = _midpoint(lower, upper)
    objective = 0.5 * float(alpha @ G) - 0.5 * float(np.sum(alpha))
    return DualSolution(
        alphas=alpha,
        offset=bias,
        objective=objective,
        iterations=it,
        converged=converged,
        kkt_violation=max(violation, 0.0),
    )
