"""Boundary/interior partitioning and kernel-width selection.

A point is a boundary (edge) point when most of its k nearest neighbors lie
on one side of its tangent plane; the plane's normal is estimated as the
mean of unit vectors toward the neighbors. Width selection trains one
one-class SVM per candidate width, keeps the candidates whose support-vector
fraction stays within [nu, 1.5*nu], and among those picks the width whose
enclosing surface stays closest to the edge points (smallest maximum edge
distance). The classic interior-minus-edge separation score is kept as a
diagnostic only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelWidth, gram_from_sqdist, squared_distances
from .ocsvm import SV_THRESHOLD, OcsvmModel, model_from_solution, normalized_distances
from .smo import SolverConfig, solve_ocsvm_dual

# Normals shorter than this are treated as degenerate: a point surrounded
# symmetrically by its neighbors is interior.
_NORMAL_EPS = 1e-12

DEFAULT_SIDE_THRESHOLD = 0.7


def default_k_neighbors(n: int) -> int:
    """max(5, ceil(sqrt(n))), capped at n - 1."""
    return min(max(5, int(np.ceil(np.sqrt(n)))), n - 1)


@dataclass(frozen=True)
class BoundaryPartition:
    """Disjoint edge/interior index sets covering one class's rows."""

    edge_indices: np.ndarray
    interior_indices: np.ndarray
    k_neighbors: int
    side_threshold: float

    @property
    def n(self) -> int:
        return self.edge_indices.size + self.interior_indices.size


@dataclass(frozen=True)
class CandidateRecord:
    """Per-width diagnostics from a selection sweep.

    max_edge_dn/max_interior_dn are geometric (margin over ||w||) distances.
    score is the fraction of the candidate's support vectors lying outside
    the edge set and covering is the worst edge point's Euclidean distance
    to its nearest support vector; the selector minimizes (score, covering).
    """

    s: float
    converged: bool
    sv_fraction: float
    max_edge_dn: float
    max_interior_dn: float
    f0: float
    score: float
    covering: float
    admitted: bool
    fallback: bool = False


@dataclass(frozen=True)
class WidthSelection:
    chosen: KernelWidth
    per_candidate: list[CandidateRecord]
    model: OcsvmModel = field(repr=False, compare=False, default=None)
    fallback: bool = False


def beps_partition(
    X: np.ndarray, k_neighbors: int, side_threshold: float = DEFAULT_SIDE_THRESHOLD
) -> BoundaryPartition:
    """Partition rows into edge and interior sets by the tangent-plane rule.

    For each point: take its k nearest neighbors (Euclidean, ties broken by
    index order), estimate the inward normal as the normalized mean of unit
    vectors to the neighbors, and mark the point as edge when at least
    side_threshold of the neighbors lie on the normal's side.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if k_neighbors < 2:
        raise ValueError("k_neighbors must be >= 2")
    if n < k_neighbors + 1:
        raise ValueError(f"need at least k_neighbors + 1 = {k_neighbors + 1} points, got {n}")
    if not 0.5 < side_threshold <= 1.0:
        raise ValueError("side_threshold must lie in (0.5, 1]")

    d2 = squared_distances(X)
    np.fill_diagonal(d2, np.inf)  # exclude self
    # stable sort keeps index order on distance ties (duplicate points)
    nbr = np.argsort(d2, axis=1, kind="stable")[:, :k_neighbors]

    edge = np.zeros(n, dtype=bool)
    for i in range(n):
        diffs = X[nbr[i]] - X[i]
        norms = np.linalg.norm(diffs, axis=1)
        units = np.divide(diffs, norms[:, None], out=np.zeros_like(diffs), where=norms[:, None] > 0)
        normal = units.mean(axis=0)
        nn = np.linalg.norm(normal)
        if nn < _NORMAL_EPS:
            continue  # symmetric neighborhood: interior
        side = diffs @ (normal / nn)
        edge[i] = np.mean(side >= 0.0) >= side_threshold
    idx = np.arange(n)
    return BoundaryPartition(
        edge_indices=idx[edge],
        interior_indices=idx[~edge],
        k_neighbors=k_neighbors,
        side_threshold=side_threshold,
    )


def mies_score(model: OcsvmModel, part: BoundaryPartition, X: np.ndarray) -> float:
    """Interior-vs-edge separation diagnostic.

    max over interior points of the normalized distance minus max over edge
    points, taken verbatim; the production selector below does not use it.
    """
    if part.edge_indices.size == 0 or part.interior_indices.size == 0:
        raise ValueError("both edge and interior sets must be nonempty")
    dn = normalized_distances(model, np.asarray(X, dtype=float))
    return float(np.max(dn[part.interior_indices]) - np.max(dn[part.edge_indices]))


def select_width(
    X_class: np.ndarray,
    nu: float,
    candidates: list[KernelWidth],
    part: BoundaryPartition,
    cfg: SolverConfig,
    class_label: int = 0,
) -> WidthSelection:
    """Pick a kernel width per the support-vector-fraction filter.

    Trains one model per candidate (sharing the pairwise-distance work) and
    admits converged candidates with SV fraction in [nu, 1.5*nu]. Among the
    admitted, the winner puts its support vectors on the detected boundary:
    fewest SVs outside the edge set first, then the smallest worst-case gap
    between an edge point and its nearest SV, then the smaller width. Raw
    feature-space margins cannot arbitrate here because they shrink
    uniformly as the width grows; the SV-on-boundary agreement is the
    scale-free statement of the same objective. If nothing is admitted,
    falls back to the converged candidate whose SV fraction is closest to
    1.25*nu, flagged as such.
    """
    X = np.asarray(X_class, dtype=float)
    if not candidates:
        raise ValueError("candidate list is empty")
    if part.n != X.shape[0]:
        raise ValueError("partition size does not match X_class")
    d2 = squared_distances(X)
    np.fill_diagonal(d2, 0.0)
    edge_mask = np.zeros(X.shape[0], dtype=bool)
    edge_mask[part.edge_indices] = True

    records: list[CandidateRecord] = []
    models: list[OcsvmModel | None] = []
    for s in sorted(float(s) for s in candidates):
        K = gram_from_sqdist(d2, s)
        sol = solve_ocsvm_dual(K, nu, cfg)
        if not sol.converged:
            records.append(
                CandidateRecord(
                    s=s, converged=False, sv_fraction=float("nan"),
                    max_edge_dn=float("nan"), max_interior_dn=float("nan"),
                    f0=float("nan"), score=float("nan"), covering=float("nan"),
                    admitted=False,
                )
            )
            models.append(None)
            continue
        model = model_from_solution(X, nu, s, sol, cfg.kkt_tolerance, class_label, K)
        frac = model.m / model.train_count
        # decision values over the training rows come free from the Gram
        keep = sol.alphas > SV_THRESHOLD
        dn = (K.values[:, keep] @ sol.alphas[keep] - model.rho) / model.w_norm
        max_edge = float(np.max(dn[part.edge_indices])) if part.edge_indices.size else float("nan")
        max_int = (
            float(np.max(dn[part.interior_indices])) if part.interior_indices.size else float("nan")
        )
        f0 = max_int - max_edge
        score = float(np.mean(~edge_mask[keep]))
        gaps = np.sqrt(d2[np.ix_(part.edge_indices, np.nonzero(keep)[0])])
        covering = float(np.max(np.min(gaps, axis=1))) if part.edge_indices.size else 0.0
        admitted = nu <= frac <= 1.5 * nu
        records.append(
            CandidateRecord(
                s=s, converged=True, sv_fraction=frac,
                max_edge_dn=max_edge, max_interior_dn=max_int, f0=f0, score=score,
                covering=covering, admitted=admitted,
            )
        )
        models.append(model)

    if all(m is None for m in models):
        raise RuntimeError("no candidate width converged")

    best_i = None
    for i, rec in enumerate(records):
        if not rec.admitted:
            continue
        if best_i is None or (rec.score, rec.covering) < (
            records[best_i].score, records[best_i].covering
        ):
            best_i = i
    fallback = best_i is None
    if fallback:
        target = 1.25 * nu
        best_i = min(
            (i for i, r in enumerate(records) if r.converged),
            key=lambda i: abs(records[i].sv_fraction - target),
        )
        rec = records[best_i]
        records[best_i] = CandidateRecord(
            s=rec.s, converged=True, sv_fraction=rec.sv_fraction,
            max_edge_dn=rec.max_edge_dn, max_interior_dn=rec.max_interior_dn,
            f0=rec.f0, score=rec.score, covering=rec.covering, admitted=True, fallback=True,
        )
    return WidthSelection(
        chosen=records[best_i].s,
        per_candidate=records,
        model=models[best_i],
        fallback=fallback,
    )
