"""Sparse positive-sample assignment and the training loss formulas.

Each ground-truth instance is matched to K sample points by solving a
min-cost bipartite assignment over a cost matrix whose columns are the
instances repeated K times. A sample's cost against an instance is the
focal-derived classification term plus lambda times the summed per-vertex
distance between its predicted contour and the instance, or +inf when the
sample lies outside every text region.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ArgumentError

ALPHA = 0.25
GAMMA = 2.0
EPS = 1e-6


@dataclass(frozen=True)
class SamplePrediction:
    location: tuple[float, float]
    score: float
    contour: np.ndarray          # flat, 2N values
    in_text_region: bool = True


@dataclass(frozen=True)
class CostMatrix:
    values: np.ndarray           # (num_samples, num_instances * k)
    n_instances: int
    k: int
    lam: float

    def instance_of(self, col: int) -> int:
        # replicas of one instance occupy k adjacent columns
        return col // self.k


@dataclass
class MatchResult:
    pairs: list[tuple[int, int]]             # (sample index, instance index)
    total_cost: float
    matched_per_instance: list[int] = field(default_factory=list)

    @property
    def unmatched(self) -> list[int]:
        """Instances that received no sample at all."""
        return [j for j, n in enumerate(self.matched_per_instance) if n == 0]


def clamp(x, eps: float = EPS):
    return np.clip(np.asarray(x, dtype=np.float64), eps, 1.0 - eps)


def focal_term(x, alpha: float = ALPHA, gamma: float = GAMMA, eps: float = EPS):
    """-a (1-x)^g log x + (1-a) x^g log(1-x), with x clamped to [eps, 1-eps].

    Strictly decreasing on (0, 1), so a more confident sample is cheaper.
    """
    x = clamp(x, eps)
    out = -alpha * (1 - x) ** gamma * np.log(x) + (1 - alpha) * x**gamma * np.log1p(-x)
    return float(out) if out.ndim == 0 else out


def contour_distance(a, b, metric: str = "euclidean") -> float:
    """Sum over vertices of the distance between corresponding vertices."""
    d = geo.unflatten(np.asarray(a, dtype=np.float64)) - geo.unflatten(np.asarray(b, dtype=np.float64))
    if metric == "euclidean":
        return float(np.hypot(d[:, 0], d[:, 1]).sum())
    if metric == "l1":
        return float(np.abs(d).sum())
    raise ArgumentError(f"unknown distance metric {metric!r}")


def build_cost_matrix(samples, instances, lam: float = 2.0, k: int = 3, *,
                      metric: str = "euclidean", normalize: bool = False,
                      alpha: float = ALPHA, gamma: float = GAMMA, eps: float = EPS) -> CostMatrix:
    """Matching costs between samples (rows) and K-replicated instances (columns).

    ``metric="l1"`` swaps the per-vertex Euclidean norm for coordinate-wise
    L1; ``normalize`` divides the regression sum by N.
    """
    if lam < 0:
        raise ArgumentError(f"lambda must be >= 0, got {lam}")
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if metric not in ("euclidean", "l1"):
        raise ArgumentError(f"unknown distance metric {metric!r}")
    inst = [np.asarray(p, dtype=np.float64).ravel() for p in instances]
    preds = [np.asarray(s.contour, dtype=np.float64).ravel() for s in samples]
    lengths = {len(p) for p in inst} | {len(p) for p in preds}
    if len(lengths) > 1:
        raise ArgumentError(f"all contours must share N; got flat lengths {sorted(lengths)}")
    n_samples, n_inst = len(preds), len(inst)
    values = np.full((n_samples, n_inst * k), np.inf)
    if n_samples == 0 or n_inst == 0:
        return CostMatrix(values, n_inst, k, lam)
    n_vert = lengths.pop() // 2

    P = np.stack(preds).reshape(n_samples, 1, n_vert, 2)
    G = np.stack(inst).reshape(1, n_inst, n_vert, 2)
    diff = P - G
    if metric == "euclidean":
        reg = np.hypot(diff[..., 0], diff[..., 1]).sum(axis=2)
    else:
        reg = np.abs(diff).sum(axis=(2, 3))
    if normalize:
        reg = reg / n_vert
    cls = focal_term(np.array([s.score for s in samples]), alpha, gamma, eps)
    base = np.atleast_1d(cls)[:, None] + lam * reg
    inside = np.array([bool(s.in_text_region) for s in samples])
    base[~inside] = np.inf
    values[:] = np.repeat(base, k, axis=1)
    return CostMatrix(values, n_inst, k, lam)


def _lsap(cost: np.ndarray) -> np.ndarray:
    """Shortest-augmenting-path assignment for n <= m finite costs.

    Returns ``col`` with ``col[i]`` the column given to row i. Row potentials
    ``u`` and column potentials ``v`` keep reduced costs non-negative; each
    row is inserted by a Dijkstra-like search over columns. Ties go to the
    lowest column index.
    """
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.intp)     # owner[j]: 1-based row on column j, 0 if free
    way = np.zeros(m + 1, dtype=np.intp)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used
            free[0] = False
            reduced = cost[i0 - 1] - u[i0] - v[1:]
            better = free[1:] & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    col = np.empty(n, dtype=np.intp)
    for j in range(1, m + 1):
        if owner[j]:
            col[owner[j] - 1] = j - 1
    return col


def linear_assignment(cost) -> list[tuple[int, int]]:
    """Min-cost assignment on a rectangular matrix that may hold +inf.

    Maximizes the number of finite pairs first, then minimizes their total.
    Returns (row, col) pairs with finite cost, sorted.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ArgumentError("cost matrix must be 2-D")
    if np.isnan(cost).any() or np.isneginf(cost).any():
        raise ArgumentError("cost matrix may hold finite values or +inf only")
    n, m = cost.shape
    finite = np.isfinite(cost)
    if n == 0 or m == 0 or not finite.any():
        return []
    lo, hi = cost[finite].min(), cost[finite].max()
    # one forbidden pair must outweigh any spread of finite totals
    big = (hi - lo + 1.0) * (min(n, m) + 1) + abs(hi) + abs(lo)
    work = np.where(finite, cost - lo, big)
    transposed = n > m
    if transposed:
        work = work.T
    col = _lsap(work)
    pairs = [(c, r) if transposed else (r, c) for r, c in enumerate(col)]
    return sorted((int(r), int(c)) for r, c in pairs if finite[r, c])


def hungarian_match(cm: CostMatrix) -> MatchResult:
    """Assign up to K samples to every instance at minimum total cost.

    Samples outside the text region (infinite cost) are never used.
    Replica columns of one instance are interchangeable, so each instance's
    samples are reported in ascending order.
    """
    raw = linear_assignment(cm.values)
    by_instance: dict[int, list[int]] = {}
    for r, c in raw:
        by_instance.setdefault(cm.instance_of(c), []).append(r)
    pairs = [(r, j) for j in sorted(by_instance) for r in sorted(by_instance[j])]
    total = math.fsum(cm.values[r, c] for r, c in raw)
    counts = [len(by_instance.get(j, [])) for j in range(cm.n_instances)]
    return MatchResult(pairs, total, counts)


def polygon_nms(preds, iou_threshold: float = 0.5, resolution: int = 512) -> list[int]:
    """Greedy score-ordered suppression; returns indices of the kept predictions.

    A prediction is dropped when its polygon IoU with an already kept one is
    at least ``iou_threshold``. Equal scores are visited in input order.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ArgumentError(f"iou threshold must be in (0, 1), got {iou_threshold}")
    contours = [geo.unflatten(np.ravel(np.asarray(p.contour, dtype=np.float64))) for p in preds]
    scores = np.array([p.score for p in preds], dtype=np.float64)
    order = sorted(range(len(preds)), key=lambda i: (-scores[i], i))
    kept: list[int] = []
    for i in order:
        if all(geo.polygon_iou(contours[i], contours[j], resolution) < iou_threshold for j in kept):
            kept.append(i)
    return kept


# ----------------------------------------------------------------------- losses


def cross_entropy(pred, target, eps: float = EPS) -> float:
    """Mean binary cross entropy."""
    p = clamp(pred, eps)
    t = np.asarray(target, dtype=np.float64)
    return float(np.mean(-(t * np.log(p) + (1 - t) * np.log1p(-p))))


def focal_loss(pred, target, alpha: float = ALPHA, gamma: float = GAMMA, eps: float = EPS) -> float:
    """Mean sigmoid focal loss with alpha weighting on positives."""
    p = clamp(pred, eps)
    t = np.asarray(target, dtype=np.float64)
    pos = -alpha * (1 - p) ** gamma * np.log(p)
    neg = -(1 - alpha) * p**gamma * np.log1p(-p)
    return float(np.mean(t * pos + (1 - t) * neg))


def smooth_l1(pred, target, beta: float = 1.0) -> float:
    """Huber-style smooth L1, averaged over all 2N coordinates."""
    a = np.ravel(np.asarray(pred, dtype=np.float64))
    b = np.ravel(np.asarray(target, dtype=np.float64))
    if a.shape != b.shape:
        raise ArgumentError(f"contour lengths differ: {a.size} vs {b.size}")
    d = np.abs(a - b)
    return float(np.mean(np.where(d < beta, 0.5 * d * d / beta, d - 0.5 * beta)))


def regression_loss(preds, targets, positive, beta: float = 1.0) -> float:
    """Smooth L1 summed over the samples flagged positive."""
    return math.fsum(smooth_l1(p, t, beta) for p, t, keep in zip(preds, targets, positive) if keep)


def classification_loss(tr_pred, tr_target, ssr_pred, ssr_target) -> float:
    """Text-region cross entropy plus sparse-sampling-region focal loss."""
    return cross_entropy(tr_pred, tr_target) + focal_loss(ssr_pred, ssr_target)
