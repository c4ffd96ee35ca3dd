"""Small dense SVD built on Jacobi rotations.

The left singular vectors come from the symmetric eigenproblem of the Gram
matrix ``A @ A.T`` (2N x 2N, tiny next to the L contour columns). Squaring
the matrix costs relative accuracy in the small singular values, so the rows
of ``U.T @ A`` are re-orthogonalized with one-sided (Hestenes) Jacobi
rotations before singular values are read off as row norms.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, NumericError

RANK_RTOL = 1e-12
MAX_SWEEPS = 60
EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray       # (rows, r), orthonormal columns
    sigma: np.ndarray   # (r,), descending, positive
    v: np.ndarray       # (cols, r), orthonormal columns
    # left directions past the rank, orthonormal to ``u``; (rows, rows - r)
    complement: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return len(self.sigma)

    def reconstruct(self, m: int | None = None) -> np.ndarray:
        m = self.rank if m is None else m
        return (self.u[:, :m] * self.sigma[:m]) @ self.v[:, :m].T


@lru_cache(maxsize=None)
def round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Pairings of 0..n-1 into disjoint (p, q) sets covering every pair once.

    Rotations within one round touch disjoint rows/columns, so a whole round
    can be applied with vectorized updates.
    """
    players = list(range(n)) + ([n] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def jacobi_eigh(g: np.ndarray, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, vecs)`` with eigenvalues in descending order and matching
    eigenvectors as columns.
    """
    a = np.array(g, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ArgumentError(f"expected a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    if n == 1:
        return a[0].copy(), np.eye(1)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), np.eye(n)
    tol = 4 * n * EPS if tol is None else tol
    # the eigenvector accumulator rides under ``a`` so one column update
    # rotates both
    stack = np.vstack([a, np.eye(n)])
    a = stack[:n]
    rounds = round_robin(n)
    for _ in range(MAX_SWEEPS):
        off = a - np.diag(np.diag(a))
        if np.abs(off).max() <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            safe = np.where(active, apq, 1.0)
            with np.errstate(over="ignore"):
                theta = (a[q, q] - a[p, p]) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(1.0, theta))
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # A <- J^T A J, with J rotating coordinates (p, q)
            rp, rq = a[p, :], a[q, :]
            cc, ss = c[:, None], s[:, None]
            a[p, :] = cc * rp - ss * rq
            a[q, :] = ss * rp + cc * rq
            cp, cq = stack[:, p], stack[:, q]
            stack[:, p] = cp * c - cq * s
            stack[:, q] = cp * s + cq * c
    else:
        raise NumericError("Jacobi eigensolver did not converge")
    vecs = stack[n:]
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], vecs[:, order]


def orthogonalize_rows(b: np.ndarray, u: np.ndarray, tol: float | None = None) -> None:
    """One-sided Jacobi: rotate rows of ``b`` (and columns of ``u``) until the
    rows are mutually orthogonal. Works in place."""
    n = b.shape[0]
    if n < 2:
        return
    tol = 4 * n * EPS if tol is None else tol
    rounds = round_robin(n)
    for _ in range(MAX_SWEEPS):
        gram = b @ b.T
        norms = np.sqrt(np.diag(gram))
        # rows at rounding-noise level fall below the rank cut anyway and
        # cannot be made orthogonal to relative precision. Noise rows left by
        # the Gram step start just above the cut and sink below it once
        # rotated against the large rows, so this is re-evaluated per sweep.
        dead = norms <= RANK_RTOL * norms.max()
        denom = np.outer(norms, norms)
        off = np.abs(gram - np.diag(np.diag(gram)))
        live = ~(dead[:, None] | dead[None, :])
        np.fill_diagonal(live, False)
        if np.all(off[live] <= tol * denom[live]):
            return
        rotated = False
        for p, q in rounds:
            bp, bq = b[p, :], b[q, :]
            alpha = np.einsum("ij,ij->i", bp, bp)
            beta = np.einsum("ij,ij->i", bq, bq)
            gamma = np.einsum("ij,ij->i", bp, bq)
            active = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & ~dead[p] & ~dead[q]
            if not active.any():
                continue
            rotated = True
            safe = np.where(active, gamma, 1.0)
            with np.errstate(over="ignore"):
                # huge zeta only means a negligible rotation (t -> 0)
                zeta = (beta - alpha) / (2.0 * safe)
                t = np.sign(zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
            t = np.where(zeta == 0.0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            b[p, :] = c[:, None] * bp - s[:, None] * bq
            b[q, :] = s[:, None] * bp + c[:, None] * bq
            up, uq = u[:, p], u[:, q]
            u[:, p] = up * c - uq * s
            u[:, q] = up * s + uq * c
        if not rotated:
            return
    raise NumericError("one-sided Jacobi did not converge")


def svd(a) -> SvdResult:
    """Thin SVD ``a = u @ diag(sigma) @ v.T`` keeping singular values above
    ``1e-12 * sigma_1``.

    Each left singular vector is sign-normalized so that its largest-magnitude
    entry is positive.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ArgumentError(f"svd needs a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    _, u = jacobi_eigh(a @ a.T)
    b = u.T @ a
    orthogonalize_rows(b, u)
    sigma = np.linalg.norm(b, axis=1)
    order = np.argsort(-sigma, kind="stable")
    sigma, u, b = sigma[order], u[:, order], b[order]
    if sigma[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(sigma > RANK_RTOL * sigma[0]))
    # deterministic signs: largest |entry| of each u_i is positive
    pivot = np.argmax(np.abs(u), axis=0)
    flip = np.sign(u[pivot, np.arange(u.shape[1])])
    flip[flip == 0] = 1.0
    u = u * flip
    b = b * flip[:, None]
    v = (b[:r] / sigma[:r, None]).T.copy()
    return SvdResult(u[:, :r].copy(), sigma[:r].copy(), v, u[:, r:].copy())


def truncate(s: SvdResult, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Leading ``m`` singular triplets: the best rank-m approximation factors."""
    if not 1 <= m <= s.rank:
        raise ArgumentError(f"truncation rank must be in [1, {s.rank}], got {m}")
    return s.u[:, :m].copy(), s.sigma[:m].copy(), s.v[:, :m].copy()


def tail_energy(sigma: np.ndarray, m: int) -> float:
    """Squared Frobenius error of the rank-m truncation, sum of sigma_i^2 for i > m."""
    return float(np.sum(np.asarray(sigma)[m:] ** 2))
