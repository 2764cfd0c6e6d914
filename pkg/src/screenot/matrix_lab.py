"""Dense matrix support: SVD, hard threshold reconstruction, squared error and the oracle loss."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from .errors import DomainError, ShapeMismatchError, SolverError
from .util._logging import TRACE

_logger = logging.getLogger(__name__)

JACOBI_MAX_SWEEPS = 60
ORACLE_SCREEN_RTOL = 1e-9

SvdMethod = Literal["lapack", "jacobi"]


def _as_matrix(A: ArrayLike) -> np.ndarray:
    matrix = np.asarray(A, dtype=np.float64)
    if matrix.ndim != 2:
        raise DomainError(f"expected a two-dimensional matrix, got {matrix.ndim} dimensions")
    if matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DomainError(f"matrix dimensions must be positive, got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("matrix entries must be finite")
    return matrix


@dataclass(frozen=True, eq=False)
class SvdTriple:
    """Thin SVD ``A = U diag(s) V^T`` with ``m = min(n, p)`` components, ``s`` nonincreasing."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[0]

    @property
    def m(self) -> int:
        return int(self.s.size)


def _complete_basis(Q: np.ndarray, rank: int) -> np.ndarray:
    # replace columns rank.. of Q by an orthonormal complement of the first rank columns
    if rank == Q.shape[1]:
        return Q
    if rank == 0:
        return np.eye(*Q.shape)
    full, _ = scipy.linalg.qr(Q[:, :rank], mode="full")
    completed = Q.copy()
    completed[:, rank:] = full[:, rank : Q.shape[1]]
    return completed


def jacobi_svd(A: ArrayLike, *, tol: float | None = None, max_sweeps: int = JACOBI_MAX_SWEEPS) -> SvdTriple:
    """One-sided (Hestenes) Jacobi SVD.

    Columns of the tall orientation of ``A`` are orthogonalized by plane rotations until every pair is
    orthogonal to ``tol`` relative to the product of their norms. Slower than LAPACK, but with high
    relative accuracy for the small singular values.

    Raises:
        SolverError: The sweeps did not converge.
    """
    matrix = _as_matrix(A)
    transposed = matrix.shape[1] > matrix.shape[0]
    G = (matrix.T if transposed else matrix).copy(order="F")
    rows, cols = G.shape
    V = np.eye(cols)
    tol = float(np.finfo(np.float64).eps * rows) if tol is None else tol

    for sweep in range(max_sweeps):
        rotated = False
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                gi, gj = G[:, i], G[:, j]
                alpha = float(gi @ gi)
                beta = float(gj @ gj)
                cross = float(gi @ gj)
                if abs(cross) <= tol * math.sqrt(alpha * beta) or cross == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * cross)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                G[:, i], G[:, j] = c * gi - s * gj, s * gi + c * gj
                vi, vj = V[:, i].copy(), V[:, j].copy()
                V[:, i], V[:, j] = c * vi - s * vj, s * vi + c * vj
        if not rotated:
            _logger.log(TRACE, "Jacobi SVD of %dx%d converged after %d sweeps", rows, cols, sweep + 1)
            break
    else:
        raise SolverError(f"Jacobi SVD did not converge within {max_sweeps} sweeps")

    values = np.linalg.norm(G, axis=0)
    order = np.argsort(-values, kind="stable")
    values, G, V = values[order], G[:, order], V[:, order]
    cutoff = max(rows, cols) * np.finfo(np.float64).eps * (values[0] if values.size else 0.0)
    rank = int(np.count_nonzero(values > cutoff))
    U = np.zeros_like(G)
    U[:, :rank] = G[:, :rank] / values[:rank]
    U = _complete_basis(U, rank)
    values[rank:] = 0.0

    if transposed:
        return SvdTriple(V, values, U)
    return SvdTriple(U, values, V)


def svd(A: ArrayLike, method: SvdMethod = "lapack") -> SvdTriple:
    """Thin SVD of a dense matrix.

    ``lapack`` uses the divide-and-conquer driver, retries with the QR driver and finally falls back to
    `jacobi_svd` if LAPACK reports non-convergence.

    Raises:
        DomainError: The matrix has non-finite entries or is not two-dimensional.
    """
    matrix = _as_matrix(A)
    if method == "jacobi":
        return jacobi_svd(matrix)
    if method != "lapack":
        raise DomainError(f"unknown SVD method {method!r}")
    for driver in ("gesdd", "gesvd"):
        try:
            U, s, Vt = scipy.linalg.svd(matrix, full_matrices=False, lapack_driver=driver, check_finite=False)
        except scipy.linalg.LinAlgError:
            _logger.warning("LAPACK %s did not converge on a %dx%d matrix", driver, *matrix.shape)
            continue
        return SvdTriple(U, s, Vt.T)
    return jacobi_svd(matrix)


def singular_values(A: ArrayLike) -> np.ndarray:
    """Singular values only, nonincreasing."""
    matrix = _as_matrix(A)
    try:
        return scipy.linalg.svdvals(matrix, check_finite=False)
    except scipy.linalg.LinAlgError:
        _logger.warning("LAPACK did not converge on a %dx%d matrix, using Jacobi", *matrix.shape)
        return jacobi_svd(matrix).s


def reconstruct_rank(triple: SvdTriple, k: int) -> np.ndarray:
    """Truncated reconstruction from the top ``k`` components."""
    if not 0 <= k <= triple.m:
        raise DomainError(f"rank {k} outside [0, {triple.m}]")
    if k == 0:
        return np.zeros(triple.shape)
    return (triple.U[:, :k] * triple.s[:k]) @ triple.V[:, :k].T


def hard_threshold_reconstruct(triple: SvdTriple, theta: float) -> np.ndarray:
    """Keep the components whose singular value strictly exceeds ``theta``."""
    if not theta >= 0:
        raise DomainError(f"threshold must be nonnegative, got {theta!r}")
    rank = int(np.count_nonzero(triple.s > theta))
    return reconstruct_rank(triple, rank)


def se_loss(X: ArrayLike, Xhat: ArrayLike) -> float:
    """Squared Frobenius norm of ``X - Xhat``."""
    X = np.asarray(X, dtype=np.float64)
    Xhat = np.asarray(Xhat, dtype=np.float64)
    if X.shape != Xhat.shape:
        raise ShapeMismatchError(f"shapes differ: {X.shape} and {Xhat.shape}")
    return float(np.sum((X - Xhat) ** 2))


@dataclass(frozen=True)
class OracleResult:
    """Best achievable hard-threshold loss.

    Attributes:
        se: The oracle loss.
        rank: Smallest rank attaining it.
        interval: Open interval of thresholds attaining it; the upper end is ``inf`` for rank 0.
    """

    se: float
    rank: int
    interval: tuple[float, float]


def _achievable_ranks(s: np.ndarray) -> np.ndarray:
    # a rank k is realized by some threshold iff s_k > s_{k+1}; rank m needs s_m > 0
    m = s.size
    ranks = [0]
    ranks.extend(k for k in range(1, m) if s[k - 1] > s[k])
    if m and s[m - 1] > 0:
        ranks.append(m)
    return np.asarray(ranks, dtype=np.int64)


def _interval_for_rank(s: np.ndarray, k: int) -> tuple[float, float]:
    upper = math.inf if k == 0 else float(s[k - 1])
    lower = 0.0 if k == s.size else float(s[k])
    return lower, upper


def se_levels(X: ArrayLike, triple: SvdTriple) -> np.ndarray:
    """Losses ``||X - X_[k]||_F^2`` for ``k = 0..m`` via ``||X||^2 + sum_{i<=k} (s_i^2 - 2 s_i u_i^T X v_i)``.

    Accurate to rounding in ``||X||^2 + s_1^2``; use `se_loss` where exact agreement with a reconstruction matters.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape != triple.shape:
        raise ShapeMismatchError(f"signal shape {X.shape} does not match the SVD shape {triple.shape}")
    s = triple.s
    alignment = np.einsum("ij,ij->j", triple.U, X @ triple.V)
    return float(np.sum(X * X)) + np.concatenate([[0.0], np.cumsum(s * s - 2.0 * s * alignment)])


def oracle(X: ArrayLike, triple: SvdTriple) -> OracleResult:
    """Minimal loss ``||X - X_[k]||_F^2`` over the ranks a hard threshold can realize.

    Losses are first evaluated for every rank with `se_levels`; ranks within a relative ``1e-9`` of the
    smallest are then evaluated exactly with `se_loss` on `reconstruct_rank`, the
    arithmetic `hard_threshold_reconstruct` uses as well. Ties go to the smaller rank.
    """
    levels = se_levels(X, triple)
    X = np.asarray(X, dtype=np.float64)
    s = triple.s
    ranks = _achievable_ranks(s)
    screened = levels[ranks]
    scale = max(levels[0], float(s[0] ** 2) if s.size else 0.0, np.finfo(np.float64).tiny)
    candidates = ranks[screened <= screened.min() + ORACLE_SCREEN_RTOL * scale]

    best_rank, best_se = -1, math.inf
    for k in candidates:
        value = se_loss(X, reconstruct_rank(triple, int(k)))
        if value < best_se:
            best_rank, best_se = int(k), value
    _logger.log(TRACE, "Oracle rank %d among %d candidates, loss %.12g", best_rank, candidates.size, best_se)
    return OracleResult(best_se, best_rank, _interval_for_rank(s, best_rank))


@dataclass(frozen=True)
class DenoiseReport:
    se_at_theta: float
    oracle_se: float
    oracle_rank: int
    oracle_interval: tuple[float, float]
    attained_oracle: bool

    @property
    def regret(self) -> float:
        """Ratio of the loss at the threshold to the oracle loss; 1 when both vanish."""
        if self.oracle_se == 0.0:
            return 1.0 if self.se_at_theta == 0.0 else math.inf
        return self.se_at_theta / self.oracle_se

    def to_dict(self) -> dict[str, Any]:
        lower, upper = self.oracle_interval
        return {
            "se_at_theta": self.se_at_theta,
            "oracle_se": self.oracle_se,
            "oracle_rank": self.oracle_rank,
            "oracle_interval": [lower, None if math.isinf(upper) else upper],
            "attained_oracle": self.attained_oracle,
        }


def denoise_report(
    X: ArrayLike,
    triple: SvdTriple,
    theta: float,
    best: OracleResult | None = None,
) -> DenoiseReport:
    """Compare the loss of thresholding at ``theta`` against the oracle.

    Args:
        best: A precomputed `oracle` result for the same ``X`` and ``triple``.
    """
    best = oracle(X, triple) if best is None else best
    se_at_theta = se_loss(X, hard_threshold_reconstruct(triple, theta))
    lower, upper = best.interval
    return DenoiseReport(
        se_at_theta=se_at_theta,
        oracle_se=best.se,
        oracle_rank=best.rank,
        oracle_interval=best.interval,
        attained_oracle=lower < theta < upper,
    )
