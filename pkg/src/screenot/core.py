"""Adaptive optimal hard threshold of an observed spectrum, and end-to-end matrix denoising."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError
from .pseudo_noise import SingularSpectrum, Strategy, pseudo_noise_cdf
from .spectral import DEFAULT_TOL, AtomicCDF, solve_threshold

_logger = logging.getLogger(__name__)


def normalize_shape(n: int, p: int) -> tuple[int, int, float]:
    """Transpose convention: return ``(n', p', gamma)`` with ``p' <= n'`` and ``gamma = p' / n'``.

    Example:
        >>> normalize_shape(500, 1000)
        (1000, 500, 0.5)
    """
    n, p = int(n), int(p)
    if n < 1 or p < 1:
        raise DomainError(f"matrix dimensions must be positive, got n={n}, p={p}")
    if p > n:
        n, p = p, n
    return n, p, p / n


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of `screenot`.

    Attributes:
        theta_hat: The adaptive threshold; always above the bulk edge of `pseudo_cdf`.
        retained_rank: Number of singular values strictly above `theta_hat`.
        strategy: Prosthesis used to build the pseudo-noise CDF.
        gamma_used: Shape ratio after the transpose convention.
        pseudo_cdf: The pseudo-noise CDF the threshold was computed on.
        solver_iterations: Bisection steps taken.
        psi_at_theta: Value of the threshold functional at `theta_hat`, close to -4.
    """

    theta_hat: float
    retained_rank: int
    strategy: Strategy
    gamma_used: float
    pseudo_cdf: AtomicCDF
    solver_iterations: int
    psi_at_theta: float

    def to_dict(self) -> dict[str, Any]:
        """JSON-friendly summary; the pseudo CDF is reduced to its size and edge."""
        return {
            "theta_hat": self.theta_hat,
            "retained_rank": self.retained_rank,
            "strategy": self.strategy.value,
            "gamma": self.gamma_used,
            "p": self.pseudo_cdf.p,
            "pseudo_edge": self.pseudo_cdf.edge,
            "solver_iterations": self.solver_iterations,
            "psi_at_theta": self.psi_at_theta,
        }


def screenot(
    y: SingularSpectrum | ArrayLike,
    n: int,
    p: int,
    k: int,
    strategy: Strategy | str = Strategy.IMPUTE,
    tol: float = DEFAULT_TOL,
) -> ThresholdResult:
    """Compute the noise-adaptive optimal hard threshold of the singular values ``y`` of an ``n``-by-``p`` matrix.

    The top ``k`` singular values are amputated and replaced according to `strategy`; the threshold is the
    optimal threshold of the resulting pseudo-noise CDF. The guarantees hold when ``k`` is at least the
    signal rank; for smaller ``k`` the threshold is still computed.

    Args:
        y: Singular values in any order, ``min(n, p)`` of them.
        n: Number of rows.
        p: Number of columns. ``n`` and ``p`` are swapped if ``p > n``.
        k: Upper bound on the signal rank.
        strategy: ``impute`` (default), ``winsorize`` or ``zero``.
        tol: Bisection tolerance, absolute for a pseudo-noise bulk edge of at least 1 and relative to it below.

    Raises:
        DomainError: Non-finite or negative values, or a length other than ``min(n, p)``.
        RankBoundError: ``k`` violates the strategy's bound.
        DegenerateSpectrumError: The pseudo-noise CDF has no positive atom.

    Example:
        >>> result = screenot([1.0] * 100, n=100, p=100, k=0)
        >>> round(result.theta_hat, 6), result.retained_rank
        (1.732051, 0)
    """
    n, p, gamma = normalize_shape(n, p)
    spectrum = y if isinstance(y, SingularSpectrum) else SingularSpectrum(np.asarray(y), n, p)
    if (spectrum.n, spectrum.p) != (n, p):
        raise DomainError(f"spectrum was built for n={spectrum.n}, p={spectrum.p}, not n={n}, p={p}")
    strategy = Strategy.parse(strategy)

    pseudo = pseudo_noise_cdf(spectrum, k, strategy)
    solution = solve_threshold(pseudo, gamma, tol)
    retained = int(np.count_nonzero(spectrum.values > solution.theta))
    _logger.info(
        "ScreeNOT threshold %.10g (%s, k=%d, gamma=%.6g) retains %d of %d components",
        solution.theta,
        strategy.value,
        k,
        gamma,
        retained,
        p,
    )
    return ThresholdResult(
        theta_hat=solution.theta,
        retained_rank=retained,
        strategy=strategy,
        gamma_used=gamma,
        pseudo_cdf=pseudo,
        solver_iterations=solution.iterations,
        psi_at_theta=solution.psi_at_theta,
    )


def denoise(
    Y: ArrayLike,
    k: int,
    strategy: Strategy | str = Strategy.IMPUTE,
    tol: float = DEFAULT_TOL,
) -> tuple[np.ndarray, ThresholdResult]:
    """Denoise a data matrix by hard thresholding its singular values at the adaptive threshold.

    Returns:
        The reconstruction, with the same shape as ``Y``, and the threshold details.
    """
    from .matrix_lab import hard_threshold_reconstruct, svd

    matrix = np.asarray(Y, dtype=np.float64)
    if matrix.ndim != 2:
        raise DomainError(f"expected a two-dimensional matrix, got {matrix.ndim} dimensions")
    triple = svd(matrix)
    n, p = matrix.shape
    result = screenot(triple.s, n, p, k, strategy, tol)
    return hard_threshold_reconstruct(triple, result.theta_hat), result
