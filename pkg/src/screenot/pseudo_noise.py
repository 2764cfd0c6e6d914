"""Pseudo-noise CDFs: the observed spectrum with its top ``k`` values amputated and a prosthesis fitted.

Three prostheses are available, see `Strategy`. Each returns an `AtomicCDF` with exactly ``p`` atoms.
For a rank-``r`` signal with ``r <= k``, interlacing bounds the Kolmogorov-Smirnov distance to the
(unobserved) noise spectrum by ``(k + r) / p``; it is at most ``k / p`` when the signal lowers none of the
noise singular values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, RankBoundError
from .spectral import AtomicCDF

_logger = logging.getLogger(__name__)

IMPUTATION_EXPONENT = 2.0 / 3.0


class Strategy(StrEnum):
    """How the ``k`` amputated singular values are replaced."""

    TRANSPORT_TO_ZERO = "zero"
    WINSORIZE = "winsorize"
    IMPUTE = "impute"

    @classmethod
    def parse(cls, value: "str | Strategy") -> "Strategy":
        """Accept enum values, member names and the one-letter aliases ``0``, ``w`` and ``i``."""
        if isinstance(value, Strategy):
            return value
        normalized = str(value).strip().lower()
        aliases = {"0": cls.TRANSPORT_TO_ZERO, "w": cls.WINSORIZE, "i": cls.IMPUTE}
        if normalized in aliases:
            return aliases[normalized]
        for member in cls:
            if normalized in (member.value, member.name.lower()):
                return member
        raise ValueError(f"Unknown strategy {value!r}, use one of {[member.value for member in cls]}")


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """Singular values of an ``n``-by-``p`` matrix, sorted nonincreasing, with ``p <= n`` after normalization.

    The constructor sorts the values and swaps ``n`` and ``p`` when ``p > n``.

    Raises:
        DomainError: The values are not finite and nonnegative, or their count is not ``min(n, p)``.
    """

    values: np.ndarray
    n: int
    p: int

    def __post_init__(self) -> None:
        n, p = int(self.n), int(self.p)
        if n < 1 or p < 1:
            raise DomainError(f"matrix dimensions must be positive, got n={n}, p={p}")
        if p > n:
            n, p = p, n
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(values)):
            raise DomainError("singular values must be finite")
        if np.any(values < 0):
            raise DomainError("singular values must be nonnegative")
        if values.size != p:
            raise DomainError(f"expected min(n, p) = {p} singular values, got {values.size}")
        values = np.sort(values)[::-1].copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)

    @classmethod
    def of(cls, values: ArrayLike, n: int | None = None, p: int | None = None) -> "SingularSpectrum":
        """Wrap bare values; missing dimensions default to a square matrix of matching size."""
        size = np.asarray(values).size
        return cls(np.asarray(values), n if n is not None else size, p if p is not None else size)

    @property
    def gamma(self) -> float:
        return self.p / self.n

    def __len__(self) -> int:
        return self.p


def _check_k(y: SingularSpectrum, k: int) -> None:
    if k < 0:
        raise RankBoundError(f"rank bound k must be nonnegative, got {k}")
    if k >= y.p:
        raise RankBoundError(f"rank bound k={k} must be smaller than the number of singular values p={y.p}")


def transport_to_zero(y: SingularSpectrum, k: int) -> AtomicCDF:
    """Drop the ``k`` largest values and add ``k`` zeros."""
    _check_k(y, k)
    return AtomicCDF(np.concatenate([y.values[k:], np.zeros(k)]))


def winsorize(y: SingularSpectrum, k: int) -> AtomicCDF:
    """Clip the ``k`` largest values to ``y[k+1]``."""
    _check_k(y, k)
    values = y.values
    return AtomicCDF(np.concatenate([values[k:], np.full(k, values[k])]))


def impute(y: SingularSpectrum, k: int) -> AtomicCDF:
    """Replace the ``k`` largest values by a reconstructed upper tail.

    The pseudo singular values are

        y[k+1] + (1 - ((i - 1) / k)^(2/3)) / (2^(2/3) - 1) * (y[k+1] - y[2k+1]),   i = 1..k,

    which mimics a square-root density vanishing at the bulk edge. They are never below ``y[k+1]``.

    Raises:
        RankBoundError: ``2k + 1 > p``, so ``y[2k+1]`` does not exist.
    """
    if k < 0:
        raise RankBoundError(f"rank bound k must be nonnegative, got {k}")
    if 2 * k + 1 > y.p:
        raise RankBoundError(f"imputation needs 2k+1 <= p, got k={k} and p={y.p}")
    values = y.values
    if k == 0:
        return AtomicCDF(values)
    anchor, reference = values[k], values[2 * k]
    fraction = np.arange(k, dtype=np.float64) / k
    shape = (1.0 - fraction**IMPUTATION_EXPONENT) / (2.0**IMPUTATION_EXPONENT - 1.0)
    prosthesis = anchor + shape * (anchor - reference)
    return AtomicCDF(np.concatenate([prosthesis, values[k:]]))


_BUILDERS = {
    Strategy.TRANSPORT_TO_ZERO: transport_to_zero,
    Strategy.WINSORIZE: winsorize,
    Strategy.IMPUTE: impute,
}


def pseudo_noise_cdf(y: SingularSpectrum, k: int, strategy: Strategy | str = Strategy.IMPUTE) -> AtomicCDF:
    """Dispatch to the prosthesis selected by `strategy`."""
    strategy = Strategy.parse(strategy)
    cdf = _BUILDERS[strategy](y, k)
    _logger.debug("Pseudo-noise CDF (%s, k=%d): edge %.12g, p=%d", strategy.value, k, cdf.edge, cdf.p)
    return cdf


def ks_distance(F: AtomicCDF, G: AtomicCDF, *, atol: float = 0.0) -> float:
    """Kolmogorov-Smirnov distance ``sup_z |F(z) - G(z)|`` between two atomic CDFs.

    The supremum is attained at an atom, so both step functions are evaluated on the merged atom set.
    Counts are compared in integer arithmetic; for equal sizes the result is ``m / p`` for an integer ``m``.

    Args:
        atol: Evaluate both CDFs at ``z + atol`` instead of ``z``. Atoms closer than ``atol`` then count as
            tied, which makes the result robust to rounding in computed spectra. The value never exceeds
            the exact (``atol = 0``) distance.
    """
    if atol < 0:
        raise DomainError(f"atol must be nonnegative, got {atol!r}")
    f_sorted, g_sorted = F.atoms[::-1], G.atoms[::-1]
    points = np.concatenate([f_sorted, g_sorted]) + atol
    f_counts = np.searchsorted(f_sorted, points, side="right").astype(np.int64)
    g_counts = np.searchsorted(g_sorted, points, side="right").astype(np.int64)
    if F.p == G.p:
        return float(np.max(np.abs(f_counts - g_counts))) / F.p
    # cross-multiplied to stay in integers: |f/p_f - g/p_g| = |f*p_g - g*p_f| / (p_f*p_g)
    gap = np.max(np.abs(f_counts * G.p - g_counts * F.p))
    return float(gap) / (F.p * G.p)
