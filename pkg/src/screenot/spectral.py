"""Spectral functionals of atomic singular value distributions.

All functionals take an `AtomicCDF` ``H`` (p equal-mass atoms) and, where relevant, the shape ratio
``gamma`` in (0, 1]. They are defined for evaluation points strictly above the bulk edge of ``H``:

- ``phi(y; H)``, the mean of ``y / (y^2 - z^2)`` over the atoms, and its derivative,
- the companion transform ``phi_tilde = gamma * phi + (1 - gamma) / y`` and its derivative,
- ``D = phi * phi_tilde`` and its derivative,
- ``Psi = y * D' / D``, which increases from minus infinity at the edge to -2 at infinity.

The optimal hard threshold of a spectrum is the unique root of ``Psi(theta) = -4``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
from numpy.typing import ArrayLike

from .errors import BelowTransitionError, DegenerateSpectrumError, DomainError, SolverError

_logger = logging.getLogger(__name__)

TARGET_PSI = -4.0
DEFAULT_TOL = 1e-9
DEFAULT_INVERSE_TOL = 1e-13
MAX_ITERATIONS = 200
MAX_DOUBLINGS = 200
LOWER_BRACKET_EPS = 1e-10
BBP_OFFSET = 0.01


@dataclass(frozen=True, eq=False)
class AtomicCDF:
    """A discrete CDF of ``p`` equal-mass atoms, stored sorted nonincreasing.

    The constructor accepts any finite, nonnegative, nonempty array and sorts it. The stored array is
    read-only.

    Example:
        >>> H = AtomicCDF([1.0, 3.0, 2.0])
        >>> H.atoms
        array([3., 2., 1.])
        >>> H.edge
        3.0
    """

    atoms: np.ndarray

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=np.float64).ravel()
        if atoms.size < 1:
            raise DomainError("an atomic CDF needs at least one atom")
        if not np.all(np.isfinite(atoms)):
            raise DomainError("atoms must be finite")
        if np.any(atoms < 0):
            raise DomainError("atoms must be nonnegative")
        atoms = np.sort(atoms)[::-1].copy()
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @property
    def p(self) -> int:
        return int(self.atoms.size)

    @property
    def edge(self) -> float:
        """Largest atom, the upper edge of the support."""
        return float(self.atoms[0])

    @property
    def is_degenerate(self) -> bool:
        return self.edge == 0.0

    def __len__(self) -> int:
        return self.p

    def cdf(self, z: ArrayLike) -> np.ndarray | float:
        """Fraction of atoms ``<= z`` (right-continuous)."""
        counts = np.searchsorted(self.atoms[::-1], z, side="right")
        if np.ndim(counts) == 0:
            return float(counts) / self.p
        return np.asarray(counts, dtype=np.float64) / self.p

    def scaled(self, factor: float) -> "AtomicCDF":
        return AtomicCDF(self.atoms * factor)


def _check_gamma(gamma: float) -> float:
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"shape ratio gamma must lie in (0, 1], got {gamma!r}")
    return float(gamma)


def _check_point(y: float, H: AtomicCDF) -> float:
    y = float(y)
    if not math.isfinite(y) or y <= H.edge:
        raise DomainError(f"evaluation point {y!r} must be finite and exceed the bulk edge {H.edge!r}")
    return y


def _phi_pair(y: float, H: AtomicCDF) -> tuple[float, float]:
    # (y - z)(y + z) instead of y^2 - z^2 keeps precision close to the edge; np.mean sums pairwise
    z = H.atoms
    try:
        with np.errstate(divide="raise", over="raise", invalid="raise"):
            gap = (y - z) * (y + z)
            value = float(np.mean(y / gap))
            derivative = -float(np.mean((y * y + z * z) / (gap * gap)))
    except FloatingPointError as ex:
        raise DomainError(f"phi is not representable at {y!r} (edge {H.edge!r}): {ex}") from ex
    if not (math.isfinite(value) and math.isfinite(derivative)):
        raise DomainError(f"phi is not finite at {y!r} (edge {H.edge!r})")
    return value, derivative


def bulk_edge(H: AtomicCDF) -> float:
    return H.edge


def phi(y: float, H: AtomicCDF) -> float:
    """Mean of ``y / (y^2 - z^2)`` over the atoms ``z`` of ``H``.

    Example:
        >>> phi(2.0, AtomicCDF([1.0]))
        0.6666666666666666
    """
    return _phi_pair(_check_point(y, H), H)[0]


def phi_prime(y: float, H: AtomicCDF) -> float:
    return _phi_pair(_check_point(y, H), H)[1]


def phi_tilde(y: float, H: AtomicCDF, gamma: float) -> float:
    """Transform of the companion CDF, ``H`` diluted with ``1 - gamma`` mass at zero."""
    gamma = _check_gamma(gamma)
    y = _check_point(y, H)
    return gamma * _phi_pair(y, H)[0] + (1.0 - gamma) / y


def phi_tilde_prime(y: float, H: AtomicCDF, gamma: float) -> float:
    gamma = _check_gamma(gamma)
    y = _check_point(y, H)
    return gamma * _phi_pair(y, H)[1] - (1.0 - gamma) / (y * y)


def _d_pair(y: float, H: AtomicCDF, gamma: float) -> tuple[float, float, float, float]:
    f, df = _phi_pair(y, H)
    g = gamma * f + (1.0 - gamma) / y
    dg = gamma * df - (1.0 - gamma) / (y * y)
    return f, df, g, dg


def big_d(y: float, H: AtomicCDF, gamma: float) -> float:
    gamma = _check_gamma(gamma)
    f, _, g, _ = _d_pair(_check_point(y, H), H, gamma)
    return f * g


def big_d_prime(y: float, H: AtomicCDF, gamma: float) -> float:
    gamma = _check_gamma(gamma)
    f, df, g, dg = _d_pair(_check_point(y, H), H, gamma)
    return df * g + f * dg


def psi(y: float, H: AtomicCDF, gamma: float) -> float:
    """The optimal threshold functional ``y * D'(y) / D(y)``.

    Raises:
        DegenerateSpectrumError: All atoms are zero; then ``Psi`` is identically -2.
        DomainError: ``y`` does not exceed the bulk edge.
    """
    if H.is_degenerate:
        raise DegenerateSpectrumError("all atoms are zero, the threshold functional has no root")
    gamma = _check_gamma(gamma)
    y = _check_point(y, H)
    f, df, g, dg = _d_pair(y, H, gamma)
    return y * (df / f + dg / g)


@dataclass(frozen=True)
class ThresholdSolution:
    """Root of ``Psi = -4`` together with solver diagnostics."""

    theta: float
    iterations: int
    psi_at_theta: float
    bracket: tuple[float, float]


def _lower_bracket(fn, edge: float, scale: float) -> float:
    # shrink the offset geometrically towards the edge until fn(lo) < 0
    eps = LOWER_BRACKET_EPS
    while True:
        lo = edge + scale * eps
        if lo <= edge:
            raise SolverError(f"could not bracket the root from below near the edge {edge!r}")
        value = fn(lo)
        if value < 0:
            return lo
        eps /= 10.0


def _upper_bracket(fn, start: float) -> float:
    hi = start
    for _ in range(MAX_DOUBLINGS):
        value = fn(hi)
        if not math.isfinite(value):
            break
        if value > 0:
            return hi
        hi *= 2.0
    raise SolverError(f"could not bracket the root from above after {MAX_DOUBLINGS} doublings")


def _bisect(fn, lo: float, hi: float, xtol: float) -> tuple[float, int]:
    try:
        root, result = scipy.optimize.bisect(
            fn, lo, hi, xtol=xtol, maxiter=MAX_ITERATIONS, full_output=True, disp=False
        )
    except ValueError as ex:
        raise SolverError(f"bisection failed on [{lo!r}, {hi!r}]: {ex}") from ex
    if not result.converged:
        raise SolverError(f"bisection did not converge within {MAX_ITERATIONS} iterations ({result.flag})")
    return float(root), int(result.iterations)


def solve_threshold(H: AtomicCDF, gamma: float, tol: float = DEFAULT_TOL) -> ThresholdSolution:
    """Solve ``Psi(theta; H, gamma) = -4`` by bisection.

    The bracket starts at ``edge * (1 + 1e-10)`` from below, moved closer to the edge while ``Psi`` is not yet
    below -4, and at ``edge + 1`` from above, doubled until ``Psi`` exceeds -4. Bisection stops once the
    bracket is narrower than ``tol * min(1, edge)``: ``tol`` is absolute for spectra of order one or larger
    and relative to the edge for smaller ones, which keeps ``T(c * H) = c * T(H)`` for small ``c``.

    Raises:
        DegenerateSpectrumError: ``H`` has no positive atom.
        SolverError: The root could not be bracketed or bisection did not converge.
    """
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    if H.is_degenerate:
        raise DegenerateSpectrumError("all atoms are zero, the threshold functional has no root")
    gamma = _check_gamma(gamma)
    edge = H.edge

    def objective(y: float) -> float:
        return psi(y, H, gamma) - TARGET_PSI

    lo = _lower_bracket(objective, edge, edge)
    hi = _upper_bracket(objective, edge + 1.0)
    theta, iterations = _bisect(objective, lo, hi, xtol=tol * min(1.0, edge))
    psi_at_theta = psi(theta, H, gamma)
    _logger.debug(
        "Threshold %.12g for p=%d, gamma=%.6g (edge %.12g, %d iterations, psi %.3g)",
        theta,
        H.p,
        gamma,
        edge,
        iterations,
        psi_at_theta,
    )
    return ThresholdSolution(theta, iterations, psi_at_theta, (lo, hi))


def optimal_threshold(H: AtomicCDF, gamma: float, tol: float = DEFAULT_TOL) -> float:
    """The optimal hard threshold ``T_gamma(H)``; see `solve_threshold`."""
    return solve_threshold(H, gamma, tol).theta


def big_d_inverse(d: float, H: AtomicCDF, gamma: float, tol: float = DEFAULT_INVERSE_TOL) -> float:
    """Invert the strictly decreasing ``D`` on ``(edge, inf)``.

    For an atomic CDF ``D`` diverges at the edge, so every positive ``d`` lies in the range.
    """
    gamma = _check_gamma(gamma)
    if not (math.isfinite(d) and d > 0):
        raise DomainError(f"D takes values in (0, inf), got {d!r}")
    edge = H.edge
    scale = edge if edge > 0 else 1.0 / math.sqrt(d)

    def objective(y: float) -> float:
        return d - big_d(y, H, gamma)

    lo = _lower_bracket(objective, edge, scale)
    hi = _upper_bracket(objective, edge + scale)
    root, _ = _bisect(objective, lo, hi, xtol=tol * scale)
    return root


def bbp_location(H: AtomicCDF, gamma: float, offset: float = BBP_OFFSET) -> float:
    """Heuristic phase transition location ``D(edge + offset)^(-1/2)``.

    For any atomic CDF the exact limit at the edge is zero; evaluating slightly above the edge gives a
    usable, biased, plugin estimate for the limiting distribution the atoms were sampled from.
    """
    return 1.0 / math.sqrt(big_d(H.edge + offset, H, gamma))


def spike_forward(x: float, H: AtomicCDF, gamma: float) -> float:
    """Limiting location of the empirical singular value of a spike ``x``: ``D^{-1}(1 / x^2)``.

    Raises:
        BelowTransitionError: ``x`` does not exceed `bbp_location`.
    """
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"spike must be positive and finite, got {x!r}")
    x_plus = bbp_location(H, gamma)
    if x <= x_plus:
        raise BelowTransitionError(f"spike {x!r} is at or below the phase transition {x_plus!r}")
    return big_d_inverse(1.0 / (x * x), H, gamma)


def cosine_at(y: float, H: AtomicCDF, gamma: float) -> float:
    """Asymptotic cosine in the parametrization by the outlier location ``y``: ``-2 D^{3/2} / D'``."""
    gamma = _check_gamma(gamma)
    f, df, g, dg = _d_pair(_check_point(y, H), H, gamma)
    d = f * g
    return -2.0 * d**1.5 / (df * g + f * dg)


def spike_cosine(x: float, H: AtomicCDF, gamma: float) -> float:
    """Asymptotic cosine ``-2 / (x^3 D'(Y(x)))``; zero at or below the phase transition."""
    try:
        y = spike_forward(x, H, gamma)
    except BelowTransitionError:
        return 0.0
    return -2.0 / (x**3 * big_d_prime(y, H, gamma))
