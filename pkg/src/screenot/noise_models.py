"""Seeded generators for signal and noise ensembles.

All matrices are ``n``-by-``p`` with ``p <= n``. Noise is scaled so that its singular values stay of order
one as the dimensions grow.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import scipy.linalg
import scipy.signal

from .errors import DomainError
from .util.settings import DEFAULT_RNG, SUPPORTED_BIT_GENERATORS

_logger = logging.getLogger(__name__)

CHI_DEGREES_OF_FREEDOM = 10
MIX2_ATOMS = (1.0, 10.0)
UNIFORM_RANGE = (1.0, 10.0)
FISHER_ASPECT = 3
DEFAULT_RHO = 0.2


class NoiseKind(StrEnum):
    MARCENKO_PASTUR = "MarcenkoPastur"
    CHI10 = "Chi10"
    MIX2 = "Mix2"
    UNIF = "Unif"
    FISHER3N = "Fisher3n"
    FISHER_F = "FisherF"
    PADDED_IDENTITY = "PaddedIdentity"
    AR1 = "AR1"

    @classmethod
    def parse(cls, value: "str | NoiseKind") -> "NoiseKind":
        if isinstance(value, NoiseKind):
            return value
        normalized = str(value).strip().lower()
        for member in cls:
            if normalized in (member.value.lower(), member.name.lower()):
                return member
        raise ValueError(f"Unknown noise kind {value!r}, use one of {[member.value for member in cls]}")

    @property
    def correlated_columns(self) -> bool:
        """Noise of the form ``W S^{1/2}`` with a random diagonal ``S``."""
        return self in (NoiseKind.CHI10, NoiseKind.MIX2, NoiseKind.UNIF)


@dataclass(frozen=True)
class NoiseSpec:
    """A noise ensemble.

    Attributes:
        kind: The ensemble.
        gamma: Shape ratio ``p / n`` in (0, 1].
        seed: Seed used when no generator is passed to `gen_noise`.
        rho: Autoregression coefficient, only used by `NoiseKind.AR1`.
    """

    kind: NoiseKind
    gamma: float
    seed: int = 0
    rho: float = DEFAULT_RHO

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind.parse(self.kind))
        if not (0.0 < self.gamma <= 1.0):
            raise DomainError(f"shape ratio gamma must lie in (0, 1], got {self.gamma!r}")
        if not (0.0 <= self.rho < 1.0):
            raise DomainError(f"AR(1) coefficient must lie in [0, 1), got {self.rho!r}")

    @property
    def label(self) -> str:
        """Short name used in file names and tables, e.g. ``AR1(0.2)``."""
        if self.kind is NoiseKind.AR1:
            return f"AR1({self.rho:g})"
        return self.kind.value


@dataclass(frozen=True)
class SignalSpec:
    """Low-rank signal with singular values `spikes` in uniformly random orthonormal frames."""

    spikes: tuple[float, ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self) -> None:
        spikes = tuple(float(x) for x in self.spikes)
        if any(not math.isfinite(x) or x <= 0 for x in spikes):
            raise DomainError(f"spikes must be positive and finite, got {spikes}")
        if any(a <= b for a, b in zip(spikes, spikes[1:])):
            raise DomainError(f"spikes must be strictly decreasing, got {spikes}")
        object.__setattr__(self, "spikes", spikes)

    @property
    def rank(self) -> int:
        return len(self.spikes)


def make_rng(seed: int, spawn_key: Sequence[int] = (), algorithm: str = DEFAULT_RNG) -> np.random.Generator:
    """Generator with a named bit generator, seeded through `numpy.random.SeedSequence`.

    Different ``spawn_key`` values give independent streams for the same seed.
    """
    if algorithm not in SUPPORTED_BIT_GENERATORS:
        raise DomainError(f"unsupported bit generator {algorithm!r}, use one of {SUPPORTED_BIT_GENERATORS}")
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(key) for key in spawn_key))
    return np.random.Generator(getattr(np.random, algorithm)(sequence))


def rows_for(p: int, gamma: float) -> int:
    """Row count ``ceil(p / gamma)``, rounded first so that e.g. ``p = 300, gamma = 0.3`` gives 1000."""
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"shape ratio gamma must lie in (0, 1], got {gamma!r}")
    return int(math.ceil(round(p / gamma, 9)))


def _check_shape(n: int, p: int) -> None:
    if n < 1 or p < 1:
        raise DomainError(f"matrix dimensions must be positive, got n={n}, p={p}")
    if p > n:
        raise DomainError(f"noise matrices are generated with p <= n, got n={n}, p={p}")


def _gaussian(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    return rng.standard_normal((n, p)) / math.sqrt(n)


def _column_variances(kind: NoiseKind, rng: np.random.Generator, p: int) -> np.ndarray:
    match kind:
        case NoiseKind.CHI10:
            # unit mean; the law has unbounded support, so the top singular value of a sample follows its
            # largest column variance and moves by a few percent between seeds
            return rng.chisquare(CHI_DEGREES_OF_FREEDOM, size=p) / CHI_DEGREES_OF_FREEDOM
        case NoiseKind.MIX2:
            return rng.choice(np.asarray(MIX2_ATOMS), size=p)
        case NoiseKind.UNIF:
            return rng.uniform(*UNIFORM_RANGE, size=p)
    raise DomainError(f"{kind} has no column variance law")


def _wishart_power(rng: np.random.Generator, p: int, variance: float, exponent: float) -> np.ndarray:
    # symmetric power of S2 = W2^T W2 for a 3p-by-p Gaussian W2, full rank almost surely
    W2 = rng.standard_normal((FISHER_ASPECT * p, p)) * math.sqrt(variance)
    eigenvalues, eigenvectors = scipy.linalg.eigh(W2.T @ W2)
    return (eigenvectors * np.clip(eigenvalues, 0.0, None) ** exponent) @ eigenvectors.T


def _fisher_product(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    """``W1 S2^{1/2}`` with ``E[S2] = I``.

    Its limiting spectrum is the free product of Marcenko-Pastur laws with ratios ``gamma`` and 1/3; the
    squared bulk edge is ``min_{t > 0} (1 + t)(1 + gamma t)(1 + t / 3) / t``, e.g. 1.99 at ``gamma = 0.5``.
    """
    W1 = _gaussian(rng, n, p)
    return W1 @ _wishart_power(rng, p, 1.0 / (FISHER_ASPECT * p), 0.5)


def _fisher_ratio(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    """The F-matrix ``W1 S2^{-1/2}`` with ``W2`` entries of variance ``1 / (3n)``, following Wachter's law."""
    W1 = _gaussian(rng, n, p)
    return W1 @ _wishart_power(rng, p, 1.0 / (FISHER_ASPECT * n), -0.5)


def _ar1(rng: np.random.Generator, n: int, p: int, rho: float) -> np.ndarray:
    # z_1 = e_1, z_i = rho z_{i-1} + (1 - rho) e_i down each column
    innovations = rng.standard_normal((n, p))
    innovations[1:] *= 1.0 - rho
    return scipy.signal.lfilter([1.0], [1.0, -rho], innovations, axis=0) / math.sqrt(n)


def gen_noise(spec: NoiseSpec, n: int, p: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw an ``n``-by-``p`` noise matrix from the ensemble `spec`.

    Args:
        spec: The ensemble. Its ``gamma`` describes the limiting shape and is not checked against ``p / n``.
        n: Rows.
        p: Columns, at most ``n``.
        rng: Random source; defaults to a PCG64 stream seeded with ``spec.seed``.

    Raises:
        DomainError: ``p > n`` or nonpositive dimensions.
    """
    _check_shape(n, p)
    rng = make_rng(spec.seed) if rng is None else rng
    match spec.kind:
        case NoiseKind.MARCENKO_PASTUR:
            Z = _gaussian(rng, n, p)
        case NoiseKind.CHI10 | NoiseKind.MIX2 | NoiseKind.UNIF:
            Z = _gaussian(rng, n, p) * np.sqrt(_column_variances(spec.kind, rng, p))
        case NoiseKind.FISHER3N:
            Z = _fisher_product(rng, n, p)
        case NoiseKind.FISHER_F:
            Z = _fisher_ratio(rng, n, p)
        case NoiseKind.PADDED_IDENTITY:
            Z = np.eye(n, p)
        case NoiseKind.AR1:
            Z = _ar1(rng, n, p, spec.rho)
        case _:
            raise DomainError(f"unsupported noise kind {spec.kind!r}")
    _logger.debug("Generated %s noise of shape %dx%d", spec.label, n, p)
    return Z


def gen_signal(spec: SignalSpec, n: int, p: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Rank-``r`` signal ``sum_i x_i a_i b_i^T`` with frames from QR of Gaussian matrices.

    Raises:
        DomainError: The rank exceeds ``min(n, p)``.
    """
    if n < 1 or p < 1:
        raise DomainError(f"matrix dimensions must be positive, got n={n}, p={p}")
    r = spec.rank
    if r > min(n, p):
        raise DomainError(f"signal rank {r} exceeds min(n, p) = {min(n, p)}")
    if r == 0:
        return np.zeros((n, p))
    rng = make_rng(spec.seed) if rng is None else rng
    left, _ = scipy.linalg.qr(rng.standard_normal((n, r)), mode="economic")
    right, _ = scipy.linalg.qr(rng.standard_normal((p, r)), mode="economic")
    return (left * np.asarray(spec.spikes)) @ right.T
