"""Limiting losses of hard thresholding in the spiked model, evaluated on a (plugin) noise CDF."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from functools import cached_property

import numpy as np
import pandas as pd

from ..errors import BelowTransitionError, DomainError
from ..spectral import (
    AtomicCDF,
    bbp_location,
    big_d,
    big_d_inverse,
    big_d_prime,
    solve_threshold,
)

_logger = logging.getLogger(__name__)


class AsymptoticModel:
    """Spike maps and asymptotic losses for one noise CDF ``H`` and shape ratio ``gamma``.

    A spike ``x`` above the phase transition produces an outlier at ``Y(x) = D^{-1}(1 / x^2)`` whose
    singular vectors have asymptotic cosine ``C(x)`` with the signal's. Keeping the outlier costs
    ``R1(x) = x^2 + Y(x)^2 - 2 x Y(x) C(x)``, dropping it costs ``R0(x) = x^2``. The two meet at
    ``x* = D(T)^{-1/2}`` where ``T`` is the optimal threshold.

    Spikes at or below `bbp_location` are treated as producing no outlier; their limiting singular
    value is the bulk edge.
    """

    def __init__(self, H: AtomicCDF, gamma: float) -> None:
        self.H = H
        self.gamma = gamma

    @property
    def bulk_edge(self) -> float:
        return self.H.edge

    @cached_property
    def bbp(self) -> float:
        return bbp_location(self.H, self.gamma)

    @cached_property
    def threshold(self) -> float:
        return solve_threshold(self.H, self.gamma).theta

    @cached_property
    def x_star(self) -> float:
        """Spike strength whose outlier sits exactly at the optimal threshold."""
        return 1.0 / math.sqrt(big_d(self.threshold, self.H, self.gamma))

    def above_transition(self, x: float) -> bool:
        return x > self.bbp

    def outlier(self, x: float) -> float:
        """``Y(x)``; raises `BelowTransitionError` at or below the transition."""
        if not self.above_transition(x):
            raise BelowTransitionError(f"spike {x!r} is at or below the phase transition {self.bbp!r}")
        return big_d_inverse(1.0 / (x * x), self.H, self.gamma)

    def limit_location(self, x: float) -> float:
        """Limiting empirical singular value: ``Y(x)`` above the transition, else the bulk edge."""
        return self.outlier(x) if self.above_transition(x) else self.bulk_edge

    def cosine(self, x: float) -> float:
        if not self.above_transition(x):
            return 0.0
        return -2.0 / (x**3 * big_d_prime(self.outlier(x), self.H, self.gamma))

    @staticmethod
    def r0(x: float) -> float:
        return x * x

    def r1(self, x: float) -> float:
        y = self.outlier(x)
        return x * x + y * y - 2.0 * x * y * self.cosine(x)

    def loss(self, x: float, theta: float) -> float:
        """Asymptotic loss of one spike when thresholding at ``theta``."""
        if self.above_transition(x) and self.outlier(x) > theta:
            return self.r1(x)
        return self.r0(x)

    def optimal_loss(self, x: float) -> float:
        return self.loss(x, self.threshold)

    def _check_theta(self, theta: float) -> None:
        if not theta > self.bulk_edge:
            raise DomainError(f"asymptotic loss needs a threshold above the bulk edge {self.bulk_edge!r}: {theta!r}")

    def ase(self, spikes: Iterable[float], theta: float) -> float:
        """Asymptotic squared error of thresholding at ``theta``; ``theta`` must exceed the bulk edge."""
        self._check_theta(theta)
        return float(sum(self.loss(x, theta) for x in spikes))

    def ase_star(self, spikes: Iterable[float]) -> float:
        return float(sum(self.optimal_loss(x) for x in spikes))

    def optimal_interval(self, spikes: Iterable[float]) -> tuple[float, float]:
        """Thresholds attaining the optimal asymptotic loss.

        The lower end is the largest limiting location below the optimal threshold, the bulk edge included;
        the upper end is the smallest one above it, or ``inf``.
        """
        threshold = self.threshold
        locations = [self.bulk_edge, *(self.limit_location(x) for x in spikes)]
        lower = max(location for location in locations if location < threshold)
        upper = min((location for location in locations if location > threshold), default=math.inf)
        return lower, upper


def x_star(H: AtomicCDF, gamma: float) -> float:
    return AsymptoticModel(H, gamma).x_star


def compute_r0_r1(x_grid: Sequence[float], H: AtomicCDF, gamma: float) -> pd.DataFrame:
    """Tabulate ``R0`` and ``R1`` on ``x_grid``.

    ``R1`` is missing (NaN) at or below the phase transition. The crossing point ``x*`` is repeated in every
    row.
    """
    model = AsymptoticModel(H, gamma)
    xs = np.asarray(x_grid, dtype=np.float64)
    r1 = [model.r1(x) if model.above_transition(x) else math.nan for x in xs]
    _logger.debug("Tabulated R0/R1 on %d points, x* = %.6g, transition %.6g", xs.size, model.x_star, model.bbp)
    return pd.DataFrame({"x": xs, "R0": xs * xs, "R1": r1, "x_star": model.x_star})


def compute_ase(spikes: Iterable[float], theta: float, H: AtomicCDF, gamma: float) -> float:
    return AsymptoticModel(H, gamma).ase(spikes, theta)


def compute_ase_star(spikes: Iterable[float], H: AtomicCDF, gamma: float) -> float:
    return AsymptoticModel(H, gamma).ase_star(spikes)
