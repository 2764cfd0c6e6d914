"""Plugin estimates of limiting spectral quantities from one large noise sample."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Any

from ..matrix_lab import singular_values
from ..noise_models import NoiseSpec, gen_noise, make_rng, rows_for
from ..spectral import AtomicCDF
from ..util.settings import DEFAULT_REFERENCE_P, DEFAULT_REFERENCE_SEED, DEFAULT_RNG
from .asymptotics import AsymptoticModel

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReferenceQuantities:
    """Limiting quantities of a noise ensemble, estimated on a ``p``-column sample.

    Attributes:
        noise: Ensemble label, e.g. ``Mix2``.
        gamma: Shape ratio.
        p: Columns of the reference sample.
        n: Rows of the reference sample.
        bulk_edge: Largest noise singular value.
        bbp: Heuristic phase transition location.
        threshold: Optimal hard threshold of the noise CDF.
        x_star: Spike strength at which keeping and dropping the outlier cost the same.
    """

    noise: str
    gamma: float
    p: int
    n: int
    bulk_edge: float
    bbp: float
    threshold: float
    x_star: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@lru_cache(maxsize=32)
def _sample_cdf(noise: NoiseSpec, p: int, seed: int, algorithm: str) -> AtomicCDF:
    n = rows_for(p, noise.gamma)
    _logger.info("Sampling %s reference noise spectrum, %dx%d", noise.label, n, p)
    Z = gen_noise(noise, n, p, make_rng(seed, algorithm=algorithm))
    return AtomicCDF(singular_values(Z))


def reference_cdf(
    noise: NoiseSpec,
    p: int = DEFAULT_REFERENCE_P,
    seed: int = DEFAULT_REFERENCE_SEED,
    algorithm: str = DEFAULT_RNG,
) -> AtomicCDF:
    """Singular value CDF of one ``rows_for(p, gamma)``-by-``p`` draw of `noise`.

    Samples are cached; the seed stored in `noise` plays no role, the sample is drawn from ``seed``.
    """
    return _sample_cdf(replace(noise, seed=0), p, seed, algorithm)


def plugin_model(
    noise: NoiseSpec,
    p: int = DEFAULT_REFERENCE_P,
    seed: int = DEFAULT_REFERENCE_SEED,
    algorithm: str = DEFAULT_RNG,
) -> AsymptoticModel:
    return AsymptoticModel(reference_cdf(noise, p, seed, algorithm), noise.gamma)


def plugin_reference(
    noise: NoiseSpec,
    p: int = DEFAULT_REFERENCE_P,
    seed: int = DEFAULT_REFERENCE_SEED,
    algorithm: str = DEFAULT_RNG,
) -> ReferenceQuantities:
    """Bulk edge, transition, optimal threshold and crossing spike of `noise`, estimated on a plugin sample."""
    model = plugin_model(noise, p, seed, algorithm)
    return ReferenceQuantities(
        noise=noise.label,
        gamma=noise.gamma,
        p=p,
        n=rows_for(p, noise.gamma),
        bulk_edge=model.bulk_edge,
        bbp=model.bbp,
        threshold=model.threshold,
        x_star=model.x_star,
    )
