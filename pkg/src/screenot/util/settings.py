"""Environment-driven runtime settings.

Values are read from the process environment; the CLI loads a ``.env`` file first (see `python-dotenv`).
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError

logger = logging.getLogger(__name__)

SUPPORTED_BIT_GENERATORS: tuple[str, ...] = ("PCG64", "PCG64DXSM", "Philox", "SFC64")

DEFAULT_REFERENCE_SEED = 20220707
DEFAULT_REFERENCE_P = 3000
DEFAULT_RNG = "PCG64"
DEFAULT_OUTPUT_DIR = "results"


def _int_from_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw, 0)
    except ValueError as ex:
        raise ConfigError(f"expected an integer, got {raw!r}", field=name) from ex


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults for plugin references, random number generation and outputs.

    Attributes:
        reference_seed: Seed of the large noise sample used for plugin estimates of limiting quantities.
        reference_p: Column count of that sample; rows follow as ``ceil(p / gamma)``.
        rng: Name of the numpy bit generator; one of `SUPPORTED_BIT_GENERATORS`.
        output_dir: Default directory for experiment artifacts.
    """

    reference_seed: int = DEFAULT_REFERENCE_SEED
    reference_p: int = DEFAULT_REFERENCE_P
    rng: str = DEFAULT_RNG
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)

    def __post_init__(self) -> None:
        if self.rng not in SUPPORTED_BIT_GENERATORS:
            raise ConfigError(f"unsupported bit generator {self.rng!r}, use one of {SUPPORTED_BIT_GENERATORS}", "rng")
        if self.reference_p < 1:
            raise ConfigError("must be positive", "reference_p")

    @classmethod
    def from_env(cls) -> "Settings":
        settings = cls(
            reference_seed=_int_from_env("SCREENOT_REFERENCE_SEED", DEFAULT_REFERENCE_SEED),
            reference_p=_int_from_env("SCREENOT_REFERENCE_P", DEFAULT_REFERENCE_P),
            rng=os.environ.get("SCREENOT_RNG", DEFAULT_RNG).strip() or DEFAULT_RNG,
            output_dir=Path(os.environ.get("SCREENOT_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)),
        )
        logger.debug("Settings from environment: %s", settings)
        return settings
