"""Noise-adaptive optimal hard thresholding of singular values."""

from .util._logging import patch_log_levels_in_python_logging_module

patch_log_levels_in_python_logging_module()

from .core import ThresholdResult, denoise, normalize_shape, screenot  # noqa: E402
from .errors import ScreeNOTError  # noqa: E402
from .pseudo_noise import SingularSpectrum, Strategy  # noqa: E402
from .spectral import AtomicCDF, optimal_threshold  # noqa: E402

__all__ = [
    "AtomicCDF",
    "ScreeNOTError",
    "SingularSpectrum",
    "Strategy",
    "ThresholdResult",
    "denoise",
    "normalize_shape",
    "optimal_threshold",
    "screenot",
]
