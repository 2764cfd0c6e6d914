"""Experiment configuration: TOML files merged over packaged presets."""

from __future__ import annotations

import copy
import logging
import re
import tomllib
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ConfigError, DomainError, InputFileError
from ..noise_models import NoiseKind, NoiseSpec, SignalSpec, rows_for
from ..pseudo_noise import Strategy
from ..util.settings import Settings

logger = logging.getLogger(__name__)

PRESETS_FILE = Path(__file__).parent / "presets.toml"

TOP_LEVEL_KEYS = frozenset(
    {"experiment", "seed", "replicates", "k", "p_list", "strategies", "jobs", "plot", "noise", "signal", "x_grid"}
    | {"bins", "output_dir", "rng", "reference_p", "reference_seed"}
)
TABLE_KEYS = {"noise": frozenset({"kind", "gamma", "rho"}), "signal": frozenset({"spikes"})}


class ExperimentKind(StrEnum):
    HIST = "Hist"
    R0_VS_R1 = "R0vsR1"
    SE_VS_ASE = "SEvsASE"
    ORACLE_ATTAINMENT = "OracleAttainment"
    REGRET = "Regret"
    CONVERGENCE_RATE = "ConvergenceRate"

    @classmethod
    def parse(cls, value: "str | ExperimentKind") -> "ExperimentKind":
        if isinstance(value, ExperimentKind):
            return value
        normalized = str(value).strip().lower()
        for member in cls:
            if normalized == member.value.lower():
                return member
        raise ValueError(f"Unknown experiment {value!r}, use one of {[member.value for member in cls]}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment.

    Attributes:
        experiment: Which experiment to run.
        noise: Noise ensemble; ``noise.gamma`` fixes the shape ``n = ceil(p / gamma)``.
        signal: Spikes used by experiments with a fixed signal.
        p_list: Column counts to sweep.
        k: Rank bound handed to the adaptive threshold.
        strategies: Pseudo-noise strategies to compare.
        replicates: Monte-Carlo replicates per ``p``.
        seed: Root seed; replicate streams are spawned from it.
        output_dir: Directory for the CSV, JSON and SVG artifacts.
        x_grid: Spike strengths for the single-spike sweeps.
        bins: Histogram bins of the `Hist` experiment.
        jobs: Worker processes for replicate-level parallelism.
        plot: Also write an SVG chart.
        rng: Name of the numpy bit generator.
        reference_p: Columns of the plugin reference sample.
        reference_seed: Seed of the plugin reference sample.
    """

    experiment: ExperimentKind
    noise: NoiseSpec
    signal: SignalSpec = field(default_factory=SignalSpec)
    p_list: tuple[int, ...] = (500,)
    k: int = 20
    strategies: tuple[Strategy, ...] = tuple(Strategy)
    replicates: int = 1
    seed: int = 0
    output_dir: Path = Path("results")
    x_grid: tuple[float, ...] = ()
    bins: int = 100
    jobs: int = 1
    plot: bool = False
    rng: str = "PCG64"
    reference_p: int = 3000
    reference_seed: int = 20220707

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ConfigError("must be at least 1", "replicates")
        if not self.p_list:
            raise ConfigError("must not be empty", "p_list")
        if any(p < 1 for p in self.p_list):
            raise ConfigError("column counts must be positive", "p_list")
        if self.k < 0:
            raise ConfigError("must be nonnegative", "k")
        if not self.strategies:
            raise ConfigError("must not be empty", "strategies")
        if self.jobs < 1:
            raise ConfigError("must be at least 1", "jobs")
        if self.bins < 1:
            raise ConfigError("must be at least 1", "bins")
        if self.experiment in (ExperimentKind.R0_VS_R1, ExperimentKind.REGRET) and not self.x_grid:
            raise ConfigError(f"{self.experiment} needs a spike grid", "x_grid")
        Settings(self.reference_seed, self.reference_p, self.rng, self.output_dir)

    @property
    def gamma(self) -> float:
        return self.noise.gamma

    def rows(self, p: int) -> int:
        return rows_for(p, self.gamma)

    @property
    def stem(self) -> str:
        """File name stem ``<experiment>_<noise>_<gamma>``."""
        return f"{self.experiment.value}_{self.noise.label}_{self.gamma:g}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment.value,
            "noise": {"kind": self.noise.kind.value, "gamma": self.noise.gamma, "rho": self.noise.rho},
            "signal": {"spikes": list(self.signal.spikes)},
            "p_list": list(self.p_list),
            "k": self.k,
            "strategies": [strategy.value for strategy in self.strategies],
            "replicates": self.replicates,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "x_grid": list(self.x_grid),
            "bins": self.bins,
            "jobs": self.jobs,
            "plot": self.plot,
            "rng": self.rng,
            "reference_p": self.reference_p,
            "reference_seed": self.reference_seed,
        }


def load_presets() -> dict[str, Any]:
    with open(PRESETS_FILE, "rb") as f:
        return tomllib.load(f)


def _merge(base: Mapping[str, Any], update: Mapping[str, Any]) -> dict[str, Any]:
    merged = copy.deepcopy(dict(base))
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping) and key != "x_grid":
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _set_dotted(data: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    for parent in parents:
        data = data.setdefault(parent, {})
    data[leaf] = value


def _line_of(text: str | None, dotted: str) -> int | None:
    if text is None:
        return None
    pattern = re.compile(rf"^\s*{re.escape(dotted.split('.')[-1])}\s*=", re.MULTILINE)
    match = pattern.search(text)
    return text.count("\n", 0, match.start()) + 1 if match else None


class _Reader:
    """Typed access to the merged tree, raising `ConfigError` with field and line on bad values."""

    def __init__(self, data: Mapping[str, Any], source: str | None) -> None:
        self.data = data
        self.source = source

    def error(self, dotted: str, message: str) -> ConfigError:
        return ConfigError(message, field=dotted, line=_line_of(self.source, dotted))

    def raw(self, dotted: str) -> Any:
        node: Any = self.data
        for part in dotted.split("."):
            if not isinstance(node, Mapping) or part not in node:
                raise self.error(dotted, "missing value")
            node = node[part]
        return node

    def get[T](self, dotted: str, convert: Callable[[Any], T], default: T | None = None) -> T:
        try:
            value = self.raw(dotted)
        except ConfigError:
            if default is not None:
                return default
            raise
        try:
            return convert(value)
        except (TypeError, ValueError) as ex:
            raise self.error(dotted, f"invalid value {value!r} ({ex})") from ex


def _strict_int(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError("expected an integer")
    return value


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise TypeError("expected a number")
    return float(value)


def _shape_ratio(value: Any) -> float:
    gamma = _number(value)
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return gamma


def _ar_coefficient(value: Any) -> float:
    rho = _number(value)
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    return rho


def _boolean(value: Any) -> bool:
    if not isinstance(value, bool):
        raise TypeError("expected true or false")
    return value


def _int_list(value: Any) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise TypeError("expected a list of integers")
    return tuple(_strict_int(item) for item in value)


def _float_list(value: Any) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise TypeError("expected a list of numbers")
    return tuple(_number(item) for item in value)


def _grid(value: Any) -> tuple[float, ...]:
    """A list of numbers, or a table ``{start, stop, num}`` expanded with `numpy.linspace`."""
    if isinstance(value, Mapping):
        if set(value) != {"start", "stop", "num"}:
            raise ValueError("a grid table needs exactly the keys start, stop and num")
        num = _strict_int(value["num"])
        if num < 1:
            raise ValueError("num must be positive")
        return tuple(float(x) for x in np.linspace(_number(value["start"]), _number(value["stop"]), num))
    return _float_list(value)


def _strategies(value: Any) -> tuple[Strategy, ...]:
    if not isinstance(value, list):
        raise TypeError("expected a list of strategy names")
    return tuple(dict.fromkeys(Strategy.parse(item) for item in value))


def _check_keys(reader: _Reader, data: Mapping[str, Any]) -> None:
    for key, value in data.items():
        if key not in TOP_LEVEL_KEYS:
            raise reader.error(key, "unknown key")
        if key in TABLE_KEYS:
            if not isinstance(value, Mapping):
                raise reader.error(key, "expected a table")
            for sub_key in value:
                if sub_key not in TABLE_KEYS[key]:
                    raise reader.error(f"{key}.{sub_key}", "unknown key")


def build_config(
    data: Mapping[str, Any],
    settings: Settings | None = None,
    source: str | None = None,
) -> ExperimentConfig:
    """Resolve a configuration tree over the packaged presets.

    Precedence, lowest first: `settings` (environment), the ``defaults`` preset, the experiment's preset,
    then ``data``.

    Args:
        data: The user configuration; must name the ``experiment``.
        settings: Environment defaults for the output directory, RNG and plugin reference.
        source: TOML text ``data`` was parsed from, used to report line numbers.

    Raises:
        ConfigError: A field is missing, unknown or invalid.
    """
    settings = settings or Settings()
    user = _Reader(data, source)
    _check_keys(user, data)
    experiment = user.get("experiment", ExperimentKind.parse)

    presets = load_presets()
    base = {
        "output_dir": str(settings.output_dir),
        "rng": settings.rng,
        "reference_p": settings.reference_p,
        "reference_seed": settings.reference_seed,
    }
    merged = _merge(_merge(_merge(base, presets["defaults"]), presets.get(experiment.value, {})), data)
    reader = _Reader(merged, source)

    noise = NoiseSpec(
        kind=reader.get("noise.kind", NoiseKind.parse),
        gamma=reader.get("noise.gamma", _shape_ratio),
        seed=reader.get("seed", _strict_int),
        rho=reader.get("noise.rho", _ar_coefficient),
    )
    try:
        signal = SignalSpec(spikes=reader.get("signal.spikes", _float_list), seed=reader.get("seed", _strict_int))
    except DomainError as ex:
        raise reader.error("signal.spikes", str(ex)) from ex

    try:
        config = ExperimentConfig(
            experiment=experiment,
            noise=noise,
            signal=signal,
            p_list=reader.get("p_list", _int_list),
            k=reader.get("k", _strict_int),
            strategies=reader.get("strategies", _strategies),
            replicates=reader.get("replicates", _strict_int),
            seed=reader.get("seed", _strict_int),
            output_dir=Path(reader.get("output_dir", str)),
            x_grid=reader.get("x_grid", _grid, ()),
            bins=reader.get("bins", _strict_int, 100),
            jobs=reader.get("jobs", _strict_int),
            plot=reader.get("plot", _boolean),
            rng=reader.get("rng", str),
            reference_p=reader.get("reference_p", _strict_int),
            reference_seed=reader.get("reference_seed", _strict_int),
        )
    except ConfigError as ex:
        if ex.field is None or ex.line is not None:
            raise
        raise reader.error(ex.field, ex.message) from ex
    logger.debug("Resolved configuration: %s", config)
    return config


def load_config(
    path: Path | str | None = None,
    overrides: Mapping[str, Any] | None = None,
    settings: Settings | None = None,
) -> ExperimentConfig:
    """Read a TOML configuration file and resolve it.

    Args:
        path: The file. Without a file, ``overrides`` must name the experiment.
        overrides: Dotted keys (``noise.gamma``) that replace file values; ``None`` values are ignored.
        settings: Environment defaults, see `build_config`.

    Raises:
        InputFileError: The file cannot be read.
        ConfigError: The file is not valid TOML or a field is invalid.

    Example:
        >>> config = load_config(overrides={"experiment": "SEvsASE", "noise.gamma": 1.0})
        >>> config.stem
        'SEvsASE_MarcenkoPastur_1'
    """
    data: dict[str, Any] = {}
    source: str | None = None
    if path is not None:
        path = Path(path)
        try:
            source = path.read_text(encoding="utf-8")
        except OSError as ex:
            raise InputFileError(f"cannot read configuration {path}: {ex.strerror or ex}") from ex
        try:
            data = tomllib.loads(source)
        except tomllib.TOMLDecodeError as ex:
            raise ConfigError(str(ex), line=_decode_error_line(ex)) from ex
        logger.info("Loaded configuration from %s", path)
    for dotted, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(data, dotted, value)
    return build_config(data, settings, source)


def _decode_error_line(ex: tomllib.TOMLDecodeError) -> int | None:
    lineno = getattr(ex, "lineno", None)
    if isinstance(lineno, int):
        return lineno
    match = re.search(r"line (\d+)", str(ex))
    return int(match.group(1)) if match else None
