"""Run configuration: TOML file loading, defaults, and CLI-flag overrides.

A run is described by four sections (all optional, all keys optional
unless noted):

``[protocol]``
    ``delta_deg`` — post-selection offset in degrees (balanced geometry),
    OR all six of ``alpha, beta, mu, nu, gamma, eta`` — explicit real
    coefficients. ``theta`` — signal phase in radians, scalar or list.
``[counting]``
    ``rate`` (counts/s), ``duration`` (s).
``[noise]``
    ``visibility``, ``lcvr_jitter_std``, ``dark_rate``.
``[run]``
    ``seeds`` — explicit list of integers, OR ``seed_count`` /
    ``seed_start`` — contiguous range. ``out`` — output directory.
    ``mode`` — photon-budget convention for comparisons.

Precedence is defaults < file < command-line flags. Unknown sections or
keys are errors (typos should not silently fall back to defaults), and
parse errors carry the file name plus the parser's line/column message.

Units follow bench convention: waveplate/post-selection angles in
degrees, signal phases in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from wmpa.errors import ConfigError
from wmpa.estimation import (
    COMPARISON_MODES,
    CalibrationResult,
    PhotonBudget,
    calibrate_r,
    calibration_from_r,
)
from wmpa.montecarlo import NoiseModel
from wmpa.protocol import ProtocolConfig

__all__ = [
    "DEFAULT_RATE",
    "DEFAULT_DURATION",
    "DEFAULT_THETAS",
    "DEFAULT_MODE",
    "DEFAULT_OUT",
    "RunConfig",
    "load_settings",
    "resolve_run_config",
]

DEFAULT_RATE = 8.0e5
DEFAULT_DURATION = 10.0
DEFAULT_THETAS = (0.03, 0.05, 0.08, 0.1)
DEFAULT_MODE = "equal-detected"
DEFAULT_OUT = "wmpa-out"

_COEFFICIENT_KEYS = ("alpha", "beta", "mu", "nu", "gamma", "eta")

_SCHEMA: dict[str, tuple[str, ...]] = {
    "protocol": ("delta_deg", "theta") + _COEFFICIENT_KEYS,
    "counting": ("rate", "duration"),
    "noise": ("visibility", "lcvr_jitter_std", "dark_rate"),
    "run": ("seeds", "seed_count", "seed_start", "out", "mode"),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description.

    Geometry is either ``delta_deg`` (balanced bench parametrization) or
    ``coefficients`` (explicit ``alpha..eta``), never both; commands that
    need geometry call :meth:`require_geometry`. ``thetas`` are signal
    phases in radians; ``seeds`` is the per-run seed list.
    """

    delta_deg: float | None
    coefficients: tuple[float, float, float, float, float, float] | None
    thetas: tuple[float, ...]
    rate: float
    duration: float
    noise: NoiseModel
    seeds: tuple[int, ...]
    out_dir: Path
    mode: str

    def __post_init__(self) -> None:
        if self.delta_deg is not None and self.coefficients is not None:
            raise ConfigError(
                "[protocol] must give either delta_deg or explicit "
                "coefficients, not both"
            )
        if self.delta_deg is not None:
            value = float(self.delta_deg)
            if not math.isfinite(value):
                raise ConfigError(f"[protocol].delta_deg must be finite, got {value!r}")
            object.__setattr__(self, "delta_deg", value)
        if self.coefficients is not None:
            coeffs = tuple(float(c) for c in self.coefficients)
            if len(coeffs) != 6 or not all(math.isfinite(c) for c in coeffs):
                raise ConfigError(
                    f"[protocol] coefficients must be six finite reals, got {coeffs!r}"
                )
            try:
                ProtocolConfig(*coeffs, theta=0.0)
            except Exception as exc:
                raise ConfigError(f"[protocol] coefficients invalid: {exc}") from exc
            object.__setattr__(self, "coefficients", coeffs)
        thetas = tuple(float(t) for t in self.thetas)
        if not thetas:
            raise ConfigError("at least one theta value is required")
        if not all(math.isfinite(t) for t in thetas):
            raise ConfigError(f"[protocol].theta values must be finite, got {thetas!r}")
        object.__setattr__(self, "thetas", thetas)
        for name in ("rate", "duration"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise ConfigError(f"[counting].{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        seeds = tuple(self.seeds)
        if not seeds:
            raise ConfigError("at least one seed is required")
        for s in seeds:
            if int(s) != s or int(s) < 0:
                raise ConfigError(f"seeds must be nonnegative integers, got {s!r}")
        object.__setattr__(self, "seeds", tuple(int(s) for s in seeds))
        if self.mode not in COMPARISON_MODES:
            raise ConfigError(
                f"[run].mode must be one of {COMPARISON_MODES}, got {self.mode!r}"
            )
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    @property
    def has_geometry(self) -> bool:
        """Whether a protocol geometry was configured."""
        return self.delta_deg is not None or self.coefficients is not None

    def require_geometry(self) -> None:
        """Raise the usage error for commands that need a geometry."""
        if not self.has_geometry:
            raise ConfigError(
                "no protocol geometry configured: set [protocol].delta_deg "
                "(or --delta), or explicit alpha..eta coefficients"
            )

    @property
    def budget(self) -> PhotonBudget:
        """Photon budget (rate, duration) for one counting window."""
        return PhotonBudget(rate=self.rate, duration=self.duration)

    def protocol_config(self, theta: float) -> ProtocolConfig:
        """Protocol coefficients at signal phase ``theta``."""
        self.require_geometry()
        if self.delta_deg is not None:
            return ProtocolConfig.from_postselection_angle(self.delta_deg, theta)
        return ProtocolConfig(*self.coefficients, theta=float(theta))

    def exact_calibration(self) -> CalibrationResult:
        """Calibration record implied exactly by the configured geometry.

        Uses the noise-free post-selection probability (``sin^2(2 delta)``
        in the balanced parametrization) rather than a simulated run.
        """
        self.require_geometry()
        if self.delta_deg is not None:
            sin_2delta = math.sin(math.radians(2.0 * self.delta_deg))
            return calibrate_r(sin_2delta * sin_2delta)
        cfg = ProtocolConfig(*self.coefficients, theta=0.0)
        return calibration_from_r(cfg.amplification().r)

    def to_dict(self) -> dict[str, Any]:
        """Plain-type mirror of the full resolved configuration."""
        return {
            "delta_deg": self.delta_deg,
            "coefficients": list(self.coefficients) if self.coefficients else None,
            "thetas": list(self.thetas),
            "rate": self.rate,
            "duration": self.duration,
            "visibility": self.noise.visibility,
            "lcvr_jitter_std": self.noise.lcvr_jitter_std,
            "dark_rate": self.noise.dark_rate,
            "seeds": list(self.seeds),
            "out": str(self.out_dir),
            "mode": self.mode,
        }


def _require_number(path: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    return float(value)


def _require_int(path: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    return value


def _require_str(path: str, value: Any) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path} must be a string, got {value!r}")
    return value


def load_settings(path: str | Path) -> dict[str, Any]:
    """Parse and schema-check a TOML config file into flat settings.

    Returns a flat dict using the keys understood by
    :func:`resolve_run_config` (``delta_deg``, ``alpha``.., ``thetas``,
    ``rate``, ``duration``, ``visibility``, ``lcvr_jitter_std``,
    ``dark_rate``, ``seeds``, ``seed_count``, ``seed_start``, ``out``,
    ``mode``). Raises :class:`ConfigError` with file/line diagnostics on
    parse errors and with ``[section].key`` paths on schema errors.
    """
    path = Path(path)
    try:
        raw_bytes = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        document = tomllib.loads(raw_bytes.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    settings: dict[str, Any] = {}
    for section, table in document.items():
        if section not in _SCHEMA:
            raise ConfigError(
                f"{path}: unknown section [{section}] "
                f"(expected one of {sorted(_SCHEMA)})"
            )
        if not isinstance(table, dict):
            raise ConfigError(f"{path}: [{section}] must be a table")
        for key, value in table.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"{path}: unknown key [{section}].{key} "
                    f"(expected one of {sorted(_SCHEMA[section])})"
                )
            where = f"{path}: [{section}].{key}"
            if section == "protocol" and key == "theta":
                if isinstance(value, list):
                    settings["thetas"] = tuple(
                        _require_number(where, v) for v in value
                    )
                else:
                    settings["thetas"] = (_require_number(where, value),)
            elif section == "run" and key == "seeds":
                if not isinstance(value, list) or not value:
                    raise ConfigError(f"{where} must be a non-empty list of integers")
                settings["seeds"] = tuple(_require_int(where, v) for v in value)
            elif section == "run" and key in ("seed_count", "seed_start"):
                settings[key] = _require_int(where, value)
            elif section == "run":
                settings[key] = _require_str(where, value)
            else:
                settings[key] = _require_number(where, value)

    if "seeds" in settings and ("seed_count" in settings or "seed_start" in settings):
        raise ConfigError(
            f"{path}: [run].seeds conflicts with [run].seed_count/seed_start"
        )
    given = [k for k in _COEFFICIENT_KEYS if k in settings]
    if given and len(given) != len(_COEFFICIENT_KEYS):
        missing = [k for k in _COEFFICIENT_KEYS if k not in settings]
        raise ConfigError(
            f"{path}: [protocol] explicit coefficients need all of "
            f"{list(_COEFFICIENT_KEYS)}; missing {missing}"
        )
    return settings


def resolve_run_config(
    settings: dict[str, Any] | None = None,
    overrides: dict[str, Any] | None = None,
    default_seed_count: int = 1,
) -> RunConfig:
    """Merge defaults, file settings, and CLI overrides into a RunConfig.

    ``overrides`` uses the same flat keys as :func:`load_settings`; a None
    value means "not given". ``default_seed_count`` sets how many seeds a
    command gets when neither source pins a seed list (counting up from
    ``seed_start``, default 0).
    """
    merged: dict[str, Any] = {}
    for source in (settings or {}, overrides or {}):
        for key, value in source.items():
            if value is not None:
                merged[key] = value

    cli = overrides or {}
    if cli.get("seeds") is None and (
        cli.get("seed_start") is not None or cli.get("seed_count") is not None
    ):
        # Seed-range flags replace a file's explicit seed list outright.
        merged.pop("seeds", None)

    if "seeds" in merged:
        seeds = tuple(int(s) for s in merged["seeds"])
    else:
        start = int(merged.get("seed_start", 0))
        count = int(merged.get("seed_count", default_seed_count))
        if count < 1:
            raise ConfigError(f"[run].seed_count must be >= 1, got {count!r}")
        if start < 0:
            raise ConfigError(f"[run].seed_start must be >= 0, got {start!r}")
        seeds = tuple(range(start, start + count))

    coefficients = None
    if any(k in merged for k in _COEFFICIENT_KEYS):
        coefficients = tuple(merged.get(k) for k in _COEFFICIENT_KEYS)
        if any(c is None for c in coefficients):
            missing = [k for k in _COEFFICIENT_KEYS if merged.get(k) is None]
            raise ConfigError(
                f"[protocol] explicit coefficients need all of "
                f"{list(_COEFFICIENT_KEYS)}; missing {missing}"
            )
    delta_deg = merged.get("delta_deg")
    if delta_deg is not None and coefficients is not None:
        # An explicit --delta flag wins over file coefficients; the
        # both-given error is reserved for conflicts within one source.
        if cli.get("delta_deg") is not None and all(
            cli.get(k) is None for k in _COEFFICIENT_KEYS
        ):
            coefficients = None

    noise = NoiseModel(
        visibility=float(merged.get("visibility", 1.0)),
        lcvr_jitter_std=float(merged.get("lcvr_jitter_std", 0.0)),
        dark_rate=float(merged.get("dark_rate", 0.0)),
    )
    return RunConfig(
        delta_deg=delta_deg,
        coefficients=coefficients,
        thetas=tuple(merged.get("thetas", DEFAULT_THETAS)),
        rate=float(merged.get("rate", DEFAULT_RATE)),
        duration=float(merged.get("duration", DEFAULT_DURATION)),
        noise=noise,
        seeds=seeds,
        out_dir=Path(merged.get("out", DEFAULT_OUT)),
        mode=str(merged.get("mode", DEFAULT_MODE)),
    )
