"""Seeded photon-counting simulation of the amplification measurement.

Each run draws, in this fixed order (part of the reproducibility
contract):

1. optional Gaussian retardance jitter added to the signal phase
   (skipped entirely when the jitter width is zero),
2. the number of photons entering post-selection, Poisson at
   ``rate * duration``,
3. the number surviving post-selection, binomial at the configuration's
   exact success probability,
4. the "+" detector count among survivors, binomial at
   ``(1 + V cos kappa_exact)/2`` with kappa_exact the exact (not
   first-order) amplified phase of the (jittered) configuration,
5. optional Poisson dark counts at ``dark_rate * duration``, added to each
   detector symmetrically.

All draws come from a single ``numpy.random.Generator`` (PCG64) seeded
with the given integer, so identical inputs give bit-identical counts; no
global RNG state is touched. Batch work should use distinct seeds per
run — :func:`spawn_seeds` derives statistically independent child seeds
from one parent, and :func:`derive_seed` gives a named independent stream
for a companion draw (e.g. a baseline arm).

Dark counts must remain small relative to the input photon number;
otherwise the count record's sanity invariant (detected <= input) fails,
which surfaces as a validation error rather than silently corrupt data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from wmpa.errors import InsufficientDataError, ValidationError
from wmpa.protocol import ProtocolConfig, run_protocol

__all__ = [
    "NoiseModel",
    "CountData",
    "simulate_counts",
    "sigma_x_from_counts",
    "spawn_seeds",
    "derive_seed",
]


@dataclass(frozen=True)
class NoiseModel:
    """Detector-side imperfections.

    Parameters
    ----------
    visibility : float
        Interference contrast V in [0, 1]; enters the click probability as
        ``(1 + V cos kappa)/2``.
    lcvr_jitter_std : float
        Standard deviation (radians, >= 0) of a per-run Gaussian offset on
        the signal phase, modeling retarder phase fluctuation.
    dark_rate : float
        Dark counts per second per detector (>= 0), added symmetrically.
    """

    visibility: float = 1.0
    lcvr_jitter_std: float = 0.0
    dark_rate: float = 0.0

    def __post_init__(self) -> None:
        for name, high in (("visibility", 1.0), ("lcvr_jitter_std", None), ("dark_rate", None)):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0 or (high is not None and value > high):
                bound = f"[0, {high}]" if high is not None else "[0, inf)"
                raise ValidationError(f"{name} must lie in {bound}, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class CountData:
    """Detector clicks from one counting run, with everything needed to replay it.

    ``config`` holds the protocol settings *before* jitter; rerunning
    :func:`simulate_counts` on the stored fields reproduces the record
    exactly.
    """

    n_plus: int
    n_minus: int
    n_input: int
    duration: float
    rate: float
    seed: int
    config: ProtocolConfig
    noise: NoiseModel

    def __post_init__(self) -> None:
        for name in ("n_plus", "n_minus", "n_input"):
            value = getattr(self, name)
            if int(value) != value or int(value) < 0:
                raise ValidationError(f"{name} must be a nonnegative integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n_plus + self.n_minus > self.n_input:
            raise ValidationError(
                f"detected counts ({self.n_plus + self.n_minus}) exceed input "
                f"photons ({self.n_input})"
            )
        for name in ("duration", "rate"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise ValidationError(f"{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        if int(self.seed) != self.seed or int(self.seed) < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_detected(self) -> int:
        """Total clicks across both detectors."""
        return self.n_plus + self.n_minus

    def to_record(self) -> dict[str, float | int]:
        """Flatten to a single CSV-friendly record including the config snapshot."""
        record: dict[str, float | int] = {
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "n_input": self.n_input,
            "duration": self.duration,
            "rate": self.rate,
            "seed": self.seed,
        }
        for f in fields(ProtocolConfig):
            record[f.name] = getattr(self.config, f.name)
        for f in fields(NoiseModel):
            record[f.name] = getattr(self.noise, f.name)
        return record

    @classmethod
    def from_record(cls, record: dict[str, float | int]) -> "CountData":
        """Rebuild from :meth:`to_record` output (values may arrive as strings)."""
        def get(name: str) -> float:
            try:
                return float(record[name])
            except KeyError:
                raise ValidationError(f"count record missing field {name!r}") from None
        config = ProtocolConfig(**{f.name: get(f.name) for f in fields(ProtocolConfig)})
        noise = NoiseModel(**{f.name: get(f.name) for f in fields(NoiseModel)})
        return cls(
            n_plus=int(get("n_plus")),
            n_minus=int(get("n_minus")),
            n_input=int(get("n_input")),
            duration=get("duration"),
            rate=get("rate"),
            seed=int(get("seed")),
            config=config,
            noise=noise,
        )


def simulate_counts(
    cfg: ProtocolConfig,
    noise: NoiseModel,
    rate: float,
    duration: float,
    seed: int,
) -> CountData:
    """Simulate one counting run of the amplification measurement.

    See the module docstring for the exact draw order. The click
    probability uses the exact amplified phase of the configuration (with
    jitter applied to theta first, when enabled), not its first-order
    approximation.

    Raises
    ------
    ValidationError
        For nonpositive rate/duration or a negative/non-integer seed.
    GlobalPhaseDegenerateError
        If the configuration is degenerate (propagated from the protocol).
    """
    rate = float(rate)
    duration = float(duration)
    if not math.isfinite(rate) or rate <= 0.0:
        raise ValidationError(f"rate must be positive, got {rate!r}")
    if not math.isfinite(duration) or duration <= 0.0:
        raise ValidationError(f"duration must be positive, got {duration!r}")
    if int(seed) != seed or int(seed) < 0:
        raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
    rng = np.random.default_rng(int(seed))

    run_cfg = cfg
    if noise.lcvr_jitter_std > 0.0:
        run_cfg = replace(cfg, theta=cfg.theta + rng.normal(0.0, noise.lcvr_jitter_std))
    outcome = run_protocol(run_cfg)

    n_input = int(rng.poisson(rate * duration))
    survivors = int(rng.binomial(n_input, outcome.success_prob))
    p_plus = 0.5 * (1.0 + noise.visibility * math.cos(outcome.kappa_exact))
    n_plus = int(rng.binomial(survivors, p_plus))
    n_minus = survivors - n_plus
    if noise.dark_rate > 0.0:
        n_plus += int(rng.poisson(noise.dark_rate * duration))
        n_minus += int(rng.poisson(noise.dark_rate * duration))

    return CountData(
        n_plus=n_plus,
        n_minus=n_minus,
        n_input=n_input,
        duration=duration,
        rate=rate,
        seed=int(seed),
        config=cfg,
        noise=noise,
    )


def sigma_x_from_counts(c: CountData) -> tuple[float, float]:
    """Pauli-X estimate and its binomial standard error from click counts.

    Returns ``(n_plus - n_minus) / n`` and ``sqrt((1 - estimate^2) / n)``
    with ``n`` the total detected count.

    Raises
    ------
    InsufficientDataError
        If no photons were detected.
    """
    n = c.n_detected
    if n <= 0:
        raise InsufficientDataError("no detected photons; cannot estimate sigma_x")
    estimate = (c.n_plus - c.n_minus) / n
    std_error = math.sqrt(max(0.0, 1.0 - estimate * estimate) / n)
    return estimate, std_error


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Derive ``n`` statistically independent child seeds from one parent."""
    if int(n) != n or n < 0:
        raise ValidationError(f"seed count must be a nonnegative integer, got {n!r}")
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(int(seed)).spawn(int(n))]


def derive_seed(seed: int, stream: int) -> int:
    """Deterministic seed for a named companion stream of ``seed``.

    Different ``stream`` values give draws independent of each other and of
    ``numpy.random.default_rng(seed)`` itself.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return int(sequence.generate_state(1)[0])
