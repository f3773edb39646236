"""Calibration and phase inference for the amplification measurement.

Calibration: with the signal off, the post-selection success probability p
fixes the selection ratio through

    r = (sqrt(p) - sqrt(1 - p)) / (sqrt(p) + sqrt(1 - p)),

equivalently ``sin(2 delta) = sqrt(p)`` and ``r = -tan(45deg - 2 delta)``
for the balanced bench geometry. :func:`calibrate_r` solves this from a
measured p-hat; :func:`calibration_from_r` builds the equivalent record
from a target r directly.

Inference: the detector asymmetry estimates ``<sigma_x> = V cos(kappa)``,
so ``kappa_hat = arccos(clamp(sigma_x_hat / V))`` (the arccos branch is
nonnegative — the measurement has no second quadrature to sign the phase),
and the signal phase follows from the exact inversion
``theta = kappa + arcsin(r sin kappa)``. Shot noise routinely pushes
``sigma_x_hat / V`` slightly past 1 near kappa = 0; the ratio is clamped
and flagged rather than treated as an error.

Sensitivity: at leading order the phase uncertainty from binomial counting
noise is ``Delta theta = Delta<sigma_x> / (h sin(h theta)) = 1/(h sqrt(N))``
— magnification buys an h-fold improvement per detected photon.
An imperfect visibility V sets a floor ``arccos(V)`` on the phase
distinguishable from zero (``arccos(V)/h`` with amplified readout).

The conventional (unamplified, no post-selection) interferometer is
provided as a baseline, and :func:`compare_protocols` runs both arms over
a seed list at either equal detected photons or equal input photons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wmpa.errors import (
    CalibrationBoundaryError,
    UndefinedSensitivityError,
    ValidationError,
)
from wmpa.montecarlo import (
    CountData,
    NoiseModel,
    derive_seed,
    sigma_x_from_counts,
    simulate_counts,
)
from wmpa.protocol import ProtocolConfig, invert_amplification, magnification

__all__ = [
    "CalibrationResult",
    "PhaseEstimate",
    "PhotonBudget",
    "ComparisonRow",
    "ComparisonReport",
    "COMPARISON_MODES",
    "calibrate_r",
    "calibration_from_r",
    "kappa_from_counts",
    "estimate_phase",
    "analytic_sensitivity",
    "conventional_baseline",
    "visibility_floor",
    "compare_protocols",
]

_CONSISTENCY_TOL = 1.0e-12

COMPARISON_MODES = ("equal-detected", "equal-input")
"""Photon-budget conventions for the two-arm comparison."""

_BASELINE_STREAM = 1
"""Named companion RNG stream for the conventional arm."""


@dataclass(frozen=True)
class CalibrationResult:
    """Selection geometry recovered from a signal-off measurement.

    Fields are mutually consistent by construction and validated:
    ``r_hat`` solves the calibration identity at ``p_hat``;
    ``sin(2 delta_hat) = sqrt(p_hat)`` (``delta_hat`` in degrees);
    ``h_hat = 1/(1 + r_hat)``. ``std_error_p`` is the binomial standard
    error of ``p_hat`` (NaN when the trial count is unknown).
    """

    p_hat: float
    r_hat: float
    delta_hat: float
    h_hat: float
    std_error_p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p_hat < 1.0:
            raise CalibrationBoundaryError(
                f"p_hat must lie strictly inside (0, 1), got {self.p_hat!r}"
            )
        sqrt_p = math.sqrt(self.p_hat)
        sqrt_q = math.sqrt(1.0 - self.p_hat)
        expected_r = (sqrt_p - sqrt_q) / (sqrt_p + sqrt_q)
        if abs(self.r_hat - expected_r) > _CONSISTENCY_TOL:
            raise ValidationError(
                f"r_hat = {self.r_hat!r} inconsistent with p_hat (expected {expected_r!r})"
            )
        if abs(math.sin(math.radians(2.0 * self.delta_hat)) - sqrt_p) > _CONSISTENCY_TOL:
            raise ValidationError(
                f"delta_hat = {self.delta_hat!r} deg inconsistent with "
                f"sin(2 delta) = sqrt(p_hat) = {sqrt_p!r}"
            )
        expected_h = magnification(self.r_hat)
        if abs(self.h_hat - expected_h) > _CONSISTENCY_TOL * max(1.0, abs(expected_h)):
            raise ValidationError(
                f"h_hat = {self.h_hat!r} inconsistent with 1/(1+r) = {expected_h!r}"
            )

    @property
    def std_error_r(self) -> float:
        """Standard error of ``r_hat``, propagated from ``std_error_p``.

        Uses ``dr/dp = 1 / (sqrt(p q) (sqrt(p) + sqrt(q))^2)`` with
        ``q = 1 - p``; NaN when the trial count behind ``p_hat`` is
        unknown.
        """
        if not math.isfinite(self.std_error_p):
            return math.nan
        sqrt_p = math.sqrt(self.p_hat)
        sqrt_q = math.sqrt(1.0 - self.p_hat)
        dr_dp = 1.0 / (sqrt_p * sqrt_q * (sqrt_p + sqrt_q) ** 2)
        return self.std_error_p * dr_dp


@dataclass(frozen=True)
class PhaseEstimate:
    """One phase estimate with its uncertainties and validity flags.

    ``std_error_theta`` propagates the sigma_x standard error through the
    sensitivity formula at the estimated phase (infinite where the formula
    is singular); ``analytic_sensitivity`` is the ideal binomial-noise
    sensitivity at the same operating point. ``clamped`` records that
    ``sigma_x_hat / V`` fell outside [-1, 1] and was clipped.
    """

    kappa_hat: float
    theta_hat: float
    sigma_x_hat: float
    analytic_sensitivity: float
    std_error_theta: float
    clamped: bool
    n_detected: int


@dataclass(frozen=True)
class PhotonBudget:
    """Source rate (counts/s) and counting duration (s)."""

    rate: float
    duration: float

    def __post_init__(self) -> None:
        for name in ("rate", "duration"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise ValidationError(f"{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def expected_photons(self) -> float:
        """Mean number of photons in one counting window."""
        return self.rate * self.duration


def calibrate_r(p_hat: float, n_trials: int | None = None) -> CalibrationResult:
    """Solve the calibration identity for a measured signal-off probability.

    Parameters
    ----------
    p_hat : float
        Measured post-selection probability, strictly inside (0, 1).
    n_trials : int, optional
        Number of photons behind ``p_hat``; when given, ``std_error_p`` is
        the binomial standard error ``sqrt(p (1-p) / n)``, otherwise NaN.

    Raises
    ------
    CalibrationBoundaryError
        At ``p_hat`` of exactly 0 or 1 (no selection, or none surviving).
    """
    p_hat = float(p_hat)
    if not math.isfinite(p_hat) or not 0.0 < p_hat < 1.0:
        raise CalibrationBoundaryError(
            f"post-selection probability must lie strictly inside (0, 1), got {p_hat!r}"
        )
    sqrt_p = math.sqrt(p_hat)
    sqrt_q = math.sqrt(1.0 - p_hat)
    r_hat = (sqrt_p - sqrt_q) / (sqrt_p + sqrt_q)
    delta_hat = 0.5 * math.degrees(math.asin(sqrt_p))
    if n_trials is None:
        std_error_p = math.nan
    else:
        if int(n_trials) != n_trials or n_trials <= 0:
            raise ValidationError(f"n_trials must be a positive integer, got {n_trials!r}")
        std_error_p = math.sqrt(p_hat * (1.0 - p_hat) / n_trials)
    return CalibrationResult(
        p_hat=p_hat,
        r_hat=r_hat,
        delta_hat=delta_hat,
        h_hat=magnification(r_hat),
        std_error_p=std_error_p,
    )


def calibration_from_r(r: float, n_trials: int | None = None) -> CalibrationResult:
    """Calibration record whose probability reproduces a target ratio ``r``.

    Inverts the calibration identity: ``p = (1 + r)^2 / (2 (1 + r^2))``
    (e.g. r = -0.9 corresponds to p = 1/362). Requires ``-1 < r < 1``.
    """
    r = float(r)
    if not math.isfinite(r) or not -1.0 < r < 1.0:
        raise ValidationError(f"calibration requires -1 < r < 1, got {r!r}")
    p = (1.0 + r) ** 2 / (2.0 * (1.0 + r * r))
    return calibrate_r(p, n_trials)


def kappa_from_counts(c: CountData, visibility: float) -> tuple[float, float, bool]:
    """Amplified-phase estimate from detector counts.

    Returns ``(kappa_hat, kappa_std_error, clamped)`` where
    ``kappa_hat = arccos(clamp(sigma_x_hat / V, -1, 1))`` and the standard
    error propagates the binomial sigma_x error through the arccos
    (infinite when the clamp put kappa_hat at an endpoint).
    """
    visibility = float(visibility)
    if not 0.0 < visibility <= 1.0:
        raise ValidationError(
            f"phase extraction requires visibility in (0, 1], got {visibility!r}"
        )
    estimate, std_error = sigma_x_from_counts(c)
    ratio = estimate / visibility
    clamped = abs(ratio) > 1.0
    ratio = min(1.0, max(-1.0, ratio))
    kappa_hat = math.acos(ratio)
    sin_kappa = math.sqrt(max(0.0, 1.0 - ratio * ratio))
    if sin_kappa > 0.0:
        kappa_std_error = (std_error / visibility) / sin_kappa
    else:
        kappa_std_error = math.inf
    return kappa_hat, kappa_std_error, clamped


def estimate_phase(c: CountData, cal: CalibrationResult, noise: NoiseModel) -> PhaseEstimate:
    """Estimate the signal phase from one counting run.

    Extracts kappa-hat from the detector asymmetry (clamping flagged, not
    fatal), inverts the amplification with the calibrated ratio, and
    propagates the counting error through the sensitivity formula at the
    estimated phase.

    Raises
    ------
    InsufficientDataError
        If the run has no detected photons.
    """
    if not abs(cal.r_hat) < 1.0:
        raise ValidationError(f"inversion requires |r_hat| < 1, got {cal.r_hat!r}")
    kappa_hat, _, clamped = kappa_from_counts(c, noise.visibility)
    theta_hat = invert_amplification(kappa_hat, cal.r_hat)
    estimate, std_error = sigma_x_from_counts(c)
    sin_h_theta = abs(math.sin(cal.h_hat * theta_hat))
    if sin_h_theta > 0.0:
        std_error_theta = std_error / (cal.h_hat * sin_h_theta)
    else:
        std_error_theta = math.inf
    try:
        ideal = analytic_sensitivity(theta_hat, cal.h_hat, c.n_detected)
    except UndefinedSensitivityError:
        ideal = math.inf
    return PhaseEstimate(
        kappa_hat=kappa_hat,
        theta_hat=theta_hat,
        sigma_x_hat=estimate,
        analytic_sensitivity=ideal,
        std_error_theta=std_error_theta,
        clamped=clamped,
        n_detected=c.n_detected,
    )


def analytic_sensitivity(theta: float, h: float, n_detected: int) -> float:
    """Ideal shot-noise phase sensitivity at an operating point.

    Evaluates ``Delta<sigma_x> / (h |sin(h theta)|)`` with the binomial
    noise ``Delta<sigma_x> = |sin(h theta)| / sqrt(N)``; the sines cancel,
    leaving ``1 / (h sqrt(N))``.

    Raises
    ------
    UndefinedSensitivityError
        Where ``sin(h theta)`` is exactly zero (e.g. theta = 0): the
        formula is singular at fringe extrema.
    """
    theta = float(theta)
    h = float(h)
    if not math.isfinite(theta) or not math.isfinite(h) or h == 0.0:
        raise ValidationError(f"invalid operating point: theta = {theta!r}, h = {h!r}")
    if int(n_detected) != n_detected or n_detected <= 0:
        raise ValidationError(
            f"n_detected must be a positive integer, got {n_detected!r}"
        )
    sin_h_theta = abs(math.sin(h * theta))
    if sin_h_theta == 0.0:
        raise UndefinedSensitivityError(
            f"sensitivity undefined where sin(h theta) = 0 (theta = {theta!r}, h = {h!r})"
        )
    delta_sigma_x = sin_h_theta / math.sqrt(n_detected)
    return delta_sigma_x / (abs(h) * sin_h_theta)


def conventional_baseline(
    theta: float, n_detected: int, visibility: float, seed: int
) -> PhaseEstimate:
    """Simulate and estimate one run of the unamplified interferometer.

    No amplification and no post-selection loss: all ``n_detected`` photons
    read the bare phase, clicking "+" with probability
    ``(1 + V cos theta)/2``; the estimate is
    ``theta_hat = arccos(clamp(sigma_x_hat / V))`` (so kappa_hat coincides
    with theta_hat). The precision floor of this readout is
    ``visibility_floor(V)``.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValidationError(f"theta must be finite, got {theta!r}")
    if int(n_detected) != n_detected or n_detected <= 0:
        raise ValidationError(f"n_detected must be a positive integer, got {n_detected!r}")
    visibility = float(visibility)
    if not 0.0 < visibility <= 1.0:
        raise ValidationError(
            f"baseline estimation requires visibility in (0, 1], got {visibility!r}"
        )
    if int(seed) != seed or int(seed) < 0:
        raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
    rng = np.random.default_rng(int(seed))
    n = int(n_detected)
    p_plus = 0.5 * (1.0 + visibility * math.cos(theta))
    n_plus = int(rng.binomial(n, p_plus))
    n_minus = n - n_plus
    estimate = (n_plus - n_minus) / n
    std_error = math.sqrt(max(0.0, 1.0 - estimate * estimate) / n)
    ratio = estimate / visibility
    clamped = abs(ratio) > 1.0
    ratio = min(1.0, max(-1.0, ratio))
    theta_hat = math.acos(ratio)
    sin_theta = abs(math.sin(theta_hat))
    std_error_theta = std_error / sin_theta if sin_theta > 0.0 else math.inf
    try:
        ideal = analytic_sensitivity(theta_hat, 1.0, n)
    except UndefinedSensitivityError:
        ideal = math.inf
    return PhaseEstimate(
        kappa_hat=theta_hat,
        theta_hat=theta_hat,
        sigma_x_hat=estimate,
        analytic_sensitivity=ideal,
        std_error_theta=std_error_theta,
        clamped=clamped,
        n_detected=n,
    )


def visibility_floor(visibility: float, h: float = 1.0) -> float:
    """Smallest phase distinguishable from zero at fringe contrast ``visibility``.

    With perfect contrast the zero-phase fringe reads exactly 1; contrast V
    caps the reading at V, indistinguishable from a true phase arccos(V).
    Amplified readout divides the floor by the magnification ``h``.
    """
    visibility = float(visibility)
    if not 0.0 < visibility <= 1.0:
        raise ValidationError(f"visibility must lie in (0, 1], got {visibility!r}")
    h = float(h)
    if not math.isfinite(h) or h <= 0.0:
        raise ValidationError(f"magnification must be positive, got {h!r}")
    return math.acos(visibility) / h


@dataclass(frozen=True)
class ComparisonRow:
    """One seed's results for both arms of the comparison."""

    seed: int
    amplified: PhaseEstimate
    conventional: PhaseEstimate
    n_input: int
    n_conventional: int


@dataclass(frozen=True)
class ComparisonReport:
    """Two-arm comparison over a seed list at a fixed photon budget.

    Aggregates are sample statistics over the per-seed estimates; the
    ``summary`` method flattens everything into plain types for
    serialization.
    """

    mode: str
    theta_true: float
    calibration: CalibrationResult
    budget: PhotonBudget
    noise: NoiseModel
    rows: tuple[ComparisonRow, ...]

    def _arm(self, name: str) -> list[PhaseEstimate]:
        return [getattr(row, name) for row in self.rows]

    def _stats(self, name: str) -> dict[str, float]:
        estimates = self._arm(name)
        theta_hats = np.array([e.theta_hat for e in estimates])
        return {
            "mean_theta_hat": float(np.mean(theta_hats)),
            "bias": float(np.mean(theta_hats) - self.theta_true),
            "empirical_std": float(np.std(theta_hats, ddof=1)) if len(theta_hats) > 1 else math.nan,
            "mean_analytic_sensitivity": float(
                np.mean([e.analytic_sensitivity for e in estimates])
            ),
            "mean_n_detected": float(np.mean([e.n_detected for e in estimates])),
            "clamped_fraction": float(np.mean([e.clamped for e in estimates])),
        }

    @property
    def amplified_stats(self) -> dict[str, float]:
        """Sample statistics for the amplified arm."""
        return self._stats("amplified")

    @property
    def conventional_stats(self) -> dict[str, float]:
        """Sample statistics for the conventional arm."""
        return self._stats("conventional")

    @property
    def std_ratio(self) -> float:
        """Conventional empirical std over amplified empirical std."""
        amplified = self.amplified_stats["empirical_std"]
        conventional = self.conventional_stats["empirical_std"]
        return conventional / amplified if amplified > 0.0 else math.inf

    def summary(self) -> dict:
        """Plain-type summary (means, stds, floors, improvement ratio)."""
        return {
            "mode": self.mode,
            "theta_true": self.theta_true,
            "n_seeds": len(self.rows),
            "h_hat": self.calibration.h_hat,
            "r_hat": self.calibration.r_hat,
            "amplified": self.amplified_stats,
            "conventional": self.conventional_stats,
            "empirical_std_ratio": self.std_ratio,
            "visibility_floor_conventional": visibility_floor(self.noise.visibility)
            if self.noise.visibility < 1.0
            else 0.0,
            "visibility_floor_amplified": visibility_floor(
                self.noise.visibility, self.calibration.h_hat
            )
            if self.noise.visibility < 1.0
            else 0.0,
        }


def compare_protocols(
    theta: float,
    cal: CalibrationResult,
    budget: PhotonBudget,
    noise: NoiseModel,
    seeds: list[int],
    mode: str = "equal-detected",
) -> ComparisonReport:
    """Run the amplified and conventional arms over a seed list.

    The amplified arm pays the post-selection loss out of the shared
    photon budget. The conventional arm's photon number is matched per
    seed: in ``equal-detected`` mode it gets the amplified arm's detected
    count (the per-detected-photon comparison); in ``equal-input`` mode it
    gets the full input photon number (the loss-adjusted comparison). Its
    draws use a derived companion seed, independent of the amplified arm.
    """
    if mode not in COMPARISON_MODES:
        raise ValidationError(
            f"mode must be one of {COMPARISON_MODES}, got {mode!r}"
        )
    seeds = list(seeds)
    if not seeds:
        raise ValidationError("at least one seed is required")
    cfg = ProtocolConfig.from_postselection_angle(cal.delta_hat, float(theta))
    rows = []
    for seed in seeds:
        counts = simulate_counts(cfg, noise, budget.rate, budget.duration, seed)
        amplified = estimate_phase(counts, cal, noise)
        n_conventional = (
            counts.n_detected if mode == "equal-detected" else counts.n_input
        )
        conventional = conventional_baseline(
            float(theta),
            n_conventional,
            noise.visibility,
            derive_seed(seed, _BASELINE_STREAM),
        )
        rows.append(
            ComparisonRow(
                seed=int(seed),
                amplified=amplified,
                conventional=conventional,
                n_input=counts.n_input,
                n_conventional=n_conventional,
            )
        )
    return ComparisonReport(
        mode=mode,
        theta_true=float(theta),
        calibration=cal,
        budget=budget,
        noise=noise,
        rows=tuple(rows),
    )
