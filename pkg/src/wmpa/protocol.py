"""The weak-measurement phase-amplification protocol (abstract form).

A system qubit prepared in ``alpha|0> + beta|1>`` interacts with a pointer
qubit ``mu|up> + nu|down>`` through a controlled phase: the signal phase
``theta`` is written on the pointer's |down> component only along the
system's |1> branch. Post-selecting the system on ``gamma|0> + eta|1>``
leaves the (unnormalized) pointer

    mu (alpha gamma + beta eta) |up> + nu (alpha gamma + beta eta e^{i theta}) |down>,

whose relative phase between |down> and |up> is the amplified phase

    kappa = atan2(sin theta, cos theta + r),    r = (alpha gamma) / (beta eta).

Near-orthogonal selections (r slightly above -1) magnify a small theta by
h = dkappa/dtheta|_0 = 1/(1 + r), at the cost of a small post-selection
success probability. The exact closed-form inverse
``theta = kappa + arcsin(r sin kappa)`` (from ``sin(theta - kappa) =
r sin kappa``) is branch-safe whenever ``1 + r cos theta > 0``, i.e. for
every ``|r| < 1``; that inverse is what the estimator uses.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from wmpa.errors import (
    DivergentMagnificationError,
    GlobalPhaseDegenerateError,
    NoSolutionError,
    UndefinedPhaseError,
    ValidationError,
)
from wmpa.qstate import (
    NORM_TOL,
    PureState2,
    UnnormalizedState2,
    Unitary4,
    apply_unitary,
    project_system,
    tensor,
)

import numpy as np

__all__ = [
    "DEGENERACY_TOL",
    "PHASE_TOL",
    "ProtocolConfig",
    "ProtocolOutcome",
    "AmplificationParams",
    "controlled_phase_unitary",
    "run_protocol",
    "amplified_phase_exact",
    "magnification",
    "invert_amplification",
    "amplified_pointer_first_order",
]

DEGENERACY_TOL = 1.0e-9
"""Below this |alpha gamma + beta eta| the signal is an unusable global phase."""

PHASE_TOL = 1.0e-12
"""Both atan2 arguments below this magnitude means the phase is undefined."""


def _as_finite_real(name: str, value: float) -> float:
    x = float(value)
    if not math.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return x


@dataclass(frozen=True)
class ProtocolConfig:
    """Real protocol coefficients and the signal phase.

    Parameters
    ----------
    alpha, beta : float
        Pre-selected system state ``alpha|0> + beta|1>``.
    mu, nu : float
        Pointer preparation ``mu|up> + nu|down>``.
    gamma, eta : float
        Post-selected system state ``gamma|0> + eta|1>``.
    theta : float
        Signal phase in radians.

    Each coefficient pair must be normalized within tolerance; all
    coefficients are real (taking them real loses no generality for this
    protocol).
    """

    alpha: float
    beta: float
    mu: float
    nu: float
    gamma: float
    eta: float
    theta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "mu", "nu", "gamma", "eta", "theta"):
            object.__setattr__(self, name, _as_finite_real(name, getattr(self, name)))
        for label, x, y in (
            ("alpha, beta", self.alpha, self.beta),
            ("mu, nu", self.mu, self.nu),
            ("gamma, eta", self.gamma, self.eta),
        ):
            norm_sq = x * x + y * y
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise ValidationError(
                    f"({label}) must be normalized: sum of squares = {norm_sq!r}"
                )

    @classmethod
    def from_postselection_angle(cls, delta_deg: float, theta: float) -> "ProtocolConfig":
        """Balanced configuration parametrized by the post-selection offset.

        Uses the symmetric choice ``alpha = beta = mu = nu = 1/sqrt(2)`` with
        ``gamma = sin(45deg - 2 delta)`` and ``eta = -cos(45deg - 2 delta)``:
        at ``delta_deg = 0`` the selection is orthogonal to the preparation
        (degenerate); small positive offsets give large magnification
        ``h = 1/(1 - tan(45deg - 2 delta))``.
        """
        inv_sqrt2 = math.sqrt(0.5)
        angle = math.radians(45.0 - 2.0 * _as_finite_real("delta_deg", delta_deg))
        return cls(
            alpha=inv_sqrt2,
            beta=inv_sqrt2,
            mu=inv_sqrt2,
            nu=inv_sqrt2,
            gamma=math.sin(angle),
            eta=-math.cos(angle),
            theta=theta,
        )

    @property
    def preselection(self) -> PureState2:
        """System preparation ``alpha|0> + beta|1>``."""
        return PureState2(self.alpha, self.beta)

    @property
    def pointer_preparation(self) -> PureState2:
        """Pointer preparation ``mu|up> + nu|down>``."""
        return PureState2(self.mu, self.nu)

    @property
    def postselection(self) -> PureState2:
        """System post-selection ``gamma|0> + eta|1>``."""
        return PureState2(self.gamma, self.eta)

    @property
    def selection_overlap(self) -> float:
        """Overlap ``alpha gamma + beta eta`` between pre- and post-selection."""
        return self.alpha * self.gamma + self.beta * self.eta

    def amplification(self) -> "AmplificationParams":
        """Amplification geometry (r, h) implied by the coefficients.

        Raises
        ------
        ValidationError
            If ``beta * eta`` is zero, leaving r undefined.
        DivergentMagnificationError
            If r comes out exactly -1.
        """
        denom = self.beta * self.eta
        if denom == 0.0:
            raise ValidationError(
                "beta * eta = 0: the amplification ratio r is undefined"
            )
        return AmplificationParams.from_r((self.alpha * self.gamma) / denom)


@dataclass(frozen=True)
class AmplificationParams:
    """Amplification geometry: selection ratio ``r`` and magnification ``h``.

    ``h`` must equal ``1/(1 + r)`` within tolerance (scaled by |h| so large
    magnifications validate sensibly).
    """

    r: float
    h: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", _as_finite_real("r", self.r))
        object.__setattr__(self, "h", _as_finite_real("h", self.h))
        expected = magnification(self.r)
        if abs(self.h - expected) > 1.0e-12 * max(1.0, abs(expected)):
            raise ValidationError(
                f"h = {self.h!r} is inconsistent with 1/(1+r) = {expected!r}"
            )

    @classmethod
    def from_r(cls, r: float) -> "AmplificationParams":
        """Build from ``r`` alone, computing ``h = 1/(1 + r)``."""
        return cls(r=r, h=magnification(r))


@dataclass(frozen=True)
class ProtocolOutcome:
    """Result of one prepare-interact-post-select pass.

    ``success_prob`` always equals ``pointer.norm_sq`` (validated);
    ``kappa_exact`` is the exact amplified phase and ``kappa_first_order``
    its linearization ``h * theta``.
    """

    success_prob: float
    pointer: UnnormalizedState2
    kappa_exact: float
    kappa_first_order: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.success_prob <= 1.0 + NORM_TOL:
            raise ValidationError(
                f"success_prob must lie in [0, 1], got {self.success_prob!r}"
            )
        if abs(self.success_prob - self.pointer.norm_sq) > NORM_TOL:
            raise ValidationError(
                "success_prob does not match the pointer weight: "
                f"{self.success_prob!r} vs {self.pointer.norm_sq!r}"
            )


def controlled_phase_unitary(theta: float) -> Unitary4:
    """Controlled-phase interaction ``diag(1, 1, 1, e^{i theta})``.

    Writes ``theta`` on the pointer's |down> amplitude only along the
    system's |1> branch, in the fixed joint basis order.
    """
    theta = _as_finite_real("theta", theta)
    return Unitary4(np.diag([1.0, 1.0, 1.0, cmath.exp(1j * theta)]))


def amplified_phase_exact(theta: float, r: float) -> float:
    """Exact amplified phase ``kappa = atan2(sin theta, cos theta + r)``.

    The two-argument arctangent keeps the branch continuous through
    ``cos theta + r < 0`` (large magnification at large theta), with the
    result in (-pi, pi].

    Raises
    ------
    UndefinedPhaseError
        If both ``sin theta`` and ``cos theta + r`` vanish within
        :data:`PHASE_TOL` (the direction vector has no length).
    """
    theta = _as_finite_real("theta", theta)
    r = _as_finite_real("r", r)
    y = math.sin(theta)
    x = math.cos(theta) + r
    if abs(y) < PHASE_TOL and abs(x) < PHASE_TOL:
        raise UndefinedPhaseError(
            f"amplified phase undefined at theta = {theta!r}, r = {r!r}"
        )
    return math.atan2(y, x)


def magnification(r: float) -> float:
    """Linear-regime magnification ``h = 1/(1 + r)`` (= dkappa/dtheta at 0).

    Raises
    ------
    DivergentMagnificationError
        At ``r = -1``, where the magnification diverges.
    """
    r = _as_finite_real("r", r)
    denom = 1.0 + r
    if denom == 0.0:
        raise DivergentMagnificationError("magnification diverges at r = -1")
    return 1.0 / denom


def invert_amplification(kappa: float, r: float) -> float:
    """Recover the signal phase from a measured amplified phase.

    Uses the closed form ``theta = kappa + arcsin(r sin kappa)``; the
    principal arcsin branch is the correct one whenever ``|r| < 1``
    (then ``cos(theta - kappa) > 0`` identically), so round trips with
    :func:`amplified_phase_exact` are exact to floating-point precision.

    Raises
    ------
    NoSolutionError
        If ``|r sin kappa| > 1``: the measured kappa is inconsistent with
        the calibrated r.
    """
    kappa = _as_finite_real("kappa", kappa)
    r = _as_finite_real("r", r)
    x = r * math.sin(kappa)
    if abs(x) > 1.0:
        raise NoSolutionError(
            f"|r sin(kappa)| = {abs(x)!r} > 1: kappa = {kappa!r} has no "
            f"consistent signal phase at r = {r!r}"
        )
    return kappa + math.asin(x)


def run_protocol(cfg: ProtocolConfig) -> ProtocolOutcome:
    """Run prepare -> controlled phase -> post-select for one configuration.

    The pointer is produced by the state-vector pipeline (tensor product,
    unitary, projection), so its amplitudes are exactly
    ``mu (alpha gamma + beta eta)`` on |up> and
    ``nu (alpha gamma + beta eta e^{i theta})`` on |down>.

    Raises
    ------
    GlobalPhaseDegenerateError
        If ``|alpha gamma + beta eta|`` is below :data:`DEGENERACY_TOL`:
        the surviving pointer carries theta only as a global phase and the
        amplification framework is meaningless.
    """
    if abs(cfg.selection_overlap) < DEGENERACY_TOL:
        raise GlobalPhaseDegenerateError(
            f"selection overlap {cfg.selection_overlap!r} is numerically zero: "
            "the signal phase reduces to a global phase"
        )
    joint = tensor(cfg.preselection, cfg.pointer_preparation)
    evolved = apply_unitary(controlled_phase_unitary(cfg.theta), joint)
    prob, pointer = project_system(evolved, cfg.postselection)
    params = cfg.amplification()
    kappa = amplified_phase_exact(cfg.theta, params.r)
    return ProtocolOutcome(
        success_prob=prob,
        pointer=pointer,
        kappa_exact=kappa,
        kappa_first_order=params.h * cfg.theta,
    )


def amplified_pointer_first_order(cfg: ProtocolConfig) -> PureState2:
    """Normalized first-order pointer state ``mu|up> + nu e^{i kappa}|down>``.

    Valid in the linear regime; its fidelity with the exact post-selected
    pointer is 1 - O(theta^2). Raises the same degeneracy error as
    :func:`run_protocol`.
    """
    if abs(cfg.selection_overlap) < DEGENERACY_TOL:
        raise GlobalPhaseDegenerateError(
            f"selection overlap {cfg.selection_overlap!r} is numerically zero: "
            "the signal phase reduces to a global phase"
        )
    kappa = amplified_phase_exact(cfg.theta, cfg.amplification().r)
    return PureState2(cfg.mu, cfg.nu * cmath.exp(1j * kappa))
