"""Pure-state linear algebra for one qubit and one qubit pair.

Amplitudes are plain complex numbers (validated finite). Two-level states
live on whichever basis the caller has in mind ({|0>, |1>} for a path
qubit, {|up>, |down>} or {|H>, |V>} for a polarization pointer); the math
is basis-agnostic. Composite states use one fixed basis order,

    (|0, up>, |0, down>, |1, up>, |1, down>),

declared once as :data:`JOINT_BASIS_LABELS` and used everywhere: the
system index is the slow axis and the pointer index is the fast axis, so
``amps.reshape(2, 2)[i, j]`` is the amplitude of system ``i`` with pointer
``j``.

Normalization and unitarity are validated to :data:`NORM_TOL` at
construction. Global phase is never stripped automatically; compare
states with :func:`fidelity`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from wmpa.errors import DegenerateStateError, ValidationError

__all__ = [
    "NORM_TOL",
    "JOINT_BASIS_LABELS",
    "PureState2",
    "UnnormalizedState2",
    "JointState",
    "Unitary4",
    "tensor",
    "apply_unitary",
    "project_system",
    "sigma_x_expectation",
    "fidelity",
]

NORM_TOL = 1.0e-12
"""Tolerance for all normalization and unitarity checks."""

JOINT_BASIS_LABELS = ("|0,up>", "|0,down>", "|1,up>", "|1,down>")
"""Fixed ordering of the system (x) pointer product basis."""


def _as_finite_complex(name: str, value: complex) -> complex:
    z = complex(value)
    if not (cmath.isfinite(z)):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return z


@dataclass(frozen=True)
class PureState2:
    """Normalized two-level pure state ``a0|first> + a1|second>``.

    Parameters
    ----------
    a0, a1 : complex
        Amplitudes on the two basis states; |a0|^2 + |a1|^2 must be 1
        within :data:`NORM_TOL`.
    """

    a0: complex
    a1: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "a0", _as_finite_complex("a0", self.a0))
        object.__setattr__(self, "a1", _as_finite_complex("a1", self.a1))
        norm_sq = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(
                f"state must be normalized: |a0|^2 + |a1|^2 = {norm_sq!r}"
            )

    @property
    def amplitudes(self) -> np.ndarray:
        """Amplitudes as a length-2 complex array."""
        return np.array([self.a0, self.a1], dtype=complex)

    def orthogonal(self) -> "PureState2":
        """The state orthogonal to this one (phase convention fixed)."""
        return PureState2(-self.a1.conjugate(), self.a0.conjugate())


@dataclass(frozen=True)
class UnnormalizedState2:
    """Two-level state left behind by conditioning; total weight at most 1.

    ``norm_sq`` may be passed explicitly (it is validated against the
    amplitudes) or omitted, in which case it is computed.
    """

    a0: complex
    a1: complex
    norm_sq: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "a0", _as_finite_complex("a0", self.a0))
        object.__setattr__(self, "a1", _as_finite_complex("a1", self.a1))
        computed = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if self.norm_sq is None:
            object.__setattr__(self, "norm_sq", computed)
        elif abs(float(self.norm_sq) - computed) > NORM_TOL:
            raise ValidationError(
                f"norm_sq = {self.norm_sq!r} does not match amplitudes "
                f"(|a0|^2 + |a1|^2 = {computed!r})"
            )
        else:
            object.__setattr__(self, "norm_sq", float(self.norm_sq))
        if self.norm_sq > 1.0 + NORM_TOL:
            raise ValidationError(
                f"conditioned state cannot exceed unit weight: norm_sq = {self.norm_sq!r}"
            )

    @property
    def amplitudes(self) -> np.ndarray:
        """Amplitudes as a length-2 complex array."""
        return np.array([self.a0, self.a1], dtype=complex)

    def normalized(self) -> PureState2:
        """Rescale to unit norm.

        Raises
        ------
        DegenerateStateError
            If the state weight is at or below :data:`NORM_TOL`.
        """
        if self.norm_sq <= NORM_TOL:
            raise DegenerateStateError(
                f"cannot normalize a state of weight {self.norm_sq!r}"
            )
        scale = 1.0 / np.sqrt(self.norm_sq)
        return PureState2(self.a0 * scale, self.a1 * scale)


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class JointState:
    """Normalized state of system (x) pointer in the fixed basis order."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.amps, dtype=complex)
        if arr.shape != (4,):
            raise ValidationError(f"joint state needs 4 amplitudes, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("joint state amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(arr) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"joint state must be normalized: norm^2 = {norm_sq!r}")
        object.__setattr__(self, "amps", _read_only(arr))


@dataclass(frozen=True)
class Unitary4:
    """4x4 unitary matrix (U^dagger U = I entry-wise within tolerance)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (4, 4):
            raise ValidationError(f"expected a 4x4 matrix, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValidationError("matrix entries must be finite")
        deviation = float(np.max(np.abs(mat.conj().T @ mat - np.eye(4))))
        if deviation > NORM_TOL:
            raise ValidationError(
                f"matrix is not unitary: max |U^H U - I| = {deviation!r}"
            )
        object.__setattr__(self, "matrix", _read_only(mat))


def tensor(system: PureState2, pointer: PureState2) -> JointState:
    """Product state of a system qubit and a pointer qubit.

    The result follows the fixed basis order (system slow, pointer fast).
    """
    return JointState(np.kron(system.amplitudes, pointer.amplitudes))


def apply_unitary(u: Unitary4, s: JointState) -> JointState:
    """Evolve ``s`` by ``u``; the output is validated to stay normalized."""
    return JointState(u.matrix @ s.amps)


def project_system(s: JointState, target: PureState2) -> tuple[float, UnnormalizedState2]:
    """Condition on finding the system factor in ``target``.

    Returns
    -------
    prob : float
        Success probability of the projection.
    pointer : UnnormalizedState2
        The unconditioned pointer amplitudes left behind,
        ``<target, j | s>`` for pointer basis index ``j``; its ``norm_sq``
        equals ``prob``.
    """
    table = s.amps.reshape(2, 2)
    left = target.amplitudes.conj() @ table
    pointer = UnnormalizedState2(left[0], left[1])
    return pointer.norm_sq, pointer


def sigma_x_expectation(p: UnnormalizedState2) -> float:
    """Pauli-X expectation of a (possibly conditioned) two-level state.

    Returns ``2 Re(a0* a1) / norm_sq``, clipped into [-1, 1] against
    floating-point overshoot.

    Raises
    ------
    DegenerateStateError
        If the state weight is at or below :data:`NORM_TOL`.
    """
    if p.norm_sq <= NORM_TOL:
        raise DegenerateStateError(
            f"sigma_x expectation undefined for a state of weight {p.norm_sq!r}"
        )
    value = 2.0 * (p.a0.conjugate() * p.a1).real / p.norm_sq
    return min(1.0, max(-1.0, value))


def fidelity(a: PureState2 | UnnormalizedState2, b: PureState2 | UnnormalizedState2) -> float:
    """Squared overlap |<a|b>|^2 between two two-level states.

    Unnormalized inputs are normalized first, so the result is insensitive
    to both global phase and overall weight.

    Raises
    ------
    DegenerateStateError
        If either state has weight at or below :data:`NORM_TOL`.
    """

    def unit_amps(state: PureState2 | UnnormalizedState2) -> np.ndarray:
        if isinstance(state, UnnormalizedState2):
            state = state.normalized()
        return state.amplitudes

    overlap = np.vdot(unit_amps(a), unit_amps(b))
    return min(1.0, float(abs(overlap) ** 2))
