"""Jones-calculus model of the amplification bench over (rail, polarization) modes.

The bench realizes the abstract protocol with the path degree of freedom as
the system and polarization as the pointer. States live on a small set of
parallel beam rails (integers in :data:`WORKING_RAILS`), each carrying an H
and a V amplitude. Elements:

* half-wave plate at angle ``phi`` (degrees): Jones matrix
  ``[[cos 2phi, sin 2phi], [sin 2phi, -cos 2phi]]`` (involutory, det -1);
* variable retarder (liquid-crystal cell): ``diag(1, e^{i ret})``;
* beam displacer: V amplitude walks up one rail, H passes straight;
* polarizing splitter: transmits H, reflects V (mode-preserving here, with
  port probabilities available for detector bookkeeping);
* block: absorbs everything on the listed rails (the only non-unitary step).

:func:`build_figure1_train` assembles the standard bench: prepare a
balanced path superposition carrying diagonal polarization, write the
signal phase on one rail's retarder, rotate per-rail post-selection plates,
and recombine on a second displacer so the post-selected photons exit on
the middle rail. The second displacer re-encodes the pointer back into
polarization with the roles swapped: the pointer's reference (up)
component arrives in V and the signal-bearing (down) component in H.
:func:`check_protocol_equivalence` applies that mapping and certifies the
train against :func:`wmpa.protocol.run_protocol`.

Trains serialize to/from plain dicts (JSON-friendly) so custom setups can
be loaded from files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

import numpy as np

from wmpa.errors import (
    DegenerateStateError,
    RailRangeError,
    ValidationError,
)
from wmpa.protocol import ProtocolConfig, run_protocol
from wmpa.qstate import NORM_TOL, UnnormalizedState2, fidelity

__all__ = [
    "POL_H",
    "POL_V",
    "WORKING_RAILS",
    "OUTPUT_RAIL",
    "Mode",
    "ModeState",
    "HalfWavePlate",
    "VariableRetarder",
    "BeamDisplacer",
    "PolarizingSplitter",
    "Block",
    "OpticalElement",
    "OpticalTrain",
    "hwp_jones",
    "lcvr_jones",
    "apply_bd",
    "build_figure1_train",
    "simulate_train",
    "postselect_middle_rail",
    "polarization_major",
    "train_pointer",
    "EquivalenceReport",
    "check_protocol_equivalence",
]

POL_H = "H"
POL_V = "V"
_POLS = (POL_H, POL_V)

WORKING_RAILS = range(-2, 3)
"""Allowed rail indices; the bench needs three, the margin catches bugs."""

OUTPUT_RAIL = 1
"""The middle rail after two displacements of a rail-0 input."""

Mode = tuple[int, str]
"""A (rail, polarization) mode label, e.g. ``(0, "H")``."""


def _check_mode(mode: Mode) -> Mode:
    rail, pol = mode
    if rail not in WORKING_RAILS:
        raise ValidationError(
            f"rail {rail!r} outside working range "
            f"{WORKING_RAILS.start}..{WORKING_RAILS.stop - 1}"
        )
    if pol not in _POLS:
        raise ValidationError(f"polarization must be 'H' or 'V', got {pol!r}")
    return (int(rail), pol)


class ModeState:
    """Sparse complex amplitudes over (rail, polarization) modes.

    Modes absent from the map carry zero amplitude. Keys are stored in
    sorted order so norm sums are reproducible regardless of construction
    order. Instances are immutable values; elements return new states.
    """

    __slots__ = ("_amps",)

    def __init__(self, amplitudes: Mapping[Mode, complex]):
        amps: dict[Mode, complex] = {}
        for mode in sorted(amplitudes):
            value = complex(amplitudes[mode])
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValidationError(f"amplitude at {mode!r} must be finite")
            amps[_check_mode(mode)] = value
        self._amps = amps

    @classmethod
    def single(cls, rail: int, pol: str) -> "ModeState":
        """Unit amplitude in one mode."""
        return cls({(rail, pol): 1.0})

    def amplitude(self, rail: int, pol: str) -> complex:
        """Amplitude of one mode (zero if absent)."""
        return self._amps.get((rail, pol), 0.0 + 0.0j)

    def items(self) -> Iterator[tuple[Mode, complex]]:
        """Iterate (mode, amplitude) pairs in sorted mode order."""
        return iter(self._amps.items())

    @property
    def modes(self) -> tuple[Mode, ...]:
        """Modes with stored amplitude, sorted."""
        return tuple(self._amps)

    @property
    def norm_sq(self) -> float:
        """Total weight, sum of |amplitude|^2."""
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def __repr__(self) -> str:
        body = ", ".join(f"{m}: {a}" for m, a in self._amps.items())
        return f"ModeState({{{body}}})"


def hwp_jones(angle_deg: float) -> np.ndarray:
    """Jones matrix of an ideal half-wave plate at ``angle_deg``.

    Convention ``[[cos 2phi, sin 2phi], [sin 2phi, -cos 2phi]]``: at 22.5
    degrees |H> maps to the diagonal state (|H> + |V>)/sqrt(2); at 45
    degrees H and V swap. The matrix is its own inverse.
    """
    two_phi = math.radians(2.0 * float(angle_deg))
    c, s = math.cos(two_phi), math.sin(two_phi)
    return np.array([[c, s], [s, -c]], dtype=complex)


def lcvr_jones(retardance_rad: float) -> np.ndarray:
    """Jones matrix ``diag(1, e^{i ret})`` of a variable retarder."""
    return np.array(
        [[1.0, 0.0], [0.0, complex(math.cos(retardance_rad), math.sin(retardance_rad))]],
        dtype=complex,
    )


def _rail_set(rails: Iterable[int] | None, element: str) -> frozenset[int] | None:
    if rails is None:
        return None
    out = frozenset(int(r) for r in rails)
    for rail in out:
        if rail not in WORKING_RAILS:
            raise ValidationError(
                f"{element} rail {rail} outside working range "
                f"{WORKING_RAILS.start}..{WORKING_RAILS.stop - 1}"
            )
    return out


def _apply_jones(state: ModeState, matrix: np.ndarray, rails: frozenset[int] | None) -> ModeState:
    """Apply a 2x2 polarization map on the selected rails (None = all)."""
    out: dict[Mode, complex] = {}
    touched = {rail for (rail, _pol) in state.modes}
    for rail in touched:
        a_h = state.amplitude(rail, POL_H)
        a_v = state.amplitude(rail, POL_V)
        if rails is None or rail in rails:
            a_h, a_v = (
                matrix[0, 0] * a_h + matrix[0, 1] * a_v,
                matrix[1, 0] * a_h + matrix[1, 1] * a_v,
            )
        out[(rail, POL_H)] = complex(a_h)
        out[(rail, POL_V)] = complex(a_v)
    return ModeState(out)


@dataclass(frozen=True)
class HalfWavePlate:
    """Half-wave plate at ``angle_deg`` acting on ``rails`` (None = all)."""

    angle_deg: float
    rails: frozenset[int] | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(float(self.angle_deg)):
            raise ValidationError(f"plate angle must be finite, got {self.angle_deg!r}")
        object.__setattr__(self, "angle_deg", float(self.angle_deg))
        object.__setattr__(self, "rails", _rail_set(self.rails, "half-wave plate"))

    def apply(self, state: ModeState) -> ModeState:
        return _apply_jones(state, hwp_jones(self.angle_deg), self.rails)


@dataclass(frozen=True)
class VariableRetarder:
    """Variable retarder adding ``retardance_rad`` in [0, 2 pi) between H and V."""

    retardance_rad: float
    rails: frozenset[int] | None = None

    def __post_init__(self) -> None:
        ret = float(self.retardance_rad)
        if not math.isfinite(ret) or not 0.0 <= ret < 2.0 * math.pi:
            raise ValidationError(
                f"retardance must lie in [0, 2 pi), got {self.retardance_rad!r}"
            )
        object.__setattr__(self, "retardance_rad", ret)
        object.__setattr__(self, "rails", _rail_set(self.rails, "variable retarder"))

    def apply(self, state: ModeState) -> ModeState:
        return _apply_jones(state, lcvr_jones(self.retardance_rad), self.rails)


def apply_bd(state: ModeState) -> ModeState:
    """Beam-displacer action: V amplitude moves up one rail, H stays put.

    A permutation on modes (norm preserving).

    Raises
    ------
    RailRangeError
        If some V amplitude would leave the working rail range.
    """
    out: dict[Mode, complex] = {}
    for (rail, pol), amp in state.items():
        target = rail + 1 if pol == POL_V else rail
        if target not in WORKING_RAILS:
            raise RailRangeError(
                f"displacing ({rail}, {pol}) to rail {target} leaves the "
                f"working range {WORKING_RAILS.start}..{WORKING_RAILS.stop - 1}"
            )
        out[(target, pol)] = out.get((target, pol), 0.0 + 0.0j) + amp
    return ModeState(out)


@dataclass(frozen=True)
class BeamDisplacer:
    """Beam displacer: walks V polarization up one rail."""

    def apply(self, state: ModeState) -> ModeState:
        return apply_bd(state)


@dataclass(frozen=True)
class PolarizingSplitter:
    """Polarizing splitter: transmits H, reflects V.

    Mode-preserving in this model (each port keeps its polarization label);
    use :meth:`port_probabilities` for detector bookkeeping.
    """

    def apply(self, state: ModeState) -> ModeState:
        return state

    @staticmethod
    def port_probabilities(state: ModeState) -> tuple[float, float]:
        """(transmitted, reflected) weight: total |H|^2 and total |V|^2."""
        p_h = 0.0
        p_v = 0.0
        for (_rail, pol), amp in state.items():
            if pol == POL_H:
                p_h += abs(amp) ** 2
            else:
                p_v += abs(amp) ** 2
        return p_h, p_v


@dataclass(frozen=True)
class Block:
    """Absorber that removes all amplitude on the listed rails."""

    rails: frozenset[int]

    def __post_init__(self) -> None:
        rails = _rail_set(self.rails, "block")
        if rails is None or not rails:
            raise ValidationError("a block needs a non-empty rail set")
        object.__setattr__(self, "rails", rails)

    def apply(self, state: ModeState) -> ModeState:
        return ModeState(
            {mode: amp for mode, amp in state.items() if mode[0] not in self.rails}
        )


OpticalElement = Union[HalfWavePlate, VariableRetarder, BeamDisplacer, PolarizingSplitter, Block]

_ELEMENT_TAGS: dict[type, str] = {
    HalfWavePlate: "hwp",
    VariableRetarder: "lcvr",
    BeamDisplacer: "bd",
    PolarizingSplitter: "pbs",
    Block: "block",
}


@dataclass(frozen=True)
class OpticalTrain:
    """Ordered sequence of optical elements applied left to right."""

    elements: tuple[OpticalElement, ...]

    def __post_init__(self) -> None:
        elements = tuple(self.elements)
        for element in elements:
            if type(element) not in _ELEMENT_TAGS:
                raise ValidationError(f"unknown optical element {element!r}")
        object.__setattr__(self, "elements", elements)

    def to_dict(self) -> dict:
        """JSON-friendly description of the train."""
        items = []
        for element in self.elements:
            entry: dict = {"type": _ELEMENT_TAGS[type(element)]}
            if isinstance(element, HalfWavePlate):
                entry["angle_deg"] = element.angle_deg
                entry["rails"] = None if element.rails is None else sorted(element.rails)
            elif isinstance(element, VariableRetarder):
                entry["retardance_rad"] = element.retardance_rad
                entry["rails"] = None if element.rails is None else sorted(element.rails)
            elif isinstance(element, Block):
                entry["rails"] = sorted(element.rails)
            items.append(entry)
        return {
            "working_rails": [WORKING_RAILS.start, WORKING_RAILS.stop - 1],
            "elements": items,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "OpticalTrain":
        """Rebuild a train from :meth:`to_dict` output.

        Raises
        ------
        ValidationError
            On unknown element tags or malformed entries.
        """
        try:
            entries = data["elements"]
        except (KeyError, TypeError):
            raise ValidationError("train description needs an 'elements' list") from None
        elements: list[OpticalElement] = []
        for i, entry in enumerate(entries):
            try:
                tag = entry["type"]
            except (KeyError, TypeError):
                raise ValidationError(f"element {i} has no 'type' tag") from None
            rails = entry.get("rails")
            try:
                if tag == "hwp":
                    elements.append(HalfWavePlate(entry["angle_deg"], rails))
                elif tag == "lcvr":
                    elements.append(VariableRetarder(entry["retardance_rad"], rails))
                elif tag == "bd":
                    elements.append(BeamDisplacer())
                elif tag == "pbs":
                    elements.append(PolarizingSplitter())
                elif tag == "block":
                    elements.append(Block(frozenset(rails or ())))
                else:
                    raise ValidationError(f"element {i}: unknown type {tag!r}")
            except KeyError as exc:
                raise ValidationError(f"element {i} ({tag}): missing field {exc}") from None
        return cls(tuple(elements))


def build_figure1_train(
    delta_deg: float, theta: float, *, include_analyzer: bool = True
) -> OpticalTrain:
    """Assemble the standard amplification bench.

    Order of elements: a 22.5-degree plate puts the input in diagonal
    polarization; the first displacer splits the path; per-rail plates at
    +/-22.5 degrees restore diagonal polarization on both rails; the signal
    retarder (``theta``) sits on rail 1 with a zero-retardance compensator
    on rail 0; post-selection plates at ``67.5 - delta`` (rail 1) and
    ``22.5 - delta`` (rail 0) degrees; the second displacer recombines, and
    a block keeps only the middle output rail. With
    ``include_analyzer=True`` (the full bench) a final 22.5-degree plate
    and the polarizing splitter analyze sigma_x for the two detectors;
    without it the train stops at the middle-rail selection so the
    post-selected pointer itself can be inspected.

    ``theta`` is taken modulo 2 pi (the retarder's action is periodic).

    Raises
    ------
    ValidationError
        If ``delta_deg`` is outside (0, 22.5).
    """
    delta_deg = float(delta_deg)
    if not math.isfinite(delta_deg) or not 0.0 < delta_deg < 22.5:
        raise ValidationError(
            f"post-selection offset must lie in (0, 22.5) degrees, got {delta_deg!r}"
        )
    if not math.isfinite(float(theta)):
        raise ValidationError(f"theta must be finite, got {theta!r}")
    retardance = float(theta) % (2.0 * math.pi)
    blocked = frozenset(WORKING_RAILS) - {OUTPUT_RAIL}
    elements: list[OpticalElement] = [
        HalfWavePlate(22.5),
        BeamDisplacer(),
        HalfWavePlate(22.5, rails=frozenset({0})),
        HalfWavePlate(-22.5, rails=frozenset({1})),
        VariableRetarder(retardance, rails=frozenset({1})),
        VariableRetarder(0.0, rails=frozenset({0})),
        HalfWavePlate(67.5 - delta_deg, rails=frozenset({1})),
        HalfWavePlate(22.5 - delta_deg, rails=frozenset({0})),
        BeamDisplacer(),
        Block(blocked),
    ]
    if include_analyzer:
        elements.append(HalfWavePlate(22.5))
        elements.append(PolarizingSplitter())
    return OpticalTrain(tuple(elements))


def simulate_train(train: OpticalTrain, input_state: ModeState) -> ModeState:
    """Apply every element of ``train`` to ``input_state``, left to right.

    The input must be normalized (unit total weight); the output stays
    normalized until a block removes amplitude.

    Raises
    ------
    ValidationError
        If the input is not normalized.
    RailRangeError
        If a displacer pushes amplitude off the working rails.
    """
    if abs(input_state.norm_sq - 1.0) > NORM_TOL:
        raise ValidationError(
            f"train input must be normalized, total weight = {input_state.norm_sq!r}"
        )
    state = input_state
    for element in train.elements:
        state = element.apply(state)
    return state


def postselect_middle_rail(
    state: ModeState, rail: int = OUTPUT_RAIL
) -> tuple[float, UnnormalizedState2]:
    """Keep only the designated output rail and read off its polarization.

    Returns the kept weight (the post-selection success probability when
    the input was normalized) and the (H, V) amplitudes on that rail as an
    unnormalized two-level state.

    Raises
    ------
    DegenerateStateError
        If the kept weight is numerically zero.
    """
    pol_state = UnnormalizedState2(
        state.amplitude(rail, POL_H), state.amplitude(rail, POL_V)
    )
    if pol_state.norm_sq <= NORM_TOL:
        raise DegenerateStateError(f"no amplitude on output rail {rail}")
    return pol_state.norm_sq, pol_state


def polarization_major(state: ModeState, rails: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Amplitudes regrouped with polarization slow and rail fast.

    Returns the four amplitudes in order (H, rail a), (H, rail b),
    (V, rail a), (V, rail b). After the signal retarder this reading makes
    the exchange of roles explicit: polarization acts as the system and the
    rail as its pointer.
    """
    return np.array(
        [state.amplitude(rail, pol) for pol in _POLS for rail in rails], dtype=complex
    )


def train_pointer(state: ModeState, rail: int = OUTPUT_RAIL) -> tuple[float, UnnormalizedState2]:
    """Post-selected pointer carried by the output rail, in protocol order.

    The second displacer re-encodes the path pointer into polarization with
    the components swapped: the reference (up) amplitude arrives in V and
    the signal-bearing (down) amplitude in H. This helper undoes that
    bookkeeping so the result compares directly against
    :func:`wmpa.protocol.run_protocol`'s (up, down) pointer.
    """
    prob, pol_state = postselect_middle_rail(state, rail)
    return prob, UnnormalizedState2(pol_state.a1, pol_state.a0)


@dataclass(frozen=True)
class EquivalenceReport:
    """Agreement between the bench model and the abstract protocol."""

    delta_deg: float
    theta: float
    fidelity: float
    train_prob: float
    protocol_prob: float

    @property
    def prob_diff(self) -> float:
        """Absolute success-probability disagreement."""
        return abs(self.train_prob - self.protocol_prob)

    @property
    def fidelity_deficit(self) -> float:
        """1 - fidelity between the two pointer states."""
        return 1.0 - self.fidelity


def check_protocol_equivalence(
    delta_deg: float, theta: float, train: OpticalTrain | None = None
) -> EquivalenceReport:
    """Certify the bench against the abstract protocol at one setting.

    Simulates the train (built without the analyzer unless a custom train
    is supplied; a custom train should likewise end at the middle-rail
    selection), extracts the post-selected pointer via
    :func:`train_pointer`, and compares state fidelity and success
    probability against the balanced protocol configuration at the same
    (delta, theta).
    """
    if train is None:
        train = build_figure1_train(delta_deg, theta, include_analyzer=False)
    final = simulate_train(train, ModeState.single(0, POL_H))
    train_prob, pointer = train_pointer(final)
    outcome = run_protocol(ProtocolConfig.from_postselection_angle(delta_deg, theta))
    return EquivalenceReport(
        delta_deg=float(delta_deg),
        theta=float(theta),
        fidelity=fidelity(pointer, outcome.pointer),
        train_prob=train_prob,
        protocol_prob=outcome.success_prob,
    )
