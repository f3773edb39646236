"""Tests for the polarization bench model."""

import math

import numpy as np
import pytest

from wmpa.errors import DegenerateStateError, RailRangeError, ValidationError
from wmpa.optics import (
    OUTPUT_RAIL,
    POL_H,
    POL_V,
    WORKING_RAILS,
    BeamDisplacer,
    Block,
    HalfWavePlate,
    ModeState,
    OpticalTrain,
    PolarizingSplitter,
    VariableRetarder,
    apply_bd,
    build_figure1_train,
    check_protocol_equivalence,
    hwp_jones,
    lcvr_jones,
    polarization_major,
    postselect_middle_rail,
    simulate_train,
    train_pointer,
)
from wmpa.protocol import ProtocolConfig, run_protocol
from wmpa.qstate import sigma_x_expectation

INV_SQRT2 = math.sqrt(0.5)


def test_hwp_jones_matrix_convention():
    np.testing.assert_allclose(hwp_jones(0.0), [[1, 0], [0, -1]], atol=1e-15)
    np.testing.assert_allclose(
        hwp_jones(22.5),
        [[INV_SQRT2, INV_SQRT2], [INV_SQRT2, -INV_SQRT2]],
        atol=1e-15,
    )
    np.testing.assert_allclose(hwp_jones(45.0), [[0, 1], [1, 0]], atol=1e-15)


def test_hwp_jones_is_unitary_involution():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = hwp_jones(rng.uniform(-90.0, 90.0))
        np.testing.assert_allclose(m @ m, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-14)


def test_lcvr_jones_matrix():
    ret = 0.7
    m = lcvr_jones(ret)
    np.testing.assert_allclose(
        m, [[1.0, 0.0], [0.0, complex(math.cos(ret), math.sin(ret))]], atol=1e-15
    )


def test_variable_retarder_range_validation():
    VariableRetarder(0.0)
    VariableRetarder(2.0 * math.pi - 1e-9)
    with pytest.raises(ValidationError):
        VariableRetarder(2.0 * math.pi)
    with pytest.raises(ValidationError):
        VariableRetarder(-0.1)


def test_mode_state_basics():
    s = ModeState({(0, POL_H): 0.6, (1, POL_V): 0.8j})
    assert s.amplitude(0, POL_H) == 0.6
    assert s.amplitude(1, POL_V) == 0.8j
    assert s.amplitude(2, POL_H) == 0.0
    assert math.isclose(s.norm_sq, 1.0, rel_tol=1e-15)
    assert s.modes == ((0, POL_H), (1, POL_V))


def test_mode_state_rejects_bad_modes():
    with pytest.raises(ValidationError):
        ModeState({(5, POL_H): 1.0})
    with pytest.raises(ValidationError):
        ModeState({(0, "D"): 1.0})
    with pytest.raises(ValidationError):
        ModeState({(0, POL_H): float("inf")})


def test_mode_state_ordering_is_construction_independent():
    a = ModeState({(0, POL_H): 0.6, (1, POL_V): 0.8})
    b = ModeState({(1, POL_V): 0.8, (0, POL_H): 0.6})
    assert a.modes == b.modes
    assert a.norm_sq == b.norm_sq


def test_beam_displacer_moves_v_up_one_rail():
    out = apply_bd(ModeState.single(0, POL_V))
    assert out.amplitude(1, POL_V) == 1.0
    assert out.amplitude(0, POL_V) == 0.0
    out = apply_bd(ModeState.single(0, POL_H))
    assert out.amplitude(0, POL_H) == 1.0


def test_beam_displacer_rejects_rail_overflow():
    top = WORKING_RAILS.stop - 1
    with pytest.raises(RailRangeError):
        apply_bd(ModeState.single(top, POL_V))


def test_half_wave_plate_acts_only_on_selected_rails():
    state = ModeState({(0, POL_H): INV_SQRT2, (1, POL_H): INV_SQRT2})
    out = HalfWavePlate(45.0, rails=frozenset({1})).apply(state)
    assert out.amplitude(0, POL_H) == INV_SQRT2
    assert abs(out.amplitude(1, POL_V) - INV_SQRT2) < 1e-15
    assert abs(out.amplitude(1, POL_H)) < 1e-15


def test_block_removes_listed_rails():
    state = ModeState({(0, POL_H): 0.6, (1, POL_V): 0.8})
    out = Block(frozenset({0})).apply(state)
    assert out.amplitude(0, POL_H) == 0.0
    assert out.amplitude(1, POL_V) == 0.8
    with pytest.raises(ValidationError):
        Block(frozenset())


def test_polarizing_splitter_port_probabilities():
    state = ModeState({(0, POL_H): 0.6, (1, POL_V): 0.8})
    p_h, p_v = PolarizingSplitter.port_probabilities(state)
    assert math.isclose(p_h, 0.36, rel_tol=1e-12)
    assert math.isclose(p_v, 0.64, rel_tol=1e-12)
    assert PolarizingSplitter().apply(state) is state


def test_unitary_elements_preserve_norm():
    rng = np.random.default_rng(22)
    state = ModeState({(0, POL_H): 0.6, (0, POL_V): 0.8j})
    for element in (
        HalfWavePlate(rng.uniform(-45, 45)),
        VariableRetarder(rng.uniform(0.0, 6.0)),
        BeamDisplacer(),
    ):
        out = element.apply(state)
        assert math.isclose(out.norm_sq, state.norm_sq, abs_tol=1e-14)


def test_figure1_train_element_sequence():
    delta, theta = 2.0, 0.05
    train = build_figure1_train(delta, theta)
    kinds = [type(e).__name__ for e in train.elements]
    assert kinds == [
        "HalfWavePlate",
        "BeamDisplacer",
        "HalfWavePlate",
        "HalfWavePlate",
        "VariableRetarder",
        "VariableRetarder",
        "HalfWavePlate",
        "HalfWavePlate",
        "BeamDisplacer",
        "Block",
        "HalfWavePlate",
        "PolarizingSplitter",
    ]
    hwps = [e for e in train.elements if isinstance(e, HalfWavePlate)]
    assert [w.angle_deg for w in hwps] == [22.5, 22.5, -22.5, 67.5 - delta, 22.5 - delta, 22.5]
    assert hwps[0].rails is None
    assert hwps[1].rails == frozenset({0})
    assert hwps[2].rails == frozenset({1})
    assert hwps[3].rails == frozenset({1})
    assert hwps[4].rails == frozenset({0})
    retarders = [e for e in train.elements if isinstance(e, VariableRetarder)]
    assert [r.retardance_rad for r in retarders] == [theta, 0.0]
    assert retarders[0].rails == frozenset({1})
    assert retarders[1].rails == frozenset({0})
    block = next(e for e in train.elements if isinstance(e, Block))
    assert OUTPUT_RAIL not in block.rails
    assert block.rails == frozenset(WORKING_RAILS) - {OUTPUT_RAIL}


def test_figure1_train_without_analyzer_stops_at_block():
    train = build_figure1_train(2.0, 0.05, include_analyzer=False)
    assert type(train.elements[-1]).__name__ == "Block"
    assert len(train.elements) == 10


def test_figure1_train_validates_offset_range():
    with pytest.raises(ValidationError):
        build_figure1_train(0.0, 0.05)
    with pytest.raises(ValidationError):
        build_figure1_train(22.5, 0.05)


def test_figure1_train_wraps_signal_phase():
    train = build_figure1_train(2.0, -0.3)
    retarder = next(e for e in train.elements if isinstance(e, VariableRetarder))
    assert math.isclose(retarder.retardance_rad, 2.0 * math.pi - 0.3, rel_tol=1e-12)


def test_train_serialization_round_trip():
    train = build_figure1_train(3.0, 0.08)
    doc = train.to_dict()
    rebuilt = OpticalTrain.from_dict(doc)
    assert rebuilt.to_dict() == doc
    assert rebuilt == train


def test_train_from_dict_rejects_malformed_input():
    with pytest.raises(ValidationError):
        OpticalTrain.from_dict({})
    with pytest.raises(ValidationError):
        OpticalTrain.from_dict({"elements": [{"type": "prism"}]})
    with pytest.raises(ValidationError):
        OpticalTrain.from_dict({"elements": [{"type": "hwp"}]})


def test_simulate_train_requires_normalized_input():
    train = build_figure1_train(2.0, 0.05)
    with pytest.raises(ValidationError):
        simulate_train(train, ModeState({(0, POL_H): 0.5}))


def test_zero_signal_success_probability_is_calibration_curve():
    for delta in (1.0, 2.0, 5.0, 15.0):
        train = build_figure1_train(delta, 0.0, include_analyzer=False)
        final = simulate_train(train, ModeState.single(0, POL_H))
        prob, _ = postselect_middle_rail(final)
        expected = math.sin(math.radians(2.0 * delta)) ** 2
        assert math.isclose(prob, expected, abs_tol=1e-12)


def test_train_pointer_matches_protocol_componentwise():
    delta, theta = 2.0, 0.05
    train = build_figure1_train(delta, theta, include_analyzer=False)
    final = simulate_train(train, ModeState.single(0, POL_H))
    prob, pointer = train_pointer(final)
    outcome = run_protocol(ProtocolConfig.from_postselection_angle(delta, theta))
    np.testing.assert_allclose(
        pointer.amplitudes, outcome.pointer.amplitudes, atol=1e-15
    )
    assert math.isclose(prob, outcome.success_prob, abs_tol=1e-15)


def test_train_pointer_swaps_polarization_components():
    state = ModeState({(OUTPUT_RAIL, POL_H): 0.6, (OUTPUT_RAIL, POL_V): 0.8})
    _, pointer = train_pointer(state)
    assert pointer.a0 == 0.8  # reference (up) component arrives in V
    assert pointer.a1 == 0.6  # signal-bearing (down) component arrives in H


def test_postselect_middle_rail_raises_without_amplitude():
    with pytest.raises(DegenerateStateError):
        postselect_middle_rail(ModeState.single(0, POL_H))


def test_polarization_major_grouping():
    state = ModeState(
        {(0, POL_H): 0.1, (1, POL_H): 0.2, (0, POL_V): 0.3, (1, POL_V): 0.4}
    )
    grouped = polarization_major(state)
    np.testing.assert_allclose(grouped, [0.1, 0.2, 0.3, 0.4], atol=1e-15)


def test_train_sigma_x_follows_amplified_phase():
    delta, theta = 2.0, 0.05
    train = build_figure1_train(delta, theta, include_analyzer=False)
    final = simulate_train(train, ModeState.single(0, POL_H))
    _, pointer = train_pointer(final)
    outcome = run_protocol(ProtocolConfig.from_postselection_angle(delta, theta))
    sx_train = sigma_x_expectation(pointer)
    sx_protocol = sigma_x_expectation(outcome.pointer)
    assert math.isclose(sx_train, sx_protocol, abs_tol=1e-12)
    # In the linear regime the readout is approximately cos(kappa); the
    # balanced-pointer correction at this setting is at the percent level.
    assert abs(sx_train - math.cos(outcome.kappa_exact)) < 0.02


def test_analyzer_ports_measure_sigma_x():
    delta, theta = 2.0, 0.05
    bare = build_figure1_train(delta, theta, include_analyzer=False)
    full = build_figure1_train(delta, theta, include_analyzer=True)
    final_bare = simulate_train(bare, ModeState.single(0, POL_H))
    prob, pointer = train_pointer(final_bare)
    sx = sigma_x_expectation(pointer)
    final_full = simulate_train(full, ModeState.single(0, POL_H))
    p_h, p_v = PolarizingSplitter.port_probabilities(final_full)
    assert math.isclose(p_h + p_v, prob, abs_tol=1e-12)
    assert math.isclose(p_h, prob * (1.0 + sx) / 2.0, abs_tol=1e-12)
    assert math.isclose(p_v, prob * (1.0 - sx) / 2.0, abs_tol=1e-12)


def test_equivalence_check_reports_tiny_deviations():
    rng = np.random.default_rng(33)
    for _ in range(10):
        delta = float(rng.uniform(0.5, 22.0))
        theta = float(rng.uniform(0.0, 0.2))
        report = check_protocol_equivalence(delta, theta)
        assert report.fidelity >= 1.0 - 1e-12
        assert report.prob_diff <= 1e-12
        assert report.fidelity_deficit == 1.0 - report.fidelity


def test_equivalence_check_accepts_custom_train():
    train = build_figure1_train(2.0, 0.05, include_analyzer=False)
    report = check_protocol_equivalence(2.0, 0.05, train=train)
    assert report.fidelity >= 1.0 - 1e-12


def test_equivalence_check_flags_wrong_train():
    # A train with the wrong signal phase must not match the protocol.
    wrong = build_figure1_train(2.0, 0.15, include_analyzer=False)
    report = check_protocol_equivalence(2.0, 0.05, train=wrong)
    assert report.fidelity < 1.0 - 1e-6
