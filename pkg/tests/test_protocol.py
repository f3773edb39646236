"""Tests for the abstract amplification protocol."""

import cmath
import math

import numpy as np
import pytest

from wmpa.errors import (
    DivergentMagnificationError,
    GlobalPhaseDegenerateError,
    NoSolutionError,
    UndefinedPhaseError,
    ValidationError,
)
from wmpa.protocol import (
    AmplificationParams,
    ProtocolConfig,
    amplified_phase_exact,
    amplified_pointer_first_order,
    controlled_phase_unitary,
    invert_amplification,
    magnification,
    run_protocol,
)
from wmpa.qstate import fidelity

INV_SQRT2 = math.sqrt(0.5)


def balanced_config(gamma: float, eta: float, theta: float) -> ProtocolConfig:
    return ProtocolConfig(
        alpha=INV_SQRT2,
        beta=INV_SQRT2,
        mu=INV_SQRT2,
        nu=INV_SQRT2,
        gamma=gamma,
        eta=eta,
        theta=theta,
    )


def random_config(rng) -> ProtocolConfig:
    def pair():
        phi = rng.uniform(0.0, 2.0 * math.pi)
        return math.cos(phi), math.sin(phi)

    while True:
        alpha, beta = pair()
        mu, nu = pair()
        gamma, eta = pair()
        if abs(alpha * gamma + beta * eta) > 1e-3 and abs(beta * eta) > 1e-3:
            return ProtocolConfig(
                alpha=alpha,
                beta=beta,
                mu=mu,
                nu=nu,
                gamma=gamma,
                eta=eta,
                theta=rng.uniform(-math.pi, math.pi),
            )


def test_config_rejects_unnormalized_pairs():
    with pytest.raises(ValidationError):
        ProtocolConfig(1.0, 1.0, INV_SQRT2, INV_SQRT2, 1.0, 0.0, 0.1)
    with pytest.raises(ValidationError):
        ProtocolConfig(1.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.1)


def test_config_rejects_nonfinite_values():
    with pytest.raises(ValidationError):
        ProtocolConfig(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, float("nan"))


def test_postselection_angle_parametrization():
    cfg = ProtocolConfig.from_postselection_angle(2.0, 0.05)
    angle = math.radians(45.0 - 4.0)
    assert math.isclose(cfg.gamma, math.sin(angle), rel_tol=1e-15)
    assert math.isclose(cfg.eta, -math.cos(angle), rel_tol=1e-15)
    assert cfg.alpha == cfg.beta == cfg.mu == cfg.nu == INV_SQRT2
    assert cfg.theta == 0.05


def test_postselection_angle_gives_expected_ratio():
    for delta in (0.5, 1.0, 2.0, 5.0, 11.25, 20.0):
        cfg = ProtocolConfig.from_postselection_angle(delta, 0.0)
        expected_r = -math.tan(math.radians(45.0 - 2.0 * delta))
        assert math.isclose(cfg.amplification().r, expected_r, abs_tol=1e-14)


def test_amplification_requires_nonzero_denominator():
    cfg = ProtocolConfig(1.0, 0.0, INV_SQRT2, INV_SQRT2, 0.0, 1.0, 0.1)
    with pytest.raises(ValidationError):
        cfg.amplification()


def test_amplification_params_validate_consistency():
    AmplificationParams(r=-0.9, h=magnification(-0.9))
    with pytest.raises(ValidationError):
        AmplificationParams(r=-0.9, h=9.0)
    params = AmplificationParams.from_r(-0.8)
    assert math.isclose(params.h, 5.0, rel_tol=1e-14)


def test_controlled_phase_unitary_matrix():
    theta = 0.7
    u = controlled_phase_unitary(theta)
    expected = np.diag([1.0, 1.0, 1.0, cmath.exp(1j * theta)])
    np.testing.assert_allclose(u.matrix, expected, atol=1e-15)


def test_amplified_phase_frozen_values():
    # High-precision reference values for the closed-form amplified phase.
    assert abs(amplified_phase_exact(0.05, -0.9) - 0.46852909463041097) < 1e-15
    assert abs(math.tan(amplified_phase_exact(0.05, -0.9)) - 0.50611683524457821) < 1e-14
    assert abs(amplified_phase_exact(0.1, -2.0 / 3.0) - 0.29517492820229421) < 1e-14
    assert abs(amplified_phase_exact(0.03, -0.9) / 0.03 - 9.75529760102877) < 1e-11
    r_two_deg = -math.tan(math.radians(41.0))
    assert abs(amplified_phase_exact(0.05, r_two_deg) - 0.36842147175866924) < 1e-14


def test_amplified_phase_linearizes_to_magnification():
    for r in (-0.9, -0.8, -2.0 / 3.0, -0.3, 0.4):
        h = magnification(r)
        theta = 1e-6
        assert math.isclose(
            amplified_phase_exact(theta, r) / theta, h, rel_tol=1e-9
        )


def test_amplified_phase_stays_on_principal_branch_at_large_theta():
    # cos(theta) + r < 0 flips the naive arctangent branch; atan2 must not.
    kappa = amplified_phase_exact(0.5, -0.95)
    assert 0.0 < kappa < math.pi


def test_amplified_phase_undefined_at_vanishing_direction():
    with pytest.raises(UndefinedPhaseError):
        amplified_phase_exact(0.0, -1.0)


def test_magnification_values_and_divergence():
    assert math.isclose(magnification(-0.9), 10.0, rel_tol=1e-14)
    assert math.isclose(magnification(-0.8), 5.0, rel_tol=1e-14)
    assert math.isclose(magnification(-2.0 / 3.0), 3.0, rel_tol=1e-14)
    assert magnification(0.0) == 1.0
    with pytest.raises(DivergentMagnificationError):
        magnification(-1.0)


def test_inversion_round_trip_random():
    rng = np.random.default_rng(777)
    for _ in range(500):
        theta = float(rng.uniform(-0.5, 0.5))
        r = float(rng.uniform(-0.95, 0.95))
        kappa = amplified_phase_exact(theta, r)
        assert abs(invert_amplification(kappa, r) - theta) <= 1e-12


def test_inversion_rejects_inconsistent_measurement():
    with pytest.raises(NoSolutionError):
        invert_amplification(math.pi / 2.0, -1.2)


def test_run_protocol_matches_closed_form_pointer():
    rng = np.random.default_rng(888)
    for _ in range(100):
        cfg = random_config(rng)
        outcome = run_protocol(cfg)
        overlap = cfg.alpha * cfg.gamma + cfg.beta * cfg.eta
        expected_up = cfg.mu * overlap
        expected_down = cfg.nu * (
            cfg.alpha * cfg.gamma + cfg.beta * cfg.eta * cmath.exp(1j * cfg.theta)
        )
        np.testing.assert_allclose(
            outcome.pointer.amplitudes, [expected_up, expected_down], atol=1e-14
        )
        expected_prob = abs(expected_up) ** 2 + abs(expected_down) ** 2
        assert math.isclose(outcome.success_prob, expected_prob, abs_tol=1e-14)
        r = (cfg.alpha * cfg.gamma) / (cfg.beta * cfg.eta)
        assert math.isclose(
            outcome.kappa_exact, amplified_phase_exact(cfg.theta, r), abs_tol=1e-12
        )
        assert math.isclose(
            outcome.kappa_first_order, magnification(r) * cfg.theta, rel_tol=1e-12
        )


def test_run_protocol_success_probability_at_zero_signal():
    for delta in (1.0, 2.0, 5.0, 10.0):
        cfg = ProtocolConfig.from_postselection_angle(delta, 0.0)
        expected = math.sin(math.radians(2.0 * delta)) ** 2
        assert math.isclose(run_protocol(cfg).success_prob, expected, abs_tol=1e-12)


def test_run_protocol_rejects_degenerate_overlap():
    cfg = balanced_config(gamma=INV_SQRT2, eta=-INV_SQRT2, theta=0.05)
    assert cfg.selection_overlap == 0.0
    with pytest.raises(GlobalPhaseDegenerateError):
        run_protocol(cfg)


def test_first_order_pointer_close_to_exact_in_linear_regime():
    cfg = ProtocolConfig.from_postselection_angle(1.5, 0.01)
    exact = run_protocol(cfg).pointer
    approx = amplified_pointer_first_order(cfg)
    assert fidelity(exact, approx) > 1.0 - 1e-4
    kappa = run_protocol(cfg).kappa_exact
    assert approx.a0 == cfg.mu
    assert cmath.isclose(approx.a1, cfg.nu * cmath.exp(1j * kappa), rel_tol=1e-12)


def test_first_order_pointer_rejects_degenerate_overlap():
    cfg = balanced_config(gamma=INV_SQRT2, eta=-INV_SQRT2, theta=0.05)
    with pytest.raises(GlobalPhaseDegenerateError):
        amplified_pointer_first_order(cfg)


def test_selection_overlap_and_properties():
    cfg = ProtocolConfig.from_postselection_angle(2.0, 0.05)
    assert math.isclose(
        cfg.selection_overlap,
        cfg.alpha * cfg.gamma + cfg.beta * cfg.eta,
        rel_tol=1e-15,
    )
    np.testing.assert_allclose(
        cfg.preselection.amplitudes, [cfg.alpha, cfg.beta], atol=1e-15
    )
    np.testing.assert_allclose(
        cfg.pointer_preparation.amplitudes, [cfg.mu, cfg.nu], atol=1e-15
    )
    np.testing.assert_allclose(
        cfg.postselection.amplitudes, [cfg.gamma, cfg.eta], atol=1e-15
    )
