"""Tests for the seeded photon-counting simulation."""

import math
from dataclasses import replace

import numpy as np
import pytest

from wmpa.errors import InsufficientDataError, ValidationError
from wmpa.montecarlo import (
    CountData,
    NoiseModel,
    derive_seed,
    sigma_x_from_counts,
    simulate_counts,
    spawn_seeds,
)
from wmpa.protocol import ProtocolConfig, run_protocol


def make_config(delta_deg=2.0, theta=0.05):
    return ProtocolConfig.from_postselection_angle(delta_deg, theta)


def test_noise_model_defaults_are_ideal():
    noise = NoiseModel()
    assert noise.visibility == 1.0
    assert noise.lcvr_jitter_std == 0.0
    assert noise.dark_rate == 0.0


def test_noise_model_rejects_out_of_range_values():
    with pytest.raises(ValidationError):
        NoiseModel(visibility=1.2)
    with pytest.raises(ValidationError):
        NoiseModel(visibility=-0.1)
    with pytest.raises(ValidationError):
        NoiseModel(lcvr_jitter_std=-1e-3)
    with pytest.raises(ValidationError):
        NoiseModel(dark_rate=-5.0)
    with pytest.raises(ValidationError):
        NoiseModel(visibility=math.nan)
    with pytest.raises(ValidationError):
        NoiseModel(dark_rate=math.inf)


def test_count_data_basic_invariants():
    cfg = make_config()
    noise = NoiseModel()
    data = CountData(
        n_plus=60, n_minus=40, n_input=1000, duration=1.0, rate=1e3,
        seed=7, config=cfg, noise=noise,
    )
    assert data.n_detected == 100
    with pytest.raises(ValidationError):
        CountData(n_plus=-1, n_minus=0, n_input=10, duration=1.0, rate=1e3,
                  seed=0, config=cfg, noise=noise)
    with pytest.raises(ValidationError):
        CountData(n_plus=6, n_minus=5, n_input=10, duration=1.0, rate=1e3,
                  seed=0, config=cfg, noise=noise)
    with pytest.raises(ValidationError):
        CountData(n_plus=1, n_minus=1, n_input=10, duration=0.0, rate=1e3,
                  seed=0, config=cfg, noise=noise)
    with pytest.raises(ValidationError):
        CountData(n_plus=1, n_minus=1, n_input=10, duration=1.0, rate=-1e3,
                  seed=0, config=cfg, noise=noise)
    with pytest.raises(ValidationError):
        CountData(n_plus=1, n_minus=1, n_input=10, duration=1.0, rate=1e3,
                  seed=-3, config=cfg, noise=noise)


def test_count_data_record_round_trip():
    cfg = make_config(delta_deg=3.0, theta=0.08)
    noise = NoiseModel(visibility=0.97, lcvr_jitter_std=0.001, dark_rate=25.0)
    data = simulate_counts(cfg, noise, rate=5e4, duration=0.5, seed=42)
    record = data.to_record()
    rebuilt = CountData.from_record(record)
    assert rebuilt == data

    # CSV readers hand every value back as a string; the rebuild must cope.
    as_strings = {key: str(value) for key, value in record.items()}
    assert CountData.from_record(as_strings) == data

    short = dict(record)
    del short["n_plus"]
    with pytest.raises(ValidationError):
        CountData.from_record(short)


def test_simulate_counts_is_deterministic_in_seed():
    cfg = make_config()
    noise = NoiseModel(visibility=0.99, lcvr_jitter_std=0.002, dark_rate=10.0)
    a = simulate_counts(cfg, noise, rate=1e5, duration=0.2, seed=123)
    b = simulate_counts(cfg, noise, rate=1e5, duration=0.2, seed=123)
    c = simulate_counts(cfg, noise, rate=1e5, duration=0.2, seed=124)
    assert (a.n_plus, a.n_minus, a.n_input) == (b.n_plus, b.n_minus, b.n_input)
    assert (a.n_plus, a.n_minus, a.n_input) != (c.n_plus, c.n_minus, c.n_input)
    # The stored config is the pre-jitter one, so the record replays exactly.
    assert a.config == cfg
    replayed = simulate_counts(a.config, a.noise, a.rate, a.duration, a.seed)
    assert replayed == a


def test_simulate_counts_validates_arguments():
    cfg = make_config()
    noise = NoiseModel()
    with pytest.raises(ValidationError):
        simulate_counts(cfg, noise, rate=0.0, duration=1.0, seed=0)
    with pytest.raises(ValidationError):
        simulate_counts(cfg, noise, rate=1e3, duration=-2.0, seed=0)
    with pytest.raises(ValidationError):
        simulate_counts(cfg, noise, rate=1e3, duration=1.0, seed=-1)
    with pytest.raises(ValidationError):
        simulate_counts(cfg, noise, rate=1e3, duration=1.0, seed=0.5)


def test_simulate_counts_draw_order_matches_documented_contract():
    # Replays the documented RNG stream by hand: jitter (only when enabled),
    # then Poisson input, then the post-selection binomial, then the "+"
    # detector binomial, then two symmetric dark-count Poissons.
    rate, duration = 2e4, 0.3
    for seed in (0, 1, 5, 99):
        for noise in (
            NoiseModel(),
            NoiseModel(visibility=0.95),
            NoiseModel(lcvr_jitter_std=0.01),
            NoiseModel(visibility=0.9, lcvr_jitter_std=0.02, dark_rate=40.0),
        ):
            cfg = make_config(delta_deg=2.5, theta=0.06)
            rng = np.random.default_rng(seed)
            theta = cfg.theta
            if noise.lcvr_jitter_std > 0.0:
                theta = theta + rng.normal(0.0, noise.lcvr_jitter_std)
            outcome = run_protocol(replace(cfg, theta=theta))
            n_input = int(rng.poisson(rate * duration))
            survivors = int(rng.binomial(n_input, outcome.success_prob))
            p_plus = 0.5 * (1.0 + noise.visibility * math.cos(outcome.kappa_exact))
            n_plus = int(rng.binomial(survivors, p_plus))
            n_minus = survivors - n_plus
            if noise.dark_rate > 0.0:
                n_plus += int(rng.poisson(noise.dark_rate * duration))
                n_minus += int(rng.poisson(noise.dark_rate * duration))

            data = simulate_counts(cfg, noise, rate, duration, seed)
            assert data.n_input == n_input
            assert data.n_plus == n_plus
            assert data.n_minus == n_minus


def test_simulate_counts_statistics_track_the_protocol():
    cfg = make_config(delta_deg=2.0, theta=0.05)
    outcome = run_protocol(cfg)
    rate, duration = 8e5, 2.0
    expected_input = rate * duration
    noise = NoiseModel()
    for seed in range(5):
        data = simulate_counts(cfg, noise, rate, duration, seed)
        # Poisson input: within 5 standard deviations of the mean.
        assert abs(data.n_input - expected_input) < 5.0 * math.sqrt(expected_input)
        # Post-selection survival tracks the exact success probability.
        survival = data.n_detected / data.n_input
        se = math.sqrt(outcome.success_prob * (1 - outcome.success_prob) / data.n_input)
        assert abs(survival - outcome.success_prob) < 5.0 * se
        # The click asymmetry tracks cos(kappa_exact).
        est, est_se = sigma_x_from_counts(data)
        assert abs(est - math.cos(outcome.kappa_exact)) < 5.0 * max(est_se, 1e-12)


def test_visibility_scales_the_click_asymmetry():
    cfg = make_config(delta_deg=2.0, theta=0.05)
    outcome = run_protocol(cfg)
    visibility = 0.5
    noise = NoiseModel(visibility=visibility)
    data = simulate_counts(cfg, noise, rate=8e5, duration=4.0, seed=2024)
    est, est_se = sigma_x_from_counts(data)
    assert abs(est - visibility * math.cos(outcome.kappa_exact)) < 5.0 * est_se


def test_large_dark_rate_breaks_the_count_invariant():
    cfg = make_config()
    # More dark counts than input photons cannot form a valid count record.
    noise = NoiseModel(dark_rate=1e6)
    with pytest.raises(ValidationError):
        simulate_counts(cfg, noise, rate=10.0, duration=1.0, seed=0)


def test_sigma_x_from_counts_known_values():
    cfg = make_config()
    noise = NoiseModel()
    data = CountData(n_plus=75, n_minus=25, n_input=400, duration=1.0, rate=400.0,
                     seed=0, config=cfg, noise=noise)
    est, se = sigma_x_from_counts(data)
    assert est == 0.5
    assert abs(se - math.sqrt(0.75 / 100)) < 1e-15

    empty = CountData(n_plus=0, n_minus=0, n_input=400, duration=1.0, rate=400.0,
                      seed=0, config=cfg, noise=noise)
    with pytest.raises(InsufficientDataError):
        sigma_x_from_counts(empty)


def test_spawn_seeds_is_deterministic_and_distinct():
    seeds = spawn_seeds(12345, 50)
    again = spawn_seeds(12345, 50)
    other = spawn_seeds(12346, 50)
    assert seeds == again
    assert seeds != other
    assert len(set(seeds)) == 50
    assert all(isinstance(s, int) and s >= 0 for s in seeds)
    assert spawn_seeds(12345, 0) == []
    with pytest.raises(ValidationError):
        spawn_seeds(12345, -1)


def test_derive_seed_gives_independent_named_streams():
    base = derive_seed(777, 0)
    other = derive_seed(777, 1)
    assert base == derive_seed(777, 0)
    assert other == derive_seed(777, 1)
    assert base != other
    assert isinstance(base, int) and base >= 0
    # The derived stream differs from the parent's own draws.
    parent = np.random.default_rng(777).integers(0, 2**32, size=4)
    child = np.random.default_rng(derive_seed(777, 1)).integers(0, 2**32, size=4)
    assert list(parent) != list(child)
