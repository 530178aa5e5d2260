import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mudam.channel import (
    ChannelSet,
    GeometryConfig,
    channel_from_paths,
    ofdm_channel,
    orthogonality_metric,
    path_matrix,
    stack_user_channel,
    steering_vector,
    synthesize_channel,
)
from mudam.exceptions import ConfigurationError, ContractViolation

from conftest import random_channel


def test_default_scenario_geometry():
    ch = synthesize_channel(GeometryConfig.uniform(128, 3, 5), 1.0)
    assert ch.num_users == 3 and ch.num_antennas == 128
    assert ch.paths_per_user == (5, 5, 5)
    for d, a in zip(ch.delays, ch.aods):
        assert np.all((d >= 0) & (d <= 80)) and len(set(d)) == 5
        assert np.all(np.abs(a) <= 90)


def test_minimal_channel():
    ch = synthesize_channel(GeometryConfig.uniform(1, 1, 1, rng_seed=7), 1.0)
    assert ch.gains[0].shape == (1, 1)


def test_determinism():
    cfg = GeometryConfig.uniform(16, 3, 4, rng_seed=11)
    a, b = synthesize_channel(cfg, 1.0), synthesize_channel(cfg, 1.0)
    for ga, gb, da, db in zip(a.gains, b.gains, a.delays, b.delays):
        assert np.array_equal(ga, gb) and np.array_equal(da, db)


def test_strongest_path_first():
    ch = random_channel(3, Mt=16, K=3, L=5, delay_range=(0, 80))
    for g in ch.gains:
        n = np.linalg.norm(g, axis=1)
        assert np.all(np.diff(n) <= 0)


def test_path_loss_scales_amplitude():
    a = random_channel(5)
    b = random_channel(5, path_loss_db=20.0)
    for ga, gb in zip(a.gains, b.gains):
        np.testing.assert_allclose(gb, ga / 10.0, rtol=1e-12)


def test_steering_vector_unit_modulus():
    v = steering_vector(8, [0.0, 30.0])
    assert np.allclose(np.abs(v), 1.0)
    # 30 deg, half wavelength: phase step pi/2
    np.testing.assert_allclose(v[1, 1], 1j, atol=1e-12)


@pytest.mark.parametrize(
    "kw",
    [
        dict(num_antennas=0, num_users=1, paths_per_user=(1,)),
        dict(num_antennas=2, num_users=2, paths_per_user=(1,)),
        dict(num_antennas=2, num_users=1, paths_per_user=(0,)),
        dict(num_antennas=2, num_users=1, paths_per_user=(4,), delay_range=(0, 2)),
        dict(num_antennas=2, num_users=1, paths_per_user=(1,), delay_range=(3, 1)),
    ],
)
def test_invalid_geometry(kw):
    with pytest.raises(ConfigurationError):
        GeometryConfig(**kw)


def test_channelset_rejects_repeated_delays():
    with pytest.raises(ContractViolation):
        channel_from_paths([[[1, 0], [0, 1]]], [[2, 2]])


def test_stack_single_block():
    ch = random_channel(0, L=1)
    np.testing.assert_array_equal(stack_user_channel(ch, 0), ch.gains[0][0])


def test_stack_concatenation():
    ch = channel_from_paths([[[1, 0], [0, 1]]], [[0, 1]])
    np.testing.assert_array_equal(stack_user_channel(ch, 0), [1, 0, 0, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 5))
def test_stack_energy_identity(seed, K, L):
    ch = random_channel(seed, K=K, L=L)
    for k in range(K):
        # independent summation: loop over entries
        ref = sum(abs(x) ** 2 for row in ch.gains[k] for x in row)
        np.testing.assert_allclose(np.linalg.norm(stack_user_channel(ch, k)) ** 2, ref, rtol=1e-12)


def test_path_matrix_layout():
    ch = random_channel(1, K=2, L=3)
    H = path_matrix(ch)
    assert H.shape == (8, 6)
    np.testing.assert_array_equal(H[:, 4], ch.gains[1][1])
    np.testing.assert_array_equal(path_matrix(ch, strongest_only=True)[:, 1], ch.gains[1][0])


def test_ofdm_zero_delay_is_flat():
    h = np.array([1 + 2j, -0.5j, 3.0])
    o = ofdm_channel(channel_from_paths([[h]], [[0]]), 8)
    np.testing.assert_allclose(o.vectors[0], np.tile(h / np.sqrt(8), (8, 1)), rtol=1e-14)


def test_ofdm_two_path_expansion():
    h1, h2 = np.array([1.0, 1j]), np.array([0.5, -2.0])
    o = ofdm_channel(channel_from_paths([[h1, h2]], [[0, 1]]), 4)
    for m in range(4):
        ref = (h1 + h2 * np.exp(-1j * np.pi * m / 2)) / 2
        np.testing.assert_allclose(o.vectors[0, m], ref, rtol=1e-12, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([16, 32, 64]))
def test_ofdm_parseval_and_direct_dft(seed, M):
    ch = random_channel(seed, Mt=4, K=2, L=3)
    o = ofdm_channel(ch, M)
    for k in range(2):
        e_time = np.sum(np.abs(ch.gains[k]) ** 2)
        np.testing.assert_allclose(np.sum(np.abs(o.vectors[k]) ** 2), e_time, rtol=1e-10)
        for m in (0, M // 3, M - 1):
            ref = sum(h * np.exp(-2j * np.pi * m * d / M) for h, d in zip(ch.gains[k], ch.delays[k])) / np.sqrt(M)
            np.testing.assert_allclose(o.vectors[k, m], ref, rtol=1e-10)
    assert o.subcarrier_noise_power == pytest.approx(ch.noise_power / M)


def test_ofdm_needs_enough_subcarriers():
    ch = channel_from_paths([[[1.0]]], [[8]])
    with pytest.raises(ConfigurationError):
        ofdm_channel(ch, 8)


def test_orthogonality_extremes():
    h = np.array([1.0, 2.0j])
    assert orthogonality_metric(channel_from_paths([[h, 2 * h]], [[0, 1]])) == pytest.approx(1.0)
    a = steering_vector(4, [0.0, 30.0])
    # sin(30 deg) = 1/2 spreads the phases over a full period
    assert orthogonality_metric(channel_from_paths([a], [[0, 1]])) == pytest.approx(0.0, abs=1e-12)


def test_orthogonality_trend():
    med = []
    for Mt in (16, 64, 256, 1024):
        vals = [orthogonality_metric(random_channel(s, Mt=Mt, K=2, L=2)) for s in range(100)]
        med.append(np.median(vals))
    assert all(b < a for a, b in zip(med, med[1:]))
