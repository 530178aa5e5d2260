import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mudam.beamforming import (
    channel_matrix,
    mrt_asymptotic,
    mrt_closed_form_sinr,
    mrt_per_path,
    rzf_directions,
    rzf_per_path,
    zf_directions,
    zf_per_path,
)
from mudam.channel import channel_from_paths
from mudam.dam import dam_sinr, delay_plan, sum_rate
from mudam.exceptions import ConfigurationError, ZeroForcingInfeasible

from conftest import random_channel


def test_mrt_asymptotic_single_path():
    ch = random_channel(0, K=2, L=1)
    b = mrt_asymptotic(ch, 1.0, per_user_power=[0.3, 0.7])
    for k, p in enumerate([0.3, 0.7]):
        h = ch.gains[k][0]
        np.testing.assert_allclose(b.beams[k][0], np.sqrt(p) * h / np.linalg.norm(h), rtol=1e-12)
    assert b.total_power == pytest.approx(1.0, rel=1e-12)


def test_mrt_asymptotic_symmetric_water_fill():
    h = np.array([1.0, 0.0, 0.0])
    g = np.array([0.0, 0.0, 1j])
    ch = channel_from_paths([[h], [g]], [[0], [1]])
    np.testing.assert_allclose(mrt_asymptotic(ch, 2.0).user_powers(), [1.0, 1.0], rtol=1e-12)


def test_mrt_asymptotic_budget_checked():
    ch = random_channel(0)
    with pytest.raises(ConfigurationError):
        mrt_asymptotic(ch, 1.0, per_user_power=[0.8, 0.8])


def test_mrt_single_user_snr():
    h = np.array([0.5, 1j, -1.0])
    ch = channel_from_paths([[h]], [[4]], noise_power=0.2)
    (r,) = dam_sinr(ch, mrt_per_path(ch, 3.0))
    assert r.sinr == pytest.approx(3.0 * np.sum(np.abs(h) ** 2) / 0.2, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100.0))
def test_mrt_budget_and_closed_form(seed, P):
    ch = random_channel(seed, Mt=8, K=3, L=3, noise=0.5)
    beams = mrt_per_path(ch, P)
    assert beams.total_power == pytest.approx(P, rel=1e-12)
    got = np.array([r.sinr for r in dam_sinr(ch, beams)])
    np.testing.assert_allclose(got, mrt_closed_form_sinr(ch, P), rtol=1e-10)


def test_mrt_channel_scaling():
    ch = random_channel(3, Mt=8, K=2, L=2, noise=0.5)
    c = 1.7 - 0.4j
    a = dam_sinr(ch, mrt_per_path(ch, 1.0))
    b = dam_sinr(ch.scaled(c), mrt_per_path(ch.scaled(c), 1.0))
    for ra, rb in zip(a, b):
        # MRT beams are normalized, so signal and interference scale by |c|^2
        assert rb.desired_power == pytest.approx(abs(c) ** 2 * ra.desired_power, rel=1e-10)
        assert rb.interference_power == pytest.approx(abs(c) ** 2 * ra.interference_power, rel=1e-10)
        assert rb.noise_power == ra.noise_power


def test_zf_orthogonal_columns():
    H = np.diag([2.0, 0.5j, 1.0]).astype(complex)
    W = zf_directions(H)
    np.testing.assert_allclose(W, H / np.sum(np.abs(H) ** 2, axis=0), atol=1e-14)


def test_zf_single_user():
    h = np.array([1.0, 1j])
    ch = channel_from_paths([[h]], [[0]], noise_power=0.5)
    res = zf_per_path(ch, 2.0)
    assert res.sum_rate == pytest.approx(np.log2(1 + 2.0 * 2.0 / 0.5), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_zf_exactness(seed):
    ch = random_channel(seed, Mt=8, K=2, L=2, noise=0.1)
    try:
        res = zf_per_path(ch, 1.0)
    except ZeroForcingInfeasible:
        return
    H = channel_matrix(ch)
    F = np.concatenate([b for b in res.beams.beams], axis=0).T
    G = H.conj().T @ F
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) <= 1e-9 * np.max(np.abs(np.diag(G)))
    reports = dam_sinr(ch, res.beams)
    top = max(r.desired_power for r in reports)  # water-filling may switch a user off
    for k, r in enumerate(reports):
        assert r.interference_power <= 1e-16 * top
        # receive amplitude is the sum of sqrt(v_kl)
        amp = np.sum(np.real(np.einsum("lm,lm->l", ch.gains[k].conj(), res.beams.beams[k])))
        assert r.sinr == pytest.approx(amp**2 / ch.noise_power, rel=1e-9)
    np.testing.assert_allclose([r.rate for r in dam_sinr(ch, res.beams)], res.rates, rtol=1e-9)
    assert res.beams.total_power == pytest.approx(1.0, rel=1e-9)


def grid_zf_sum_rate(res, noise, P, steps=400):
    """Best user split over a grid with local refinement (K = 2)."""
    q2 = np.array([np.sum(1 / np.linalg.norm(b, axis=0) ** 2) for b in np.split(res.directions, 2, axis=1)])

    def f(t):
        return np.sum(np.log2(1 + np.array([t, P - t]) * q2 / noise))

    grid = np.linspace(0, P, steps + 1)
    t = grid[np.argmax([f(x) for x in grid])]
    for _ in range(40):
        fine = np.linspace(max(0, t - P / steps), min(P, t + P / steps), 41)
        t = fine[np.argmax([f(x) for x in fine])]
    return f(t)


@pytest.mark.parametrize("seed", range(6))
def test_zf_power_split_optimal(seed):
    ch = random_channel(seed, Mt=8, K=2, L=2, noise=0.3)
    res = zf_per_path(ch, 1.0)
    ref = grid_zf_sum_rate(res, ch.noise_power, 1.0)
    assert res.sum_rate >= ref * (1 - 1e-3)


def test_zf_rank_checks():
    ch = channel_from_paths([[[1.0, 0.0], [2.0, 0.0]]], [[0, 1]])
    with pytest.raises(ZeroForcingInfeasible):
        zf_per_path(ch, 1.0)
    too_many = random_channel(0, Mt=2, K=2, L=2)
    with pytest.raises(ZeroForcingInfeasible):
        zf_per_path(too_many, 1.0)


def test_rzf_direction_single_column():
    h = np.array([[1.0 + 1j], [0.5], [-2.0j]])
    e = rzf_directions(h, 0.3)
    np.testing.assert_allclose(e[:, 0], h[:, 0] / np.linalg.norm(h), rtol=1e-12)


def test_rzf_single_user_rate():
    h = np.array([1.0, 0.5j, -0.3])
    ch = channel_from_paths([[h]], [[2]], noise_power=0.1)
    res = rzf_per_path(ch, 2.0)
    assert res.sum_rate == pytest.approx(np.log2(1 + 2.0 * np.sum(np.abs(h) ** 2) / 0.1), rel=1e-6)


def test_rzf_beats_mrt_and_zf():
    ch = random_channel(5, Mt=16, K=3, L=2, delay_range=(0, 20), noise=0.05)
    P = 1.0
    res = rzf_per_path(ch, P)
    mrt = sum_rate(dam_sinr(ch, mrt_per_path(ch, P)))
    zf = zf_per_path(ch, P).sum_rate
    assert res.sum_rate >= max(mrt, zf) * 0.99
    assert all(b >= a - 1e-7 * max(1, abs(a)) for a, b in zip(res.trace, res.trace[1:]))
    assert res.beams.total_power <= P * (1 + 1e-9)
    assert res.sum_rate == pytest.approx(res.trace[-1], rel=1e-9)


def test_rzf_multistart_stable():
    ch = random_channel(6, Mt=16, K=3, L=2, delay_range=(0, 20), noise=0.05)
    a = rzf_per_path(ch, 1.0)
    rng = np.random.default_rng(0)
    init = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(3)]
    tot = sum(np.sum(np.abs(x) ** 2) for x in init)
    init = [x / np.sqrt(tot) for x in init]
    b = rzf_per_path(ch, 1.0, init=init)
    assert b.sum_rate == pytest.approx(a.sum_rate, rel=0.02)


def test_rzf_init_over_budget():
    ch = random_channel(6, Mt=8, K=2, L=2)
    with pytest.raises(ConfigurationError):
        rzf_per_path(ch, 1.0, init=[np.ones(2), np.ones(2)])


@pytest.mark.parametrize("fn", [mrt_per_path, zf_per_path, rzf_per_path])
def test_power_must_be_positive(fn):
    with pytest.raises(ConfigurationError):
        fn(random_channel(0), 0.0)
