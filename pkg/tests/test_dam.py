import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mudam.beamforming import mrt_per_path, zf_per_path
from mudam.channel import channel_from_paths
from mudam.dam import (
    MIN_EMPIRICAL_SAMPLES,
    PathBeamformerSet,
    delay_plan,
    dam_sinr,
    effective_channel_bank,
    empirical_sinr,
    estimate_sinr,
    qam_symbols,
    received_waveform,
    transmit_waveform,
)
from mudam.exceptions import ContractViolation, EstimationError

from conftest import crandn, random_channel


def random_beams(ch, rng):
    return PathBeamformerSet([crandn(rng, *g.shape) for g in ch.gains], delay_plan(ch))


def test_delay_plan_formula():
    ch = channel_from_paths([[[1.0], [1.0], [1.0]]], [[2, 0, 5]])
    np.testing.assert_array_equal(delay_plan(ch).kappa[0], [3, 5, 0])
    single = channel_from_paths([[[1.0]]], [[4]])
    np.testing.assert_array_equal(delay_plan(single).kappa[0], [0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_delay_plan_invariants(seed):
    ch = random_channel(seed, K=3, L=4, delay_range=(0, 40))
    for k, kap in enumerate(delay_plan(ch).kappa):
        assert np.all(kap >= 0) and len(set(kap)) == len(kap)
        np.testing.assert_array_equal(kap + ch.delays[k], ch.max_delays[k])


def test_bank_self_pair_column():
    h1, h2 = np.array([1.0, 2.0]), np.array([3.0, 4.0])
    ch = channel_from_paths([[h1, h2]], [[0, 2]])
    bank = effective_channel_bank(ch)
    G = bank.matrices[0][0]
    col = G[:, bank.column_of(0, 0, 2)]
    # i = n_kl - n_kl' = 2 pairs path l=2 with l'=1
    np.testing.assert_array_equal(col[:2], h2)
    np.testing.assert_array_equal(col[2:], 0)


def test_bank_identical_single_delays():
    ch = channel_from_paths([[[1.0, 0.0]], [[0.0, 1.0]]], [[3], [3]])
    G = effective_channel_bank(ch).matrices[0][1]
    assert G.shape[1] == 1
    assert effective_channel_bank(ch).column_of(0, 1, 0) == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_bank_matches_quadratic_scan(seed):
    ch = random_channel(seed, Mt=3, K=2, L=3, delay_range=(0, 9))
    bank = effective_channel_bank(ch)
    Mt = ch.num_antennas
    for k in range(2):
        for kp in range(2):
            G = bank.matrices[k][kp]
            lo = int(ch.min_delays[k] - ch.max_delays[kp])
            hi = int(ch.max_delays[k] - ch.min_delays[kp])
            assert G.shape == (Mt * ch.paths_per_user[kp], hi - lo + 1)
            for i in range(lo, hi + 1):
                ref = np.zeros(Mt * ch.paths_per_user[kp], dtype=complex)
                for l in range(ch.paths_per_user[k]):
                    for lp in range(ch.paths_per_user[kp]):
                        if ch.delays[k][l] - ch.delays[kp][lp] == i:
                            ref[lp * Mt:(lp + 1) * Mt] = ch.gains[k][l]
                np.testing.assert_array_equal(G[:, bank.column_of(k, kp, i)], ref)


def test_sinr_single_user_single_path():
    h = np.array([1 + 1j, 0.5, -2j])
    ch = channel_from_paths([[h]], [[3]], noise_power=0.1)
    P = 2.0
    beams = PathBeamformerSet([np.sqrt(P) * h[None] / np.linalg.norm(h)], delay_plan(ch))
    (r,) = dam_sinr(ch, beams)
    assert r.isi_power == 0 and r.iui_power == 0
    assert r.sinr == pytest.approx(P * np.linalg.norm(h) ** 2 / 0.1, rel=1e-12)


def test_sinr_zf_cancels():
    ch = random_channel(2, Mt=8, K=2, L=2)
    for r in dam_sinr(ch, zf_per_path(ch, 1.0).beams):
        assert r.isi_power + r.iui_power <= 1e-18 * r.desired_power


def scalar_sinr(ch, beams):
    """Direct double sum over path pairs grouped by delay offset."""
    K = ch.num_users
    kap = beams.plan.kappa
    out = []
    for k in range(K):
        taps = {}  # (user kp, lag) -> scalar coefficient
        for l, (h, d) in enumerate(zip(ch.gains[k], ch.delays[k])):
            for kp in range(K):
                for lp, f in enumerate(beams.beams[kp]):
                    lag = int(d) + int(kap[kp][lp])
                    taps[(kp, lag)] = taps.get((kp, lag), 0) + np.vdot(h, f)
        dlag = int(ch.max_delays[k])
        desired = abs(taps.pop((k, dlag), 0)) ** 2
        interf = sum(abs(v) ** 2 for v in taps.values())
        out.append(desired / (interf + ch.noise_power))
    return np.array(out)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_matrix_form_matches_scalar_form(seed):
    ch = random_channel(seed, Mt=4, K=2, L=2, noise=0.3)
    beams = random_beams(ch, np.random.default_rng(seed))
    got = np.array([r.sinr for r in dam_sinr(ch, beams)])
    np.testing.assert_allclose(got, scalar_sinr(ch, beams), rtol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_power_accounting(seed):
    ch = random_channel(seed, Mt=4, K=3, L=2, delay_range=(0, 6))
    beams = random_beams(ch, np.random.default_rng(seed + 1))
    # total received power from the impulse response of every stream
    N = 40
    for k, r in enumerate(dam_sinr(ch, beams)):
        total = 0.0
        for kp in range(ch.num_users):
            s = np.zeros((ch.num_users, N))
            s[kp, 0] = 1.0
            y = received_waveform(ch, transmit_waveform(beams, s, N))
            total += np.sum(np.abs(y[k]) ** 2)
        np.testing.assert_allclose(r.desired_power + r.isi_power + r.iui_power, total, rtol=1e-9)


def test_shape_mismatch_rejected():
    ch = random_channel(0)
    beams = PathBeamformerSet([np.zeros((1, 8))] * 2, delay_plan(ch))
    with pytest.raises(ContractViolation):
        dam_sinr(ch, beams)


def test_qam_unit_energy(rng):
    for order in (4, 16, 64):
        s = qam_symbols(rng, order, 200_000)
        assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, rel=0.01)
        assert len(np.unique(np.round(s, 9))) == order
    with pytest.raises(ValueError):
        qam_symbols(rng, 8, 3)


def test_transmit_single_tap(rng):
    ch = channel_from_paths([[[1.0, 2.0]]], [[0]])
    f = np.array([[0.5j, 1.0]])
    s = qam_symbols(rng, 4, (1, 50))
    x = transmit_waveform(PathBeamformerSet([f], delay_plan(ch)), s, 50)
    np.testing.assert_allclose(x, np.outer(f[0], s[0]))


def test_transmit_support(rng):
    ch = channel_from_paths([[[1.0], [1.0]]], [[3, 0]])  # kappa = (0, 3)
    beams = PathBeamformerSet([np.array([[1.0], [10.0]])], delay_plan(ch))
    s = np.zeros((1, 20))
    s[0, 5] = 1.0
    x = transmit_waveform(beams, s, 20)[0]
    assert set(np.nonzero(x)[0]) == {5, 8}
    assert x[5] == 1.0 and x[8] == 10.0


def test_transmit_average_power(rng):
    ch = random_channel(4, K=2, L=3)
    beams = random_beams(ch, rng)
    s = qam_symbols(rng, 4, (2, 100_000))
    x = transmit_waveform(beams, s, 100_000)[:, 20:]
    emp = np.mean(np.sum(np.abs(x) ** 2, axis=0))
    assert emp == pytest.approx(beams.total_power, rel=0.02)


def test_receive_zero_and_single_path(rng):
    ch = channel_from_paths([[[1.0, 1j]]], [[3]])
    assert np.all(received_waveform(ch, np.zeros((2, 10))) == 0)
    x = crandn(rng, 2, 10)
    y = received_waveform(ch, x)[0]
    np.testing.assert_allclose(y[3:], np.array([1.0, 1j]).conj() @ x[:, :7])
    assert np.all(y[:3] == 0)
    with pytest.raises(ValueError):
        received_waveform(ch, x, noise=True)


def run_waveform(ch, beams, rng, n=100_000, noise=False):
    s = qam_symbols(rng, 4, (ch.num_users, n))
    y = received_waveform(ch, transmit_waveform(beams, s, n), noise=noise, rng=rng)
    return empirical_sinr(y, s, ch, beams, ch.noise_power if noise else 0.0)


def test_waveform_matches_analytic_mrt(rng):
    ch = random_channel(8, Mt=6, K=2, L=3, noise=0.05)
    beams = mrt_per_path(ch, 1.0)
    for a, e in zip(dam_sinr(ch, beams), run_waveform(ch, beams, rng)):
        assert e.desired_power == pytest.approx(a.desired_power, rel=0.02)
        ratio_a = a.interference_power / a.desired_power
        ratio_e = e.interference_power / e.desired_power
        assert ratio_e == pytest.approx(ratio_a, rel=0.05)
        sinr_e = e.desired_power / (e.interference_power + ch.noise_power)
        assert sinr_e == pytest.approx(a.sinr, rel=0.05)


def test_waveform_zf_floor(rng):
    ch = random_channel(9, Mt=8, K=2, L=2)
    beams = zf_per_path(ch, 1.0).beams
    for e in run_waveform(ch, beams, rng, n=20_000):
        assert e.interference_power <= 1e-16 * e.desired_power


def test_waveform_single_path_snr(rng):
    h = np.array([0.3 + 0.1j, -0.2, 0.4j])
    ch = channel_from_paths([[h]], [[2]], noise_power=0.02)
    beams = PathBeamformerSet([h[None] / np.linalg.norm(h)], delay_plan(ch))
    (e,) = run_waveform(ch, beams, rng, noise=True)
    snr = np.linalg.norm(h) ** 2 / 0.02
    assert e.desired_power / ch.noise_power == pytest.approx(snr, rel=0.03)


def test_estimator_needs_samples():
    with pytest.raises(EstimationError):
        estimate_sinr(np.zeros((1, 100)), np.zeros((1, 100)), [0], [[0]], 0)
    assert MIN_EMPIRICAL_SAMPLES == 10_000
