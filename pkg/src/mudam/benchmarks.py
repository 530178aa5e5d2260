"""Benchmark schemes: strongest-path single-carrier and OFDM.

The strongest-path scheme sends one beam per user aimed at that user's
strongest path (row 0 of its gains) with no delay pre-compensation; the
other paths turn into ISI.  OFDM beamforms each sub-carrier separately
and only suffers inter-user interference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import channel_matrix, rzf_directions, zf_directions
from .channel import ChannelSet, OfdmChannel, path_matrix
from .conic import SolverSettings, maximize_log_power, sca_drive, water_fill
from .dam import EmpiricalSinr, SinrReport, estimate_sinr
from .exceptions import ConfigurationError, ContractViolation, ZeroForcingInfeasible

__all__ = [
    "SpBeamformerSet",
    "OfdmBeamformerSet",
    "SchemeResult",
    "OfdmSinrReport",
    "sp_sinr",
    "sp_mrt",
    "sp_zf",
    "sp_rzf",
    "sp_rzf_sum_rate",
    "sp_transmit_waveform",
    "sp_empirical_sinr",
    "ofdm_sinr",
    "ofdm_mrt",
    "ofdm_zf",
    "ofdm_rzf",
    "ofdm_rzf_sum_rate",
]


@dataclass
class SpBeamformerSet:
    """``vectors[k]`` is f_k, shape (K, M_t)."""

    vectors: np.ndarray

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))


@dataclass
class OfdmBeamformerSet:
    """``vectors[k, m]`` is d_{k,m}, shape (K, M, M_t)."""

    vectors: np.ndarray

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))


@dataclass
class SchemeResult:
    beams: object
    rates: np.ndarray
    trace: list[float] | None = None

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.rates))


@dataclass
class OfdmSinrReport:
    """Per (user, sub-carrier) powers, arrays of shape (K, M)."""

    desired_power: np.ndarray
    iui_power: np.ndarray
    noise_power: float

    @property
    def sinr(self) -> np.ndarray:
        return self.desired_power / (self.iui_power + self.noise_power)

    @property
    def rates(self) -> np.ndarray:
        """Per-user rate (1/M) sum_m log2(1 + gamma_{k,m})."""
        return np.mean(np.log2(1.0 + self.sinr), axis=1)


# --- strongest path -------------------------------------------------------


def sp_sinr(ch: ChannelSet, beams: SpBeamformerSet) -> list[SinrReport]:
    F = np.asarray(beams.vectors)
    if F.shape != (ch.num_users, ch.num_antennas):
        raise ContractViolation(f"beam array shape {F.shape}, expected {(ch.num_users, ch.num_antennas)}")
    out = []
    for k in range(ch.num_users):
        resp = np.abs(ch.gains[k].conj() @ F.T) ** 2  # (L_k, K): |h_kl^H f_k'|^2
        desired = resp[0, k]
        isi = resp[1:, k].sum()
        iui = resp.sum() - resp[:, k].sum()
        out.append(SinrReport(float(desired), float(isi), float(iui), ch.noise_power))
    return out


def _check_power(P):
    if not P > 0:
        raise ConfigurationError("P must be positive")


def sp_mrt(ch: ChannelSet, P: float) -> SchemeResult:
    """f_k = sqrt(P) h_k1 / ||H_bar||_F over the strongest paths only."""
    _check_power(P)
    Hs = path_matrix(ch, strongest_only=True)
    F = np.sqrt(P) * Hs.T / np.linalg.norm(Hs)
    beams = SpBeamformerSet(F)
    return SchemeResult(beams, np.array([r.rate for r in sp_sinr(ch, beams)]))


def sp_zf(ch: ChannelSet, P: float) -> SchemeResult:
    """Strongest-path ZF: nulls every other path of every user.

    The beam of user k is the pseudo-inverse column of its strongest
    path, so the receive amplitude is sqrt(v_k) and the SNR is
    v_k / sigma^2 at transmit power v_k ||w_k1||^2.
    """
    _check_power(P)
    W = zf_directions(channel_matrix(ch))
    cols = W[:, ch.path_offsets()[:-1]]  # (M_t, K)
    wn2 = np.sum(np.abs(cols) ** 2, axis=0)
    tx = water_fill(wn2 * ch.noise_power, P)
    v = tx / wn2
    beams = SpBeamformerSet((np.sqrt(v) * cols).T)
    return SchemeResult(beams, np.log2(1.0 + v / ch.noise_power))


def _sp_rzf_gains(ch: ChannelSet, P: float):
    """b[k, kp, l] = |h_kl^H e_kp| ^2 for the unit RZF directions e_kp."""
    eps = ch.total_paths * ch.noise_power / P
    E = rzf_directions(channel_matrix(ch), eps)[:, ch.path_offsets()[:-1]]  # (M_t, K)
    K = ch.num_users
    Lmax = max(ch.paths_per_user)
    b = np.zeros((K, K, Lmax))
    for k in range(K):
        b[k, :, : ch.paths_per_user[k]] = (np.abs(ch.gains[k].conj() @ E) ** 2).T
    return E, b


def _sp_terms(b: np.ndarray):
    """Total-received and interference gain matrices, rows = users."""
    K = b.shape[0]
    total = b.sum(axis=2)  # (K, K'): all paths of user k from beam k'
    interf = total.copy()
    interf[np.arange(K), np.arange(K)] -= b[np.arange(K), np.arange(K), 0]
    return total, interf


def sp_rzf_sum_rate(ch: ChannelSet, P: float, powers, phases=None) -> float:
    """Sum rate of SP-RZF for given per-user powers (phases have no effect)."""
    E, _ = _sp_rzf_gains(ch, P)
    p = np.asarray(powers, dtype=float)
    ph = np.zeros(ch.num_users) if phases is None else np.asarray(phases, dtype=float)
    F = (np.sqrt(p) * np.exp(1j * ph) * E).T
    return float(sum(r.rate for r in sp_sinr(ch, SpBeamformerSet(F))))


def _log_ratio_sca(total, interf, noise, budget, p0, settings, blocks=1):
    """Power-only SCA shared by SP-RZF and OFDM-RZF.

    ``total`` and ``interf`` have shape (B, K, K): per block, the gain
    from each user's power to each user's total / interference power.
    Maximizes sum log2(total p + noise) - log2(interf p + noise) under a
    shared budget; the second term is linearized at each iterate.
    """
    B, K, _ = total.shape
    A1 = total / noise
    A2 = interf / noise

    def objective(p):
        z1 = np.einsum("bjk,bk->bj", A1, p) + 1.0
        z2 = np.einsum("bjk,bk->bj", A2, p) + 1.0
        return float(np.sum(np.log2(z1) - np.log2(z2)))

    def step(p):
        z2 = np.einsum("bjk,bk->bj", A2, p) + 1.0
        cost = np.einsum("bjk,bj->bk", A2, 1.0 / z2)
        # Work in budget-normalized units to keep the barrier well scaled.
        new = maximize_log_power(A1 * budget, 1.0, cost * budget, 1.0, start=p / budget)
        return new * budget

    return sca_drive(step, objective, p0, settings, feasible=lambda p: bool(np.all(p >= 0)))


def sp_rzf(ch: ChannelSet, P: float, settings: SolverSettings | None = None) -> SchemeResult:
    """Strongest-path RZF with SCA power control; phases fixed to zero."""
    _check_power(P)
    settings = settings or SolverSettings()
    E, b = _sp_rzf_gains(ch, P)
    total, interf = _sp_terms(b)
    K = ch.num_users
    p0 = np.full((1, K), P / K)
    res = _log_ratio_sca(total[None], interf[None], ch.noise_power, P, p0, settings)
    p = res.point[0]
    beams = SpBeamformerSet((np.sqrt(p) * E).T)
    return SchemeResult(beams, np.array([r.rate for r in sp_sinr(ch, beams)]), res.trace)


def sp_transmit_waveform(beams: SpBeamformerSet, symbols: np.ndarray, horizon: int) -> np.ndarray:
    """x[n] = sum_k f_k s_k[n]; returns (M_t, N)."""
    return np.asarray(beams.vectors).T @ np.asarray(symbols)[:, :horizon]


def sp_empirical_sinr(
    y: np.ndarray, symbols: np.ndarray, ch: ChannelSet, noise_power: float = 0.0
) -> list[EmpiricalSinr]:
    """Waveform SINR of the strongest-path scheme; the desired lag is n_k1."""
    desired = np.array([d[0] for d in ch.delays])
    others = [{kp: d for kp in range(ch.num_users)} for d in ch.delays]
    return estimate_sinr(y, symbols, desired, ch.delays, ch.n_max, noise_power, others)


# --- OFDM -----------------------------------------------------------------


def ofdm_sinr(ofdm: OfdmChannel, beams: OfdmBeamformerSet) -> OfdmSinrReport:
    D = np.asarray(beams.vectors)
    if D.shape != ofdm.vectors.shape:
        raise ContractViolation(f"beam array shape {D.shape}, expected {ofdm.vectors.shape}")
    # resp[k, kp, m] = |h_{k,m}^H d_{kp,m}|^2
    resp = np.abs(np.einsum("kma,jma->kjm", ofdm.vectors.conj(), D)) ** 2
    K = ofdm.num_users
    desired = resp[np.arange(K), np.arange(K)]
    iui = resp.sum(axis=1) - desired
    return OfdmSinrReport(desired, iui, ofdm.subcarrier_noise_power)


def ofdm_mrt(ofdm: OfdmChannel, P: float) -> SchemeResult:
    """d_{k,m} = sqrt(M P) h_{k,m} / ||H_hat||_F, total power exactly M P."""
    _check_power(P)
    M = ofdm.num_subcarriers
    D = np.sqrt(M * P) * ofdm.vectors / np.linalg.norm(ofdm.vectors)
    beams = OfdmBeamformerSet(D)
    return SchemeResult(beams, ofdm_sinr(ofdm, beams).rates)


def ofdm_zf(ofdm: OfdmChannel, P: float) -> SchemeResult:
    """Per-sub-carrier ZF, water-filled jointly over all (k, m) with budget M P."""
    _check_power(P)
    K, M, Mt = ofdm.vectors.shape
    if Mt < K:
        raise ZeroForcingInfeasible(f"OFDM ZF needs at least {K} antennas, have {Mt}")
    Hm = np.transpose(ofdm.vectors, (1, 2, 0))  # (M, M_t, K)
    s = np.linalg.svd(Hm, compute_uv=False)
    if np.any(s[:, -1] <= 1e-10 * s[:, 0]):
        raise ZeroForcingInfeasible("a sub-carrier channel is rank deficient")
    W = np.linalg.pinv(np.conj(np.transpose(Hm, (0, 2, 1))))  # (M, M_t, K)
    wn2 = np.sum(np.abs(W) ** 2, axis=1).T  # (K, M)
    tx = water_fill((wn2 * ofdm.subcarrier_noise_power).ravel(), M * P).reshape(K, M)
    v = tx / wn2
    D = np.sqrt(v)[:, :, None] * np.transpose(W, (2, 0, 1))
    beams = OfdmBeamformerSet(D)
    rates = np.mean(np.log2(1.0 + v / ofdm.subcarrier_noise_power), axis=1)
    return SchemeResult(beams, rates)


def _ofdm_rzf_gains(ofdm: OfdmChannel, P: float):
    K, M, Mt = ofdm.vectors.shape
    eps = K * ofdm.subcarrier_noise_power / P
    Hm = np.transpose(ofdm.vectors, (1, 2, 0))  # (M, M_t, K)
    gram = np.conj(np.transpose(Hm, (0, 2, 1))) @ Hm
    E = Hm @ np.linalg.inv(gram + eps * np.eye(K))
    E = E / np.linalg.norm(E, axis=1, keepdims=True)  # (M, M_t, K) unit columns
    a = np.abs(np.conj(np.transpose(Hm, (0, 2, 1))) @ E) ** 2  # a[m, k, kp]
    return E, a


def ofdm_rzf_sum_rate(ofdm: OfdmChannel, P: float, powers, phases=None) -> float:
    """(1/M) sum_k sum_m log2(1 + SINR) of OFDM-RZF for powers of shape (K, M)."""
    E, _ = _ofdm_rzf_gains(ofdm, P)
    p = np.asarray(powers, dtype=float)
    ph = np.zeros_like(p) if phases is None else np.asarray(phases, dtype=float)
    D = (np.sqrt(p) * np.exp(1j * ph))[:, :, None] * np.transpose(E, (2, 0, 1))
    return float(np.sum(ofdm_sinr(ofdm, OfdmBeamformerSet(D)).rates))


def ofdm_rzf(ofdm: OfdmChannel, P: float, settings: SolverSettings | None = None) -> SchemeResult:
    """Sub-carrier RZF with SCA power control over all (k, m), budget M P."""
    _check_power(P)
    settings = settings or SolverSettings()
    K, M, _ = ofdm.vectors.shape
    E, a = _ofdm_rzf_gains(ofdm, P)
    interf = a.copy()
    interf[:, np.arange(K), np.arange(K)] = 0.0
    p0 = np.full((M, K), P / K)
    res = _log_ratio_sca(a, interf, ofdm.subcarrier_noise_power, M * P, p0, settings)
    p = res.point.T  # (K, M)
    D = np.sqrt(p)[:, :, None] * np.transpose(E, (2, 0, 1))
    beams = OfdmBeamformerSet(D)
    trace = [t / M for t in res.trace]
    return SchemeResult(beams, ofdm_sinr(ofdm, beams).rates, trace)
