"""Multi-user single-carrier delay alignment modulation.

The transmitter delays the copy of each user's stream sent along path l
by kappa_kl = n_k,max - n_kl, so that every path delivers the same
symbol at the receiver at lag n_k,max.  What is left over (ISI from the
user's own other symbols, IUI from other users) is captured exactly by
the effective-channel bank: for every user pair and every delay
difference i, a stacked vector selecting the path of user k whose delay
exceeds path l' of user k' by exactly i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, stack_user_channel
from .exceptions import ContractViolation, EstimationError

__all__ = [
    "DelayPlan",
    "PathBeamformerSet",
    "EffectiveChannelBank",
    "SinrReport",
    "EmpiricalSinr",
    "delay_plan",
    "effective_channel_bank",
    "dam_sinr",
    "sum_rate",
    "transmit_waveform",
    "received_waveform",
    "estimate_sinr",
    "empirical_sinr",
    "qam_symbols",
]


@dataclass(frozen=True)
class DelayPlan:
    kappa: tuple[np.ndarray, ...]
    max_delay: np.ndarray

    @property
    def max_kappa(self) -> int:
        return int(max(k.max() for k in self.kappa))


@dataclass
class PathBeamformerSet:
    """Per-path beams; ``beams[k]`` has shape (L_k, M_t) with row l = f_kl."""

    beams: list[np.ndarray]
    plan: DelayPlan

    def stacked(self, k: int) -> np.ndarray:
        return self.beams[k].reshape(-1)

    @property
    def total_power(self) -> float:
        return float(sum(np.sum(np.abs(b) ** 2) for b in self.beams))

    def user_powers(self) -> np.ndarray:
        return np.array([np.sum(np.abs(b) ** 2) for b in self.beams])


@dataclass
class SinrReport:
    desired_power: float
    isi_power: float
    iui_power: float
    noise_power: float

    @property
    def interference_power(self) -> float:
        return self.isi_power + self.iui_power

    @property
    def sinr(self) -> float:
        return self.desired_power / (self.isi_power + self.iui_power + self.noise_power)

    @property
    def rate(self) -> float:
        return float(np.log2(1.0 + self.sinr))


@dataclass
class EmpiricalSinr(SinrReport):
    num_samples: int = 0


@dataclass
class EffectiveChannelBank:
    """``matrices[k][kp]`` is G_{k,kp}; column j holds delay difference ``offsets[k][kp] + j``."""

    matrices: list[list[np.ndarray]]
    offsets: np.ndarray  # Delta_{k,kp,min}

    def column_of(self, k: int, kp: int, i: int) -> int:
        j = i - int(self.offsets[k, kp])
        if not 0 <= j < self.matrices[k][kp].shape[1]:
            raise IndexError(f"delay difference {i} outside the range for pair ({k}, {kp})")
        return j

    def zero_column(self, k: int) -> int:
        """Index of the i=0 column of G_kk, which carries the desired signal."""
        return self.column_of(k, k, 0)

    def isi_matrix(self, k: int) -> np.ndarray:
        G = self.matrices[k][k]
        return np.delete(G, self.zero_column(k), axis=1)

    def interference_matrix(self, k: int, kp: int, drop_empty: bool = False) -> np.ndarray:
        """G_{k,kp} with the desired column removed when kp == k."""
        G = self.isi_matrix(k) if k == kp else self.matrices[k][kp]
        if drop_empty:
            G = G[:, np.any(G != 0, axis=0)]
        return G


def delay_plan(ch: ChannelSet) -> DelayPlan:
    nmax = ch.max_delays
    return DelayPlan(tuple(int(nmax[k]) - d for k, d in enumerate(ch.delays)), nmax)


def effective_channel_bank(ch: ChannelSet) -> EffectiveChannelBank:
    K, Mt = ch.num_users, ch.num_antennas
    nmax, nmin = ch.max_delays, ch.min_delays
    offsets = nmin[:, None] - nmax[None, :]
    matrices: list[list[np.ndarray]] = []
    for k in range(K):
        row = []
        for kp in range(K):
            width = int(nmax[k] - nmin[kp] - offsets[k, kp]) + 1
            Lp = ch.paths_per_user[kp]
            G = np.zeros((Mt * Lp, width), dtype=complex)
            diff = ch.delays[k][:, None] - ch.delays[kp][None, :]  # (L_k, L_kp)
            for l in range(ch.paths_per_user[k]):
                for lp in range(Lp):
                    G[lp * Mt:(lp + 1) * Mt, diff[l, lp] - offsets[k, kp]] = ch.gains[k][l]
            row.append(G)
        matrices.append(row)
    return EffectiveChannelBank(matrices, offsets)


def _check_beams(ch: ChannelSet, beams: PathBeamformerSet):
    if len(beams.beams) != ch.num_users:
        raise ContractViolation(f"{len(beams.beams)} users in beams, {ch.num_users} in channel")
    for k, b in enumerate(beams.beams):
        if b.shape != ch.gains[k].shape:
            raise ContractViolation(f"user {k}: beam shape {b.shape}, channel shape {ch.gains[k].shape}")


def dam_sinr(
    ch: ChannelSet, beams: PathBeamformerSet, bank: EffectiveChannelBank | None = None
) -> list[SinrReport]:
    """Per-user SINR with single-tap detection at lag n_k,max."""
    _check_beams(ch, beams)
    if bank is None:
        bank = effective_channel_bank(ch)
    K = ch.num_users
    fbar = [beams.stacked(k) for k in range(K)]
    reports = []
    for k in range(K):
        desired = abs(np.vdot(stack_user_channel(ch, k), fbar[k])) ** 2
        isi = float(np.sum(np.abs(bank.isi_matrix(k).conj().T @ fbar[k]) ** 2))
        iui = sum(
            float(np.sum(np.abs(bank.matrices[k][kp].conj().T @ fbar[kp]) ** 2))
            for kp in range(K)
            if kp != k
        )
        reports.append(SinrReport(float(desired), isi, iui, ch.noise_power))
    return reports


def sum_rate(reports) -> float:
    return float(sum(r.rate for r in reports))


def qam_symbols(rng: np.random.Generator, order: int, shape) -> np.ndarray:
    """Uniform i.i.d. square-QAM symbols with unit average energy."""
    side = int(round(np.sqrt(order)))
    if side * side != order or side < 2:
        raise ValueError(f"QAM order {order} is not a square >= 4")
    levels = 2 * np.arange(side) - (side - 1)
    scale = np.sqrt(2.0 * (order - 1) / 3.0)
    re = levels[rng.integers(0, side, size=shape)]
    im = levels[rng.integers(0, side, size=shape)]
    return (re + 1j * im) / scale


def transmit_waveform(beams: PathBeamformerSet, symbols: np.ndarray, horizon: int) -> np.ndarray:
    """x[n] = sum_k sum_l f_kl s_k[n - kappa_kl] for 0 <= n < horizon; returns (M_t, N)."""
    symbols = np.asarray(symbols)
    if symbols.shape[1] < horizon:
        raise ContractViolation("symbol sequences shorter than the horizon")
    Mt = beams.beams[0].shape[1]
    x = np.zeros((Mt, horizon), dtype=complex)
    for k, fk in enumerate(beams.beams):
        for l, kap in enumerate(beams.plan.kappa[k]):
            kap = int(kap)
            if kap < horizon:
                x[:, kap:] += np.outer(fk[l], symbols[k, : horizon - kap])
    return x


def received_waveform(
    ch: ChannelSet,
    x: np.ndarray,
    noise: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """y_k[n] = sum_l h_kl^H x[n - n_kl] (+ CN(0, sigma^2) noise); returns (K, N)."""
    N = x.shape[1]
    y = np.zeros((ch.num_users, N), dtype=complex)
    for k in range(ch.num_users):
        for h, d in zip(ch.gains[k], ch.delays[k]):
            d = int(d)
            if d < N:
                y[k, d:] += h.conj() @ x[:, : N - d]
    if noise:
        if rng is None:
            raise ValueError("noise injection needs an explicit rng")
        y += np.sqrt(ch.noise_power / 2) * (
            rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        )
    return y


MIN_EMPIRICAL_SAMPLES = 10_000


def estimate_sinr(
    y: np.ndarray,
    symbols: np.ndarray,
    desired_lags,
    own_lags,
    transient: int,
    noise_power: float = 0.0,
    other_lags=None,
) -> list[EmpiricalSinr]:
    """Split received power into desired / own-stream / other-stream parts.

    y_k is regressed jointly on s_k[n - desired_lags[k]], on the user's
    own symbols at every lag in ``own_lags[k]`` and, when given, on the
    symbols of user kp at every lag in ``other_lags[k][kp]``.  The
    coefficients give the desired, ISI and IUI powers (symbols have unit
    energy).  Residual power, less the known noise power, is added to the
    IUI.  With every lag listed and noise off the split is exact up to
    the least-squares conditioning.
    """
    K, N = y.shape
    n = np.arange(transient, N)
    if n.size < MIN_EMPIRICAL_SAMPLES:
        raise EstimationError(f"{n.size} usable samples, need at least {MIN_EMPIRICAL_SAMPLES}")
    out = []
    for k in range(K):
        yk = y[k, n]
        d0 = int(desired_lags[k])
        cols = [(k, d0)] + [(k, lag) for lag in sorted({int(x) for x in own_lags[k]} - {d0})]
        n_own = len(cols)
        if other_lags is not None:
            for kp, lags in sorted(other_lags[k].items()):
                if kp != k:
                    cols += [(kp, int(lag)) for lag in sorted(set(int(x) for x in lags))]
        S = np.stack([symbols[kp][n - lag] for kp, lag in cols], axis=1)
        c, *_ = np.linalg.lstsq(S, yk, rcond=None)
        resid = yk - S @ c
        power = np.abs(c) ** 2
        rest = max(float(np.mean(np.abs(resid) ** 2)) - noise_power, 0.0)
        out.append(
            EmpiricalSinr(
                float(power[0]), float(power[1:n_own].sum()), float(power[n_own:].sum()) + rest,
                noise_power, num_samples=int(n.size),
            )
        )
    return out


def empirical_sinr(
    y: np.ndarray,
    symbols: np.ndarray,
    ch: ChannelSet,
    beams: PathBeamformerSet,
    noise_power: float = 0.0,
) -> list[EmpiricalSinr]:
    """Monte-Carlo SINR of a DAM waveform run; see :func:`estimate_sinr`.

    Symbols before n=0 are zero, so the first n_max + max(kappa) samples
    are dropped as transient.
    """
    plan = beams.plan
    nmax = ch.max_delays
    K = ch.num_users
    # stream kp reaches user k at lags n_kl + kappa_{kp,l'}
    lags = [
        {kp: np.unique(np.add.outer(ch.delays[k], plan.kappa[kp]).ravel()) for kp in range(K)}
        for k in range(K)
    ]
    transient = ch.n_max + plan.max_kappa
    return estimate_sinr(y, symbols, nmax, [lags[k][k] for k in range(K)], transient, noise_power, lags)
