"""Per-path DAM beamformers: MRT, ZF with water-filling, and RZF with SCA.

All three assign one beam f_kl to every resolvable path.  MRT points
each beam along its own path; ZF takes the columns of the right
pseudo-inverse of the path matrix so that every beam is orthogonal to
every other path; RZF regularizes that pseudo-inverse and then tunes the
per-path complex amplitudes by successive convex approximation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .channel import ChannelSet, path_matrix
from .conic import SolverSettings, ScaResult, sca_drive, water_fill
from .dam import (
    EffectiveChannelBank,
    PathBeamformerSet,
    SinrReport,
    dam_sinr,
    delay_plan,
    effective_channel_bank,
)
from .exceptions import ConfigurationError, ZeroForcingInfeasible

__all__ = [
    "channel_matrix",
    "mrt_asymptotic",
    "mrt_per_path",
    "mrt_closed_form_sinr",
    "zf_directions",
    "zf_per_path",
    "ZfResult",
    "RzfAmplitudes",
    "RzfResult",
    "rzf_directions",
    "rzf_amplitude_model",
    "rzf_per_path",
]

RANK_TOLERANCE = 1e-10


def channel_matrix(ch: ChannelSet) -> np.ndarray:
    """M_t x L_tot path matrix H in user-then-path order."""
    return path_matrix(ch)


def _split(ch: ChannelSet, cols: np.ndarray) -> list[np.ndarray]:
    """Cut an (M_t, L_tot) matrix into per-user (L_k, M_t) beam blocks."""
    off = ch.path_offsets()
    return [cols[:, off[k]:off[k + 1]].T.copy() for k in range(ch.num_users)]


def mrt_asymptotic(ch: ChannelSet, P: float, per_user_power=None) -> PathBeamformerSet:
    """f_kl = xi_k sqrt(p_k) h_kl with xi_k = 1 / ||h_bar_k||.

    Without ``per_user_power`` the p_k come from water-filling over the
    interference-free SNRs p_k ||h_bar_k||^2 / sigma^2.
    """
    if not P > 0:
        raise ConfigurationError("P must be positive")
    norms2 = np.array([np.sum(np.abs(g) ** 2) for g in ch.gains])
    if per_user_power is None:
        p = water_fill(ch.noise_power / norms2, P)
    else:
        p = np.asarray(per_user_power, dtype=float)
        if p.shape != (ch.num_users,) or np.any(p < 0):
            raise ConfigurationError("per_user_power needs one non-negative entry per user")
        if p.sum() > P * (1 + 1e-12):
            raise ConfigurationError(f"per-user powers sum to {p.sum():.6g} > budget {P:.6g}")
    beams = [np.sqrt(p[k] / norms2[k]) * g for k, g in enumerate(ch.gains)]
    return PathBeamformerSet(beams, delay_plan(ch))


def mrt_per_path(ch: ChannelSet, P: float) -> PathBeamformerSet:
    """f_kl = sqrt(P) h_kl / ||H||_F, so the total power is exactly P."""
    if not P > 0:
        raise ConfigurationError("P must be positive")
    fro = np.sqrt(sum(np.sum(np.abs(g) ** 2) for g in ch.gains))
    return PathBeamformerSet([np.sqrt(P) / fro * g for g in ch.gains], delay_plan(ch))


def mrt_closed_form_sinr(ch: ChannelSet, P: float) -> np.ndarray:
    """SINR of per-path MRT written directly in terms of path inner products.

    Independent of the effective-channel bank: every pair of paths is
    grouped by its delay difference and the Gram entries are summed.
    """
    K = ch.num_users
    fro2 = sum(np.sum(np.abs(g) ** 2) for g in ch.gains)
    out = np.empty(K)
    for k in range(K):
        desired = np.sum(np.abs(ch.gains[k]) ** 2) ** 2
        interf = 0.0
        for kp in range(K):
            gram = ch.gains[k].conj() @ ch.gains[kp].T  # h_kl^H h_kp,l'
            diff = ch.delays[k][:, None] - ch.delays[kp][None, :]
            acc: dict[int, complex] = {}
            for (l, lp), i in np.ndenumerate(diff):
                acc[int(i)] = acc.get(int(i), 0.0) + gram[l, lp]
            for i, v in acc.items():
                if kp == k and i == 0:
                    continue
                interf += abs(v) ** 2
        out[k] = P * desired / (P * interf + ch.noise_power * fro2)
    return out


def zf_directions(H: np.ndarray) -> np.ndarray:
    """Right pseudo-inverse W = H (H^H H)^{-1}, so that H^H W = I."""
    Mt, n = H.shape
    if Mt < n:
        raise ZeroForcingInfeasible(f"ZF needs at least {n} antennas, have {Mt}")
    s = np.linalg.svd(H, compute_uv=False)
    if s[-1] <= RANK_TOLERANCE * s[0]:
        raise ZeroForcingInfeasible("path matrix is rank deficient")
    return np.linalg.pinv(H.conj().T)


@dataclass
class ZfResult:
    beams: PathBeamformerSet
    rates: np.ndarray
    user_powers: np.ndarray
    directions: np.ndarray

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())


def zf_per_path(ch: ChannelSet, P: float) -> ZfResult:
    """Per-path ZF with the optimal power split.

    With f_kl = sqrt(v_kl) w_kl the user-k receive amplitude is
    sum_l sqrt(v_kl); for a user budget P_k it peaks at P_k ||q_k||^2
    with q_kl = 1 / ||w_kl||, and the P_k are water-filled over
    sigma^2 / ||q_k||^2.
    """
    if not P > 0:
        raise ConfigurationError("P must be positive")
    W = zf_directions(channel_matrix(ch))
    blocks = _split(ch, W)
    q = [1.0 / np.linalg.norm(b, axis=1) for b in blocks]
    q2 = np.array([np.sum(qk**2) for qk in q])
    Pk = water_fill(ch.noise_power / q2, P)
    beams = []
    for k, b in enumerate(blocks):
        t = np.sqrt(Pk[k]) * q[k] / np.sqrt(q2[k])
        beams.append((t * q[k])[:, None] * b)  # sqrt(v_kl) = t_kl / ||w_kl||
    rates = np.log2(1.0 + Pk * q2 / ch.noise_power)
    return ZfResult(PathBeamformerSet(beams, delay_plan(ch)), rates, Pk, W)


def rzf_directions(H: np.ndarray, eps: float) -> np.ndarray:
    """Normalized columns of H (H^H H + eps I)^{-1}."""
    n = H.shape[1]
    F = H @ np.linalg.inv(H.conj().T @ H + eps * np.eye(n))
    return F / np.linalg.norm(F, axis=0)


@dataclass
class RzfAmplitudes:
    """Per-path amplitude model: f_kl = c_kl e_kl.

    ``desired[k][l] = h_kl^H e_kl``; ``cross[k][kp]`` maps c_kp to the
    leakage taps seen by user k, with the desired tap removed for kp == k.
    """

    directions: list[np.ndarray]  # (L_k, M_t) unit-norm rows
    desired: list[np.ndarray]
    cross: list[list[np.ndarray]]
    noise_power: float

    def sinr(self, amps: list[np.ndarray]) -> np.ndarray:
        K = len(amps)
        out = np.empty(K)
        for k in range(K):
            sig = abs(self.desired[k] @ amps[k]) ** 2
            intf = sum(float(np.sum(np.abs(self.cross[k][kp] @ amps[kp]) ** 2)) for kp in range(K))
            out[k] = sig / (intf + self.noise_power)
        return out

    def sum_rate(self, amps) -> float:
        return float(np.sum(np.log2(1.0 + self.sinr(amps))))

    def beams(self, amps, plan) -> PathBeamformerSet:
        return PathBeamformerSet([a[:, None] * e for a, e in zip(amps, self.directions)], plan)


def rzf_amplitude_model(
    ch: ChannelSet, P: float, bank: EffectiveChannelBank | None = None
) -> RzfAmplitudes:
    eps = ch.total_paths * ch.noise_power / P
    E = _split(ch, rzf_directions(channel_matrix(ch), eps))
    bank = bank if bank is not None else effective_channel_bank(ch)
    Mt = ch.num_antennas
    K = ch.num_users
    desired = [np.einsum("lm,lm->l", ch.gains[k].conj(), E[k]) for k in range(K)]
    cross = []
    for k in range(K):
        row = []
        for kp in range(K):
            G = bank.interference_matrix(k, kp, drop_empty=True)
            Lp = ch.paths_per_user[kp]
            blocks = G.reshape(Lp, Mt, -1)
            row.append(np.einsum("lmi,lm->il", blocks.conj(), E[kp]))
        cross.append(row)
    return RzfAmplitudes(E, desired, cross, ch.noise_power)


@dataclass
class RzfResult:
    beams: PathBeamformerSet
    amplitudes: list[np.ndarray]
    trace: list[float]
    reports: list[SinrReport]
    converged: bool

    @property
    def rates(self) -> np.ndarray:
        return np.array([r.rate for r in self.reports])

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())


class _RzfSurrogate:
    """Convex surrogate in the slack form: log(1 + g_k) subject to
    interference + 1 <= linearized |u_k^T c_k|^2 / g_k, all in units
    where the noise power is 1 and the budget is 1."""

    def __init__(self, model: RzfAmplitudes, P: float, settings: SolverSettings):
        self.settings = settings
        K = len(model.desired)
        s = np.sqrt(P / model.noise_power)
        self.scale = np.sqrt(P)
        self.c = [cp.Variable(u.size, complex=True) for u in model.desired]
        self.g = cp.Variable(K, nonneg=True)
        self.lin = [cp.Parameter(u.size, complex=True) for u in model.desired]
        self.quad = cp.Parameter(K, nonneg=True)
        cons = [sum(cp.sum_squares(c) for c in self.c) <= 1]
        for k in range(K):
            parts = [cp.sum_squares((model.cross[k][kp] * s) @ self.c[kp]) for kp in range(K) if model.cross[k][kp].size]
            lhs = sum(parts) + 1 if parts else 1
            rhs = cp.real(self.lin[k] @ self.c[k]) - self.quad[k] * self.g[k]
            cons.append(lhs <= rhs)
        self.u = [u * s for u in model.desired]
        self.problem = cp.Problem(cp.Maximize(cp.sum(cp.log1p(self.g))), cons)

    def __call__(self, amps, gamma):
        for k, u in enumerate(self.u):
            z = u @ (amps[k] / self.scale)
            self.lin[k].value = 2.0 * np.conj(z) * u / gamma[k]
        self.quad.value = np.array(
            [abs(u @ (a / self.scale)) ** 2 for u, a in zip(self.u, amps)]
        ) / np.asarray(gamma) ** 2
        opts = {"tol_feas": 1e-9, "tol_gap_abs": 1e-9, "tol_gap_rel": 1e-9} if self.settings.solver == "CLARABEL" else {}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self.problem.solve(solver=self.settings.solver, warm_start=False, **opts)
        except cp.SolverError:
            return None
        if self.problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            return None
        return [np.asarray(c.value, dtype=complex) * self.scale for c in self.c]


def rzf_per_path(
    ch: ChannelSet,
    P: float,
    settings: SolverSettings | None = None,
    init: list[np.ndarray] | None = None,
) -> RzfResult:
    """Per-path RZF: fixed regularized directions, SCA over complex amplitudes.

    The default start spreads P equally over all paths with phases that
    make each term of u_k^T c_k real and positive.
    """
    if not P > 0:
        raise ConfigurationError("P must be positive")
    settings = settings or SolverSettings()
    bank = effective_channel_bank(ch)
    model = rzf_amplitude_model(ch, P, bank)
    if init is None:
        p0 = P / ch.total_paths
        init = [np.sqrt(p0) * np.exp(-1j * np.angle(u)) for u in model.desired]
    else:
        init = [np.asarray(a, dtype=complex) for a in init]
        if sum(np.sum(np.abs(a) ** 2) for a in init) > P * (1 + 1e-9):
            raise ConfigurationError("initial amplitudes exceed the power budget")
    surrogate = _RzfSurrogate(model, P, settings)

    def step(amps):
        gamma = np.maximum(model.sinr(amps), 1e-300)
        new = surrogate(amps, gamma)
        if new is None:
            return amps
        # Clip any solver overshoot of the budget.
        tot = sum(np.sum(np.abs(a) ** 2) for a in new)
        if tot > P:
            new = [a * np.sqrt(P / tot) for a in new]
        return new

    res: ScaResult = sca_drive(
        step, model.sum_rate, init, settings, feasible=lambda a: bool(np.all(model.sinr(a) > 0))
    )
    plan = delay_plan(ch)
    beams = model.beams(res.point, plan)
    return RzfResult(beams, res.point, res.trace, dam_sinr(ch, beams, bank), res.converged)
