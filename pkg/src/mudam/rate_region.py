"""Pareto boundary of the achievable rate region.

A rate profile alpha fixes a direction on the rate simplex; the
boundary point in that direction is alpha * R* with the largest R* the
power budget can support.  For the single-carrier schemes R* is found by
bisection, each probe being an SINR-constrained power minimization.  For
OFDM the max-min problem over sub-carriers is attacked directly by SCA.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from .benchmarks import OfdmBeamformerSet, SpBeamformerSet, ofdm_sinr, sp_sinr
from .channel import ChannelSet, OfdmChannel
from .conic import PowerMinSocp, SocpInstance, SolverSettings, sca_drive
from .dam import dam_sinr
from .exceptions import ConfigurationError

__all__ = [
    "RateProfile",
    "RegionPoint",
    "RateRegionTrace",
    "dam_pareto_point",
    "sp_pareto_point",
    "ofdm_pareto_point",
    "simplex_grid",
    "trace_region",
    "write_trace_csv",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateProfile:
    alpha: tuple[float, ...]

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ConfigurationError("alpha must be a non-empty vector")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ConfigurationError("alpha entries must be finite and non-negative")
        if not np.any(a > 0):
            raise ConfigurationError("alpha must have at least one positive entry")
        if abs(a.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"alpha must sum to 1, got {a.sum():.15g}")
        object.__setattr__(self, "alpha", tuple(float(x) for x in a))

    @classmethod
    def normalized(cls, weights) -> "RateProfile":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not w.sum() > 0:
            raise ConfigurationError("weights must be non-negative with a positive sum")
        return cls(tuple(w / w.sum()))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.alpha)


@dataclass
class RegionPoint:
    alpha: RateProfile
    rates: np.ndarray
    r_star: float
    beams: object
    status: str
    iterations: int
    scheme: str
    trace: list[float] = field(default_factory=list)

    def scaled(self, factor: float) -> "RegionPoint":
        """Copy with rates and R* multiplied by an overhead factor."""
        return RegionPoint(
            self.alpha, self.rates * factor, self.r_star * factor, self.beams,
            self.status, self.iterations, self.scheme, list(self.trace),
        )


@dataclass
class RateRegionTrace:
    points: list[RegionPoint]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def rates(self) -> np.ndarray:
        return np.array([p.rates for p in self.points])

    def scaled(self, factor: float) -> "RateRegionTrace":
        return RateRegionTrace([p.scaled(factor) for p in self.points])


def _profile(alpha) -> RateProfile:
    return alpha if isinstance(alpha, RateProfile) else RateProfile(tuple(alpha))


def _bisect(
    solver: PowerMinSocp,
    alpha: np.ndarray,
    upper: float,
    P: float,
    settings: SolverSettings,
):
    """Largest R with min power(2^{alpha R} - 1) <= P, to relative accuracy eps.

    Returns (R*, solution at R*, number of probes).  The starting upper
    bound is inflated by (1 + eps) so it is strictly infeasible even when
    the interference-free bound is tight.
    """
    lo, hi = 0.0, upper * (1.0 + settings.bisection_epsilon)
    best = solver.solve(np.zeros_like(alpha))
    probes = 0
    while hi - lo > settings.bisection_epsilon * lo or lo == 0.0:
        if probes >= 200:
            break
        mid = 0.5 * (lo + hi)
        sol = solver.solve(np.exp2(alpha * mid) - 1.0)
        probes += 1
        if sol.ok and sol.total_power <= P:
            lo, best = mid, sol
        else:
            hi = mid
        if hi < 1e-12:
            break
    return lo, best, probes


def _single_user_bounds(norms2: np.ndarray, alpha: np.ndarray, P: float, noise: float) -> float:
    rstar = np.log2(1.0 + P * norms2 / noise)
    active = alpha > 0
    return float(np.min(rstar[active] / alpha[active]))


def dam_pareto_point(
    ch: ChannelSet, alpha, P: float, settings: SolverSettings | None = None
) -> RegionPoint:
    """Pareto-boundary point of multi-user DAM in direction ``alpha``."""
    prof = _profile(alpha)
    a = prof.array
    if a.size != ch.num_users:
        raise ConfigurationError("alpha length must equal the number of users")
    settings = settings or SolverSettings()
    norms2 = np.array([np.sum(np.abs(g) ** 2) for g in ch.gains])
    solver = PowerMinSocp(SocpInstance.from_dam(ch, np.zeros(ch.num_users)), settings)
    upper = _single_user_bounds(norms2, a, P, ch.noise_power)
    r, sol, probes = _bisect(solver, a, upper, P, settings)
    rates = np.array([rep.rate for rep in dam_sinr(ch, sol.beams)])
    return RegionPoint(prof, rates, r, sol.beams, sol.status, probes, "DAM")


def sp_pareto_point(
    ch: ChannelSet, alpha, P: float, settings: SolverSettings | None = None
) -> RegionPoint:
    """Same bisection with the strongest-path SINR and one beam per user."""
    prof = _profile(alpha)
    a = prof.array
    if a.size != ch.num_users:
        raise ConfigurationError("alpha length must equal the number of users")
    settings = settings or SolverSettings()
    norms2 = np.array([np.sum(np.abs(g[0]) ** 2) for g in ch.gains])
    solver = PowerMinSocp(SocpInstance.from_strongest_path(ch, np.zeros(ch.num_users)), settings)
    upper = _single_user_bounds(norms2, a, P, ch.noise_power)
    r, sol, probes = _bisect(solver, a, upper, P, settings)
    beams = SpBeamformerSet(np.array(sol.vectors))
    rates = np.array([rep.rate for rep in sp_sinr(ch, beams)])
    return RegionPoint(prof, rates, r, beams, sol.status, probes, "SP")


class _OfdmRegionSurrogate:
    """Convex surrogate of the OFDM max-min problem at a given beam set.

    Units: channel scaled so the sub-carrier noise is 1 and beams scaled
    so the per-sub-carrier average budget is 1.  Everything is written
    over real and imaginary parts so the problem is compiled once and
    only its parameters change between SCA iterations.
    """

    def __init__(self, ofdm: OfdmChannel, alpha: np.ndarray, P: float, settings: SolverSettings):
        K, M, Mt = ofdm.vectors.shape
        self.K, self.M, self.Mt = K, M, Mt
        self.settings = settings
        self.scale = np.sqrt(P)
        Hs = ofdm.vectors * np.sqrt(P / ofdm.subcarrier_noise_power)
        n = K * K * M
        # z[(k, kp, m)] = h_{k,m}^H d_{kp,m}, d stored as vec over (kp, m, antenna)
        idx = np.arange(n).reshape(K, K, M)
        rows = np.repeat(idx.ravel(), Mt)
        cols = (np.arange(K)[None, :, None, None] * M + np.arange(M)[None, None, :, None]) * Mt + np.arange(Mt)
        cols = np.broadcast_to(cols, (K, K, M, Mt)).ravel()
        vals = np.broadcast_to(Hs.conj()[:, None, :, :], (K, K, M, Mt)).ravel()
        self.A = sp.csr_matrix((vals, (rows, cols)), shape=(n, K * M * Mt))
        Ar, Ai = sp.csr_matrix(self.A.real), sp.csr_matrix(self.A.imag)
        self.dr = cp.Variable(K * M * Mt)
        self.di = cp.Variable(K * M * Mt)
        zr = Ar @ self.dr - Ai @ self.di
        zi = Ai @ self.dr + Ar @ self.di
        self.mu = cp.Variable()
        self.S = cp.Variable(n)
        self.C = cp.Variable(n)
        self.pr = cp.Parameter(n)
        self.pi = cp.Parameter(n)
        self.zr_abs2 = cp.Parameter(n, nonneg=True)
        self.cost = cp.Parameter(n, nonneg=True)  # log2(e) / (sum_i C^r + 1) on cross terms
        self.const = cp.Parameter(K)
        own = np.zeros((K, K, M), dtype=bool)
        own[np.arange(K), np.arange(K)] = True
        self.own = own.ravel()
        cross = np.flatnonzero(~self.own)
        sum_rows = np.broadcast_to(np.arange(K * M).reshape(K, 1, M), (K, K, M)).ravel()
        Ssum = sp.csr_matrix((np.ones(n), (sum_rows, np.arange(n))), shape=(K * M, n))
        U = sp.csr_matrix((np.ones(K * M), (np.repeat(np.arange(K), M), np.arange(K * M))), shape=(K, K * M))
        Cu = sp.csr_matrix((np.ones(n), (np.repeat(np.arange(K), K * M), np.arange(n))), shape=(K, n))
        cons = [
            self.S <= 2 * (cp.multiply(self.pr, zr) + cp.multiply(self.pi, zi)) - self.zr_abs2,
            cp.sum_squares(self.dr) + cp.sum_squares(self.di) <= M,
        ]
        if cross.size:
            cons.append(self.C[cross] >= cp.square(zr[cross]) + cp.square(zi[cross]))
        logs = cp.log(Ssum @ self.S + 1) / np.log(2)
        lhs = U @ logs - Cu @ cp.multiply(self.cost, self.C) - self.const
        active = alpha > 0
        cons.append(lhs[np.flatnonzero(active)] >= M * alpha[active] * self.mu)
        if np.any(~active):
            cons.append(lhs[np.flatnonzero(~active)] >= 0)
        self.problem = cp.Problem(cp.Maximize(self.mu), cons)

    def __call__(self, D: np.ndarray):
        K, M = self.K, self.M
        z = self.A @ (D / self.scale).reshape(-1)
        a2 = np.abs(z) ** 2
        Cr = np.where(self.own, 0.0, a2).reshape(K, K, M)
        denom = Cr.sum(axis=1) + 1.0  # (K, M)
        cost = np.broadcast_to((np.log2(np.e) / denom)[:, None, :], (K, K, M)).ravel()
        cost = np.where(self.own, 0.0, cost)
        self.pr.value = z.real
        self.pi.value = z.imag
        self.zr_abs2.value = a2
        self.cost.value = cost
        self.const.value = np.sum(np.log2(denom), axis=1) - np.sum((cost * Cr.ravel()).reshape(K, K, M), axis=(1, 2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                self.problem.solve(solver=self.settings.solver, warm_start=False)
            except cp.SolverError:
                return None
        if self.problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            return None
        d = np.asarray(self.dr.value) + 1j * np.asarray(self.di.value)
        return d.reshape(K, M, self.Mt) * self.scale


def ofdm_pareto_point(
    ofdm: OfdmChannel, alpha, P: float, settings: SolverSettings | None = None
) -> RegionPoint:
    """OFDM boundary point: SCA on the max-min rate problem, budget M P.

    Starts from sub-carrier MRT with P/K per (user, sub-carrier).  Rates
    are per-sample, (1/M) sum_m log2(1 + gamma_{k,m}), before any CP
    overhead.
    """
    prof = _profile(alpha)
    a = prof.array
    K, M, _ = ofdm.vectors.shape
    if a.size != K:
        raise ConfigurationError("alpha length must equal the number of users")
    settings = settings or SolverSettings()
    active = a > 0

    def mu(D):
        r = ofdm_sinr(ofdm, OfdmBeamformerSet(D)).rates
        return float(np.min(r[active] / a[active]))

    norms = np.linalg.norm(ofdm.vectors, axis=2, keepdims=True)
    D0 = np.sqrt(P / K) * ofdm.vectors / np.where(norms > 0, norms, 1.0)
    surrogate = _OfdmRegionSurrogate(ofdm, a, P, settings)

    def step(D):
        new = surrogate(D)
        if new is None:
            return D
        tot = np.sum(np.abs(new) ** 2)
        if tot > M * P:
            new = new * np.sqrt(M * P / tot)
        return new

    res = sca_drive(step, mu, D0, settings)
    beams = OfdmBeamformerSet(res.point)
    rates = ofdm_sinr(ofdm, beams).rates
    status = "optimal" if res.converged else "max_iterations"
    return RegionPoint(prof, rates, res.objective, beams, status, res.iterations, "OFDM", res.trace)


def simplex_grid(num_users: int, steps: int) -> list[RateProfile]:
    """All profiles with entries in {0, 1/steps, ..., 1}, lexicographic in alpha_1 ascending."""
    if num_users < 1 or steps < 1:
        raise ConfigurationError("simplex_grid needs num_users >= 1 and steps >= 1")

    def comp(n, total):
        if n == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in comp(n - 1, total - first):
                yield (first,) + rest

    out = []
    for c in comp(num_users, steps):
        a = np.array(c, dtype=float) / steps
        out.append(RateProfile(tuple(a)))
    return out


def trace_region(
    point: Callable[[RateProfile], RegionPoint],
    grid: Iterable,
) -> RateRegionTrace:
    """Evaluate ``point`` at every profile of ``grid``, in order."""
    grid = [_profile(a) for a in grid]
    if not grid:
        raise ConfigurationError("alpha grid is empty")
    return RateRegionTrace([point(a) for a in grid])


def write_trace_csv(trace: RateRegionTrace, path, extra: dict | None = None) -> None:
    extra = extra or {}
    K = len(trace.points[0].alpha.alpha)
    header = list(extra) + ["scheme"] + [f"alpha_{k + 1}" for k in range(K)] + [
        f"rate_{k + 1}" for k in range(K)
    ] + ["r_star", "status", "iterations"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for p in trace:
            w.writerow(
                list(extra.values()) + [p.scheme] + [repr(x) for x in p.alpha.alpha]
                + [repr(float(x)) for x in p.rates] + [repr(float(p.r_star)), p.status, p.iterations]
            )
