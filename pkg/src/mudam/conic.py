"""Optimization kernels.

* SINR-constrained transmit power minimization, written as an SOCP and
  handed to a conic solver (cvxpy + Clarabel).  The problem is compiled
  once per channel and re-solved for each set of SINR targets, which is
  what the rate-profile bisection needs.
* Classical water-filling.
* A monotone SCA driver.
* A log-barrier Newton solver for the separable "sum of logs of linear
  forms minus linear cost" problems produced by the power-only SCA
  surrogates.  Their Hessian is block diagonal plus one rank-one term
  from the shared power budget, so each Newton step is a batch of small
  dense solves.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import cvxpy as cp
import numpy as np

from .channel import ChannelSet, stack_user_channel
from .dam import EffectiveChannelBank, PathBeamformerSet, delay_plan, effective_channel_bank
from .exceptions import ConfigurationError, ScaError

__all__ = [
    "SolverSettings",
    "SocpInstance",
    "SocpSolution",
    "PowerMinSocp",
    "solve_power_min_socp",
    "water_fill",
    "ScaResult",
    "sca_drive",
    "maximize_log_power",
]

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iterations"
SOLVER_ERROR = "solver_error"


@dataclass(frozen=True)
class SolverSettings:
    feasibility_tolerance: float = 1e-7
    duality_gap_tolerance: float = 1e-7
    bisection_epsilon: float = 1e-3
    sca_relative_stop: float = 1e-4
    max_iterations: int = 50
    solver: str = "CLARABEL"

    def __post_init__(self):
        for name in ("feasibility_tolerance", "duality_gap_tolerance", "bisection_epsilon", "sca_relative_stop"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be at least 1")


@dataclass
class SocpInstance:
    """min sum_k ||x_k||^2  s.t.  SINR_k(x) >= targets[k].

    User k's SINR is |d_k^H x_k|^2 over
    sum_{kp} ||A_{k,kp}^H x_kp||^2 + noise, with ``desired[k] = d_k`` and
    ``interference[k] = [(kp, A_{k,kp}), ...]``.
    """

    desired: list[np.ndarray]
    interference: list[list[tuple[int, np.ndarray]]]
    noise_power: float
    targets: np.ndarray
    channel: ChannelSet | None = field(default=None, repr=False)
    scheme: str = "generic"

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=float)
        if self.targets.shape != (len(self.desired),):
            raise ConfigurationError("one SINR target per user is required")
        if np.any(self.targets < 0):
            raise ConfigurationError("SINR targets must be non-negative")

    @property
    def num_users(self) -> int:
        return len(self.desired)

    @classmethod
    def from_dam(
        cls, ch: ChannelSet, targets, bank: EffectiveChannelBank | None = None
    ) -> "SocpInstance":
        bank = bank if bank is not None else effective_channel_bank(ch)
        K = ch.num_users
        desired = [stack_user_channel(ch, k) for k in range(K)]
        interf = [
            [(kp, bank.interference_matrix(k, kp, drop_empty=True)) for kp in range(K)] for k in range(K)
        ]
        return cls(desired, interf, ch.noise_power, targets, ch, "dam")

    @classmethod
    def from_strongest_path(cls, ch: ChannelSet, targets) -> "SocpInstance":
        K = ch.num_users
        desired = [ch.gains[k][0] for k in range(K)]
        interf = []
        for k in range(K):
            terms = []
            for kp in range(K):
                A = ch.gains[k][1:] if kp == k else ch.gains[k]
                terms.append((kp, A.T))
            interf.append(terms)
        return cls(desired, interf, ch.noise_power, targets, ch, "sp")

    def sinr(self, vectors: Sequence[np.ndarray]) -> np.ndarray:
        out = np.empty(self.num_users)
        for k in range(self.num_users):
            sig = abs(np.vdot(self.desired[k], vectors[k])) ** 2
            intf = sum(float(np.sum(np.abs(A.conj().T @ vectors[kp]) ** 2)) for kp, A in self.interference[k])
            out[k] = sig / (intf + self.noise_power)
        return out


@dataclass
class SocpSolution:
    vectors: list[np.ndarray] | None
    total_power: float
    status: str
    beams: PathBeamformerSet | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class PowerMinSocp:
    """Compiled power-minimization SOCP; call :meth:`solve` with new targets.

    Users with a zero target get zero beams at the optimum, so they are
    left out of the program altogether.  One compiled problem is cached
    per set of active users; only the target parameter changes between
    calls with the same active set.
    """

    def __init__(self, inst: SocpInstance, settings: SolverSettings | None = None):
        self.inst = inst
        self.settings = settings or SolverSettings()
        self._cache: dict[tuple[int, ...], tuple] = {}

    def _build(self, active: tuple[int, ...]):
        inst = self.inst
        scale = 1.0 / np.sqrt(inst.noise_power)
        x = {k: cp.Variable(inst.desired[k].size, complex=True) for k in active}
        sqrt_gamma = cp.Parameter(len(active), nonneg=True)
        cons = []
        for j, k in enumerate(active):
            dk = inst.desired[k] * scale
            s = dk.conj() @ x[k]
            parts = [
                (A.conj().T * scale) @ x[kp]
                for kp, A in inst.interference[k]
                if kp in x and A.shape[1]
            ]
            parts.append(np.ones(1))
            stacked = cp.hstack([cp.real(p) for p in parts] + [cp.imag(p) for p in parts[:-1]])
            cons.append(cp.imag(s) == 0)
            cons.append(cp.SOC(cp.real(s), sqrt_gamma[j] * stacked))
        obj = cp.Minimize(sum(cp.sum_squares(v) for v in x.values()))
        return cp.Problem(obj, cons), x, sqrt_gamma

    def solve(self, targets=None) -> SocpSolution:
        targets = self.inst.targets if targets is None else np.asarray(targets, dtype=float)
        if targets.shape != (self.inst.num_users,):
            raise ConfigurationError("one SINR target per user is required")
        if np.any(targets < 0):
            raise ConfigurationError("SINR targets must be non-negative")
        zeros = [np.zeros(d.size, dtype=complex) for d in self.inst.desired]
        active = tuple(int(k) for k in np.flatnonzero(targets > 0))
        if not active:
            return self._wrap(zeros, 0.0, OPTIMAL)
        if active not in self._cache:
            self._cache[active] = self._build(active)
        problem, x, sqrt_gamma = self._cache[active]
        sqrt_gamma.value = np.sqrt(targets[list(active)])
        s = self.settings
        opts = {}
        if s.solver == "CLARABEL":
            opts = dict(
                tol_feas=s.feasibility_tolerance * 0.1,
                tol_gap_abs=s.duality_gap_tolerance * 0.1,
                tol_gap_rel=s.duality_gap_tolerance * 0.1,
                max_iter=200,
            )
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                problem.solve(solver=s.solver, warm_start=False, **opts)
        except cp.SolverError as exc:
            log.debug("SOCP solver error: %s", exc)
            return self._wrap(None, np.inf, SOLVER_ERROR)
        status = problem.status
        if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return self._wrap(None, np.inf, INFEASIBLE)
        if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            return self._wrap(None, np.inf, MAX_ITERATIONS if "iter" in str(status).lower() else SOLVER_ERROR)
        vectors = zeros
        for k, v in x.items():
            v = np.asarray(v.value, dtype=complex)
            # Rotate away the tiny imaginary residue left by the solver.
            z = np.vdot(self.inst.desired[k], v)
            vectors[k] = v * (abs(z) / z) if abs(z) > 0 else v
        power = float(sum(np.sum(np.abs(v) ** 2) for v in vectors))
        return self._wrap(vectors, power, OPTIMAL)

    def _wrap(self, vectors, power, status) -> SocpSolution:
        beams = None
        ch = self.inst.channel
        if vectors is not None and self.inst.scheme == "dam" and ch is not None:
            beams = PathBeamformerSet(
                [v.reshape(ch.gains[k].shape) for k, v in enumerate(vectors)], delay_plan(ch)
            )
        return SocpSolution(vectors, power, status, beams)


def solve_power_min_socp(inst: SocpInstance, settings: SolverSettings | None = None) -> SocpSolution:
    return PowerMinSocp(inst, settings).solve()


def water_fill(inverse_gains, budget: float) -> np.ndarray:
    """Water-filling: p_k = (level - inverse_gains[k])^+ with sum p_k = budget."""
    inv = np.asarray(inverse_gains, dtype=float).ravel()
    if inv.size == 0:
        raise ValueError("water_fill needs at least one channel")
    if not budget > 0:
        raise ValueError("budget must be positive")
    if np.any(~np.isfinite(inv)) or np.any(inv <= 0):
        raise ValueError("inverse gains must be finite and positive")
    order = np.argsort(inv, kind="stable")
    srt = inv[order]
    csum = np.cumsum(srt)
    n = np.arange(1, inv.size + 1)
    levels = (budget + csum) / n
    active = int(np.nonzero(levels > srt)[0].max()) + 1
    level = levels[active - 1]
    p = np.zeros_like(inv)
    p[order[:active]] = level - srt[:active]
    return p


@dataclass
class ScaResult:
    point: object
    trace: list[float]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def objective(self) -> float:
        return self.trace[-1]


def sca_drive(
    step: Callable[[object], object],
    objective: Callable[[object], float],
    init,
    settings: SolverSettings | None = None,
    feasible: Callable[[object], bool] | None = None,
) -> ScaResult:
    """Iterate ``point <- step(point)`` while the objective keeps rising.

    ``step`` solves the convex surrogate built at the current point.
    Iteration stops when the relative increase falls below
    ``sca_relative_stop`` or after ``max_iterations`` steps.  A decrease
    larger than the duality-gap tolerance means the surrogate is not a
    valid minorizer and raises :class:`ScaError`.
    """
    s = settings or SolverSettings()
    if feasible is not None and not feasible(init):
        raise ScaError("SCA initial point is infeasible")
    point = init
    trace = [float(objective(point))]
    for _ in range(s.max_iterations):
        cand = step(point)
        val = float(objective(cand))
        prev = trace[-1]
        slack = s.duality_gap_tolerance * max(1.0, abs(prev))
        if val < prev - slack:
            raise ScaError(f"SCA objective decreased from {prev:.12g} to {val:.12g}")
        if val <= prev:
            return ScaResult(point, trace, True)
        point = cand
        trace.append(val)
        if val - prev < s.sca_relative_stop * max(abs(prev), 1e-12):
            return ScaResult(point, trace, True)
    return ScaResult(point, trace, False)


def maximize_log_power(
    gains: np.ndarray,
    offsets,
    cost: np.ndarray,
    budget: float,
    start: np.ndarray | None = None,
    gap: float = 1e-9,
) -> np.ndarray:
    """Solve max sum_{b,j} log(gains[b,j] . p_b + offsets[b,j]) - cost . p
    subject to p >= 0 and sum(p) <= budget.

    ``gains`` has shape (B, J, K): B independent blocks of K variables,
    each with J log terms.  Nonnegative gains and positive offsets keep
    every log argument positive on the feasible set.  Returns p of shape
    (B, K), optimal to within ``gap`` nats.
    """
    A = np.asarray(gains, dtype=float)
    B, J, K = A.shape
    off = np.broadcast_to(np.asarray(offsets, dtype=float), (B, J))
    c = np.asarray(cost, dtype=float).reshape(B, K)
    if np.any(A < 0) or np.any(off <= 0):
        raise ValueError("gains must be nonnegative and offsets positive")
    n = B * K
    uniform = np.full((B, K), budget / n)
    if start is None:
        p = 0.5 * uniform
    else:
        p = 0.9 * np.clip(np.asarray(start, dtype=float).reshape(B, K), 0, None) * min(
            1.0, budget / max(np.sum(start), 1e-300)
        ) + 0.05 * uniform

    def f(p):
        z = np.einsum("bjk,bk->bj", A, p) + off
        return np.sum(np.log(z)) - np.sum(c * p)

    def psi(p, t):
        slack = budget - p.sum()
        if np.any(p <= 0) or slack <= 0:
            return -np.inf
        return t * f(p) + np.sum(np.log(p)) + np.log(slack)

    m = n + 1
    t = 1.0
    while True:
        for _ in range(100):
            z = np.einsum("bjk,bk->bj", A, p) + off
            slack = budget - p.sum()
            grad = t * (np.einsum("bjk,bj->bk", A, 1.0 / z) - c) + 1.0 / p - 1.0 / slack
            D = t * np.einsum("bjk,bj,bjl->bkl", A, 1.0 / z**2, A)
            D[:, np.arange(K), np.arange(K)] += 1.0 / p**2
            rhs = np.stack([grad, np.ones_like(grad)], axis=-1)
            sol = np.linalg.solve(D, rhs)
            u, w = sol[..., 0], sol[..., 1]
            rho = 1.0 / slack**2
            delta = u - w * (rho * u.sum()) / (1.0 + rho * w.sum())
            dec = float(np.sum(grad * delta))
            if dec / 2 <= 1e-10:
                break
            cur = psi(p, t)
            alpha = 1.0
            while alpha > 1e-14:
                cand = p + alpha * delta
                if psi(cand, t) >= cur + 0.25 * alpha * dec:
                    break
                alpha *= 0.5
            else:
                break
            p = cand
        if m / t < gap:
            return p
        t *= 20.0
