"""Sparse multipath MIMO channels.

A user's channel is a handful of resolvable paths, each a complex gain
vector over the transmit array with an integer sample delay.  This module
draws such channels from a geometric ULA model, stacks them into the
shapes used by the SINR formulas, and converts them to per-subcarrier
OFDM channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .exceptions import ConfigurationError, ContractViolation

__all__ = [
    "GeometryConfig",
    "ChannelSet",
    "OfdmChannel",
    "steering_vector",
    "synthesize_channel",
    "stack_user_channel",
    "path_matrix",
    "ofdm_channel",
    "orthogonality_metric",
]


@dataclass(frozen=True)
class GeometryConfig:
    """Parameters of the random geometric channel model.

    ``delay_range`` is inclusive on both ends and counted in samples.
    ``path_loss_db`` is a common large-scale attenuation applied to every
    path gain; the small-scale model alone has unit average power per
    antenna.
    """

    num_antennas: int
    num_users: int
    paths_per_user: tuple[int, ...]
    delay_range: tuple[int, int] = (0, 80)
    aod_range: tuple[float, float] = (-90.0, 90.0)
    antenna_spacing: float = 0.5
    rng_seed: int = 0
    path_loss_db: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "paths_per_user", tuple(int(x) for x in self.paths_per_user))
        if self.num_antennas < 1:
            raise ConfigurationError("num_antennas must be positive")
        if self.num_users < 1:
            raise ConfigurationError("num_users must be positive")
        if len(self.paths_per_user) != self.num_users:
            raise ConfigurationError(
                f"paths_per_user has {len(self.paths_per_user)} entries, expected {self.num_users}"
            )
        if any(L < 1 for L in self.paths_per_user):
            raise ConfigurationError("every user needs at least one path")
        lo, hi = self.delay_range
        if lo < 0 or hi < lo:
            raise ConfigurationError(f"invalid delay_range {self.delay_range}")
        if self.antenna_spacing <= 0:
            raise ConfigurationError("antenna_spacing must be positive")
        if self.rng_seed < 0:
            raise ConfigurationError("rng_seed must be non-negative")
        span = hi - lo + 1
        if max(self.paths_per_user) > span:
            raise ConfigurationError(
                f"delay_range {self.delay_range} holds {span} distinct delays, "
                f"but a user needs {max(self.paths_per_user)}"
            )

    @classmethod
    def uniform(cls, num_antennas: int, num_users: int, paths: int, **kwargs) -> "GeometryConfig":
        return cls(num_antennas, num_users, (paths,) * num_users, **kwargs)


@dataclass
class ChannelSet:
    """Per-user multipath channels.

    ``gains[k]`` has shape ``(L_k, M_t)``; row ``l`` is the path vector
    h_kl.  ``delays[k]`` holds the integer delays of those paths.
    """

    gains: list[np.ndarray]
    delays: list[np.ndarray]
    noise_power: float
    aods: list[np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.gains = [np.atleast_2d(np.asarray(g, dtype=complex)) for g in self.gains]
        self.delays = [np.atleast_1d(np.asarray(d, dtype=np.int64)) for d in self.delays]
        if len(self.gains) != len(self.delays) or not self.gains:
            raise ContractViolation("gains and delays must list the same (non-zero) number of users")
        Mt = self.gains[0].shape[1]
        for k, (g, d) in enumerate(zip(self.gains, self.delays)):
            if g.shape[0] != d.shape[0] or g.shape[0] < 1:
                raise ContractViolation(f"user {k}: {g.shape[0]} gain vectors but {d.shape[0]} delays")
            if g.shape[1] != Mt:
                raise ContractViolation(f"user {k}: gain vectors of length {g.shape[1]}, expected {Mt}")
            if np.any(d < 0):
                raise ContractViolation(f"user {k}: negative delay")
            if len(np.unique(d)) != len(d):
                raise ContractViolation(f"user {k}: path delays must be distinct")
        if not self.noise_power > 0:
            raise ContractViolation("noise_power must be positive")

    @property
    def num_users(self) -> int:
        return len(self.gains)

    @property
    def num_antennas(self) -> int:
        return self.gains[0].shape[1]

    @property
    def paths_per_user(self) -> tuple[int, ...]:
        return tuple(g.shape[0] for g in self.gains)

    @property
    def total_paths(self) -> int:
        return sum(self.paths_per_user)

    @property
    def max_delays(self) -> np.ndarray:
        return np.array([d.max() for d in self.delays])

    @property
    def min_delays(self) -> np.ndarray:
        return np.array([d.min() for d in self.delays])

    @property
    def n_max(self) -> int:
        """Largest path delay over all users."""
        return int(self.max_delays.max())

    def path_offsets(self) -> np.ndarray:
        """Column index of each user's first path in the stacked path matrix."""
        return np.concatenate([[0], np.cumsum(self.paths_per_user)])

    def scaled(self, factor: complex, noise_factor: float = 1.0) -> "ChannelSet":
        return ChannelSet(
            [g * factor for g in self.gains],
            [d.copy() for d in self.delays],
            self.noise_power * noise_factor,
            self.aods,
        )


@dataclass
class OfdmChannel:
    """Frequency-domain channel: ``vectors[k, m]`` is h_{k,m}."""

    vectors: np.ndarray
    subcarrier_noise_power: float

    @property
    def num_users(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.vectors.shape[1]

    @property
    def num_antennas(self) -> int:
        return self.vectors.shape[2]


def steering_vector(num_antennas: int, aod_deg, spacing: float = 0.5) -> np.ndarray:
    """ULA response ``exp(j 2 pi d m sin(theta))``; one row per angle."""
    theta = np.deg2rad(np.atleast_1d(np.asarray(aod_deg, dtype=float)))
    m = np.arange(num_antennas)
    return np.exp(2j * np.pi * spacing * np.outer(np.sin(theta), m))


def synthesize_channel(cfg: GeometryConfig, noise_power: float) -> ChannelSet:
    """Draw a random sparse multipath channel.

    Each path has a CN(0, 1/L_k) gain times the array response at a
    uniformly drawn AoD; delays are distinct within a user.  Paths are
    sorted so the strongest one (largest norm) comes first.
    """
    if not noise_power > 0:
        raise ConfigurationError("noise_power must be positive")
    rng = np.random.default_rng(cfg.rng_seed)
    amplitude = 10.0 ** (-cfg.path_loss_db / 20.0)
    lo, hi = cfg.delay_range
    gains, delays, aods = [], [], []
    for L in cfg.paths_per_user:
        d = rng.choice(np.arange(lo, hi + 1), size=L, replace=False)
        theta = rng.uniform(cfg.aod_range[0], cfg.aod_range[1], size=L)
        g = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) * np.sqrt(0.5 / L)
        h = amplitude * g[:, None] * steering_vector(cfg.num_antennas, theta, cfg.antenna_spacing)
        order = np.argsort(-np.linalg.norm(h, axis=1), kind="stable")
        gains.append(h[order])
        delays.append(d[order])
        aods.append(theta[order])
    return ChannelSet(gains, delays, float(noise_power), aods)


def stack_user_channel(ch: ChannelSet, k: int) -> np.ndarray:
    """Vertical stack of user ``k``'s path vectors, length M_t * L_k."""
    return ch.gains[k].reshape(-1)


def path_matrix(ch: ChannelSet, strongest_only: bool = False) -> np.ndarray:
    """M_t x L_tot matrix of path vectors in user-then-path order.

    With ``strongest_only`` only the first path of each user is kept
    (M_t x K).
    """
    if strongest_only:
        return np.stack([g[0] for g in ch.gains], axis=1)
    return np.concatenate([g.T for g in ch.gains], axis=1)


def ofdm_channel(ch: ChannelSet, num_subcarriers: int) -> OfdmChannel:
    """M-point DFT of every user's impulse response.

    h_{k,m} = M^{-1/2} sum_l h_kl exp(-j 2 pi m n_kl / M).
    """
    M = int(num_subcarriers)
    if M <= ch.n_max:
        raise ConfigurationError(
            f"{M} subcarriers cannot cover a delay spread of {ch.n_max} samples"
        )
    m = np.arange(M)
    out = np.empty((ch.num_users, M, ch.num_antennas), dtype=complex)
    for k, (g, d) in enumerate(zip(ch.gains, ch.delays)):
        phase = np.exp(-2j * np.pi * np.outer(m, d) / M)  # (M, L_k)
        out[k] = phase @ g / np.sqrt(M)
    return OfdmChannel(out, ch.noise_power / M)


def orthogonality_metric(ch: ChannelSet) -> float:
    """Largest normalized inner product between any two distinct paths."""
    H = path_matrix(ch)
    if H.shape[1] < 2:
        raise ContractViolation("orthogonality needs at least two paths")
    norms = np.linalg.norm(H, axis=0)
    worst = 0.0
    for a, b in combinations(range(H.shape[1]), 2):
        worst = max(worst, abs(np.vdot(H[:, a], H[:, b])) / (norms[a] * norms[b]))
    return float(min(worst, 1.0))


def channel_from_paths(
    gains: Sequence[Sequence[Sequence[complex]]],
    delays: Sequence[Sequence[int]],
    noise_power: float = 1.0,
) -> ChannelSet:
    """Build a ChannelSet from nested literals; handy for hand-made cases."""
    return ChannelSet([np.asarray(g, dtype=complex) for g in gains], [np.asarray(d) for d in delays], noise_power)
