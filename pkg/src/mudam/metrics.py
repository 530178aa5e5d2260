"""Guard-interval overhead, effective spectral efficiency and PAPR.

Single-carrier DAM reserves about 2 n_max guard samples per coherence
block, the strongest-path scheme n_max, and OFDM a cyclic prefix of
n_max samples on every M-sample symbol.  PAPR is measured per transmit
antenna against the analytic average power implied by the beams, and the
scheme value is the worst antenna.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .beamforming import mrt_per_path
from .benchmarks import OfdmBeamformerSet, SpBeamformerSet, ofdm_mrt, sp_mrt
from .channel import GeometryConfig, ofdm_channel, synthesize_channel
from .dam import PathBeamformerSet, qam_symbols, transmit_waveform
from .exceptions import ConfigurationError

__all__ = [
    "SCHEMES",
    "OverheadConfig",
    "PaprConfig",
    "CcdfCurve",
    "guard_samples",
    "overhead_fraction",
    "efficiency_factor",
    "effective_spectral_efficiency",
    "antenna_papr",
    "dam_papr",
    "sp_papr",
    "ofdm_papr",
    "mrt_papr_source",
    "papr_trials",
    "papr_ccdf",
]

log = logging.getLogger(__name__)

SCHEMES = ("DAM", "SP", "OFDM")


def _scheme(name: str) -> str:
    s = str(name).upper()
    if s not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {name!r}; expected one of {SCHEMES}")
    return s


@dataclass(frozen=True)
class OverheadConfig:
    n_max: int
    coherence_samples: int = 128_000
    num_subcarriers: int = 512

    def __post_init__(self):
        if self.n_max < 0:
            raise ConfigurationError("n_max must be non-negative")
        if self.coherence_samples < 1:
            raise ConfigurationError("coherence_samples must be positive")
        if self.coherence_samples < 2 * self.n_max:
            raise ConfigurationError("coherence block shorter than the DAM guard interval 2 n_max")
        if self.num_subcarriers < 1:
            raise ConfigurationError("num_subcarriers must be positive")

    def check_ofdm(self):
        if self.num_subcarriers <= self.n_max:
            raise ConfigurationError("OFDM needs more sub-carriers than the delay spread n_max")


def guard_samples(scheme: str, cfg: OverheadConfig) -> int:
    """Guard samples per block: 2 n_max (DAM), n_max (SP), n_max CP (OFDM)."""
    return 2 * cfg.n_max if _scheme(scheme) == "DAM" else cfg.n_max


def overhead_fraction(scheme: str, cfg: OverheadConfig) -> Fraction:
    """Exact share of samples spent on guard intervals."""
    s = _scheme(scheme)
    if s == "OFDM":
        cfg.check_ofdm()
        return Fraction(cfg.n_max, cfg.n_max + cfg.num_subcarriers)
    return Fraction(guard_samples(s, cfg), cfg.coherence_samples)


def efficiency_factor(scheme: str, cfg: OverheadConfig) -> Fraction:
    """Useful-sample share, 1 - overhead (M / (M + G_CP) for OFDM)."""
    return 1 - overhead_fraction(scheme, cfg)


def effective_spectral_efficiency(sinrs, scheme: str, cfg: OverheadConfig) -> float:
    """Sum spectral efficiency after guard overhead, in bits/s/Hz.

    For OFDM ``sinrs`` holds gamma_{k,m} with shape (K, M) and the result
    is (1/(M + G_CP)) sum_k sum_m log2(1 + gamma_{k,m}).  For the
    single-carrier schemes it is one SINR per user and the result is
    ((G_c - G) / G_c) sum_k log2(1 + gamma_k).
    """
    s = _scheme(scheme)
    g = np.asarray(sinrs, dtype=float)
    if np.any(g < 0):
        raise ConfigurationError("SINRs must be non-negative")
    bits = float(np.sum(np.log2(1.0 + g)))
    if s == "OFDM":
        cfg.check_ofdm()
        if g.ndim != 2 or g.shape[1] != cfg.num_subcarriers:
            raise ConfigurationError("OFDM SINRs must have shape (K, num_subcarriers)")
        return bits / (cfg.num_subcarriers + cfg.n_max)
    if g.ndim != 1:
        raise ConfigurationError("single-carrier SINRs must be one value per user")
    return bits * float(efficiency_factor(s, cfg))


# --- PAPR -----------------------------------------------------------------


@dataclass(frozen=True)
class PaprConfig:
    qam_order: int = 4
    num_trials: int = 200
    samples_per_trial: int = 4096
    rng_seed: int = 0

    def __post_init__(self):
        if self.qam_order not in (4, 16, 64):
            raise ConfigurationError("qam_order must be 4, 16 or 64")
        if self.num_trials < 1:
            raise ConfigurationError("num_trials must be at least 1")
        if self.samples_per_trial < 1:
            raise ConfigurationError("samples_per_trial must be at least 1")
        if self.rng_seed < 0:
            raise ConfigurationError("rng_seed must be non-negative")


@dataclass
class CcdfCurve:
    thresholds_db: np.ndarray
    probabilities: np.ndarray
    samples_db: np.ndarray | None = None

    def threshold_at(self, prob: float) -> float:
        """PAPR (dB) exceeded with probability ``prob`` (empirical quantile)."""
        if self.samples_db is None:
            idx = np.nonzero(self.probabilities <= prob)[0]
            return float(self.thresholds_db[idx[0]]) if idx.size else float(self.thresholds_db[-1])
        return float(np.quantile(self.samples_db, 1.0 - prob))


def antenna_papr(x: np.ndarray, mean_power: np.ndarray) -> float:
    """max over antennas of max_n |x[n]|^2 / E|x[n]|^2 (linear scale).

    Antennas with zero average power carry no signal and are skipped
    with a warning.
    """
    mean_power = np.asarray(mean_power, dtype=float)
    live = mean_power > 0
    if not np.all(live):
        warnings.warn(f"{int(np.sum(~live))} antenna(s) carry no power and are excluded from PAPR", RuntimeWarning)
    if not np.any(live):
        raise ConfigurationError("no antenna carries any power")
    peak = np.max(np.abs(x[live]) ** 2, axis=1)
    return float(np.max(peak / mean_power[live]))


def dam_papr(beams: PathBeamformerSet, rng: np.random.Generator, qam_order: int, num_samples: int) -> float:
    """PAPR of a steady-state DAM block of ``num_samples`` samples."""
    kmax = beams.plan.max_kappa
    K = len(beams.beams)
    s = qam_symbols(rng, qam_order, (K, num_samples + kmax))
    x = transmit_waveform(beams, s, num_samples + kmax)[:, kmax:]
    mean = sum(np.sum(np.abs(b) ** 2, axis=0) for b in beams.beams)
    return antenna_papr(x, mean)


def sp_papr(beams: SpBeamformerSet, rng: np.random.Generator, qam_order: int, num_samples: int) -> float:
    F = np.asarray(beams.vectors)
    s = qam_symbols(rng, qam_order, (F.shape[0], num_samples))
    x = F.T @ s
    return antenna_papr(x, np.sum(np.abs(F) ** 2, axis=0))


def ofdm_papr(beams: OfdmBeamformerSet, rng: np.random.Generator, qam_order: int, num_samples: int) -> float:
    """Worst PAPR over ceil(num_samples / M) OFDM symbols (CP excluded)."""
    D = np.asarray(beams.vectors)  # (K, M, M_t)
    K, M, Mt = D.shape
    nsym = -(-num_samples // M)
    mean = np.sum(np.abs(D) ** 2, axis=(0, 1)) / M
    worst = 0.0
    for _ in range(nsym):
        s = qam_symbols(rng, qam_order, (K, M))
        X = np.einsum("kma,km->ma", D, s)
        x = np.fft.ifft(X, axis=0) * np.sqrt(M)
        worst = max(worst, antenna_papr(x.T, mean))
    return worst


PaprSource = Callable[[np.random.Generator, PaprConfig], float]


def mrt_papr_source(
    scheme: str,
    geometry: GeometryConfig,
    P: float = 1.0,
    noise_power: float = 1.0,
    num_subcarriers: int = 512,
) -> PaprSource:
    """Per-trial generator: draw a channel, build MRT beams, return one PAPR.

    The geometry seed is replaced by one drawn from the trial's stream,
    so each trial sees an independent channel.
    """
    s = _scheme(scheme)

    def source(rng: np.random.Generator, cfg: PaprConfig) -> float:
        seed = int(rng.integers(0, 2**63 - 1))
        g = GeometryConfig(
            geometry.num_antennas, geometry.num_users, geometry.paths_per_user,
            geometry.delay_range, geometry.aod_range, geometry.antenna_spacing, seed, geometry.path_loss_db,
        )
        ch = synthesize_channel(g, noise_power)
        if s == "DAM":
            return dam_papr(mrt_per_path(ch, P), rng, cfg.qam_order, cfg.samples_per_trial)
        if s == "SP":
            return sp_papr(sp_mrt(ch, P).beams, rng, cfg.qam_order, cfg.samples_per_trial)
        ofdm = ofdm_channel(ch, num_subcarriers)
        return ofdm_papr(ofdm_mrt(ofdm, P).beams, rng, cfg.qam_order, cfg.samples_per_trial)

    return source


def papr_trials(source: PaprSource, cfg: PaprConfig, trials=None) -> np.ndarray:
    """PAPR (dB) of each trial; trial t uses the RNG stream (rng_seed, t)."""
    idx = range(cfg.num_trials) if trials is None else trials
    return np.array(
        [10.0 * np.log10(source(np.random.default_rng([cfg.rng_seed, t]), cfg)) for t in idx]
    )


def papr_ccdf(source: PaprSource, cfg: PaprConfig, thresholds_db=None, samples_db=None) -> CcdfCurve:
    """Empirical CCDF P(PAPR > threshold) over independent trials."""
    vals = papr_trials(source, cfg) if samples_db is None else np.asarray(samples_db, dtype=float)
    if thresholds_db is None:
        thresholds_db = np.arange(0.0, 16.0 + 1e-9, 0.1)
    th = np.asarray(thresholds_db, dtype=float)
    prob = np.array([np.mean(vals > t) for t in th])
    return CcdfCurve(th, prob, vals)
