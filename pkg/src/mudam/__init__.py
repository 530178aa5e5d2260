"""Multi-user delay alignment modulation (DAM) for wideband MIMO downlinks.

Channel synthesis, per-path beamforming with exact SINR evaluation,
conic and SCA-based optimization, and strongest-path / OFDM benchmarks.
"""

from .beamforming import mrt_asymptotic, mrt_per_path, rzf_per_path, zf_per_path
from .benchmarks import (
    ofdm_mrt,
    ofdm_rzf,
    ofdm_sinr,
    ofdm_zf,
    sp_mrt,
    sp_rzf,
    sp_sinr,
    sp_zf,
)
from .channel import ChannelSet, GeometryConfig, OfdmChannel, ofdm_channel, synthesize_channel
from .conic import PowerMinSocp, SocpInstance, SolverSettings, water_fill
from .dam import PathBeamformerSet, SinrReport, dam_sinr, delay_plan, effective_channel_bank
from .exceptions import (
    ConfigurationError,
    ContractViolation,
    EstimationError,
    ScaError,
    ZeroForcingInfeasible,
)
from .metrics import OverheadConfig, effective_spectral_efficiency, overhead_fraction
from .rate_region import RateProfile, dam_pareto_point, ofdm_pareto_point, sp_pareto_point

__version__ = "0.1.0"
