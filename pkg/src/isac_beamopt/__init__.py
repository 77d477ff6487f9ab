"""Low-complexity sum rate / CRLB beamforming for monostatic ISAC (SCA-SGPI)."""

__version__ = "0.1.0"

from .errors import (BeamoptError, ConfigError, DegenerateBeamError, InvalidInputError,
                     OracleProbeError, SingularFIMError, ZeroProjectionError)
from .fim import FisherInfo, SensingDerived, assemble_fim, assemble_q, derive_sensing
from .model import (ChannelSet, SensingScene, SystemConfig, build_scene, generate_channels,
                    steering_derivative, steering_vector)
from .rates import CommAuxiliaries, compute_rates, eval_comm_surrogate, update_comm_auxiliaries
from .sgpi import (IterationTrace, Objective, SurrogateState, build_surrogate,
                   dominant_eigenvalue, eval_objective, project_power, sgpi_inner, solve)

__all__ = [
    "BeamoptError", "ConfigError", "DegenerateBeamError", "InvalidInputError",
    "OracleProbeError", "SingularFIMError", "ZeroProjectionError",
    "FisherInfo", "SensingDerived", "assemble_fim", "assemble_q", "derive_sensing",
    "ChannelSet", "SensingScene", "SystemConfig", "build_scene", "generate_channels",
    "steering_derivative", "steering_vector",
    "CommAuxiliaries", "compute_rates", "eval_comm_surrogate", "update_comm_auxiliaries",
    "IterationTrace", "Objective", "SurrogateState", "build_surrogate", "dominant_eigenvalue",
    "eval_objective", "project_power", "sgpi_inner", "solve",
]
