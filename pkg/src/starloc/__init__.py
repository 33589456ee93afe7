"""Closed-form position-error bounds for surface-assisted localization.

One outdoor and one indoor mobile transmit uplink training toward a
multi-antenna base station; a passive surface on the building facade
simultaneously reflects the outdoor signal and refracts the indoor one with
per-slot phase schedules. This package computes the Fisher information and
Cramer-Rao lower bounds of the link parameters and of both 3-D positions,
designs the optimal phase schedules, and sweeps the operating space.
"""

__version__ = "0.1.0"

from .channel import (
    SPEED_OF_LIGHT,
    CarrierConfig,
    PathLossModel,
    UpaConfig,
    bs_ris_channel,
    los_channel,
    path_loss,
    upa_response,
)
from .errors import (
    ConfigParseError,
    DimensionMismatchError,
    ElevationSingularityError,
    InsufficientSlotsError,
    NonpositiveDistanceError,
    NotPowerOfTwoError,
    RankDeficientError,
    SingularFimError,
    StarlocError,
    ZeroDistanceError,
)
from .experiments import (
    CSV_COLUMNS,
    ScenarioConfig,
    SweepRecord,
    evaluate_point,
    load_config,
    read_results,
    run_design_compare,
    run_heatmap,
    run_snr_sweep,
    write_results,
)
from .fisher import (
    ChannelFisher,
    CrlbReport,
    EnergySplit,
    MeanJacobian,
    MeasurementMatrices,
    PositionFisher,
    PowerAllocation,
    SystemModel,
    analytic_mean_jacobian,
    block_inverse_via_projections,
    crlb_channel,
    crlb_position,
    fim_channel,
    fim_position,
    mean_vector,
    measurement_matrices,
    simulate_measurement,
)
from .geometry import (
    ChannelParams,
    Position3,
    PositionJacobian,
    SceneGeometry,
    SphericalTriple,
    channel_params_from_scene,
    jacobian,
    position_from_spherical,
    spherical_from_positions,
    unit_direction,
)
from .surface import (
    DesignKind,
    PhaseProfilePair,
    make_design,
    orthogonality_defect,
    principal_angles,
)

__all__ = [
    "SPEED_OF_LIGHT",
    "CSV_COLUMNS",
    "CarrierConfig",
    "ChannelFisher",
    "ChannelParams",
    "ConfigParseError",
    "CrlbReport",
    "DesignKind",
    "DimensionMismatchError",
    "ElevationSingularityError",
    "EnergySplit",
    "InsufficientSlotsError",
    "MeanJacobian",
    "MeasurementMatrices",
    "NonpositiveDistanceError",
    "NotPowerOfTwoError",
    "PathLossModel",
    "PhaseProfilePair",
    "Position3",
    "PositionFisher",
    "PositionJacobian",
    "PowerAllocation",
    "RankDeficientError",
    "ScenarioConfig",
    "SceneGeometry",
    "SingularFimError",
    "SphericalTriple",
    "StarlocError",
    "SweepRecord",
    "SystemModel",
    "UpaConfig",
    "ZeroDistanceError",
    "analytic_mean_jacobian",
    "block_inverse_via_projections",
    "bs_ris_channel",
    "channel_params_from_scene",
    "crlb_channel",
    "crlb_position",
    "evaluate_point",
    "fim_channel",
    "fim_position",
    "jacobian",
    "load_config",
    "los_channel",
    "make_design",
    "mean_vector",
    "measurement_matrices",
    "orthogonality_defect",
    "path_loss",
    "position_from_spherical",
    "principal_angles",
    "read_results",
    "run_design_compare",
    "run_heatmap",
    "run_snr_sweep",
    "simulate_measurement",
    "spherical_from_positions",
    "unit_direction",
    "upa_response",
    "write_results",
]
