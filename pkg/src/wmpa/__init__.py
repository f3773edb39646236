"""Weak-measurement amplification of ultra-small longitudinal phases.

A two-qubit protocol writes an ultra-small signal phase theta onto a
pointer qubit and post-selects the system near-orthogonally, leaving the
pointer carrying an amplified relative phase

    kappa = atan2(sin theta, cos theta + r),   h = dkappa/dtheta|_0 = 1/(1+r),

where r is fixed by the selection geometry. This package provides the
abstract protocol (:mod:`wmpa.protocol`), a polarization bench model that
realizes it with waveplates, beam displacers, and a variable retarder
(:mod:`wmpa.optics`), photon-counting Monte Carlo (:mod:`wmpa.montecarlo`),
calibration and phase inference with uncertainties
(:mod:`wmpa.estimation`), and a CLI (``wmpa``) that writes delimited data,
JSON summaries, and figures (:mod:`wmpa.cli`, :mod:`wmpa.plots`).

Figure rendering lives in :mod:`wmpa.plots`, imported lazily so library
use never pulls in matplotlib.
"""

from wmpa.errors import (
    CalibrationBoundaryError,
    ConfigError,
    DegenerateStateError,
    DivergentMagnificationError,
    GlobalPhaseDegenerateError,
    InsufficientDataError,
    NoSolutionError,
    RailRangeError,
    UndefinedPhaseError,
    UndefinedSensitivityError,
    ValidationError,
    WmpaError,
)
from wmpa.qstate import (
    JOINT_BASIS_LABELS,
    NORM_TOL,
    JointState,
    PureState2,
    Unitary4,
    UnnormalizedState2,
    apply_unitary,
    fidelity,
    project_system,
    sigma_x_expectation,
    tensor,
)
from wmpa.protocol import (
    DEGENERACY_TOL,
    AmplificationParams,
    ProtocolConfig,
    ProtocolOutcome,
    amplified_phase_exact,
    amplified_pointer_first_order,
    controlled_phase_unitary,
    invert_amplification,
    magnification,
    run_protocol,
)
from wmpa.optics import (
    OUTPUT_RAIL,
    POL_H,
    POL_V,
    WORKING_RAILS,
    BeamDisplacer,
    Block,
    EquivalenceReport,
    HalfWavePlate,
    ModeState,
    OpticalTrain,
    PolarizingSplitter,
    VariableRetarder,
    build_figure1_train,
    check_protocol_equivalence,
    hwp_jones,
    lcvr_jones,
    polarization_major,
    postselect_middle_rail,
    simulate_train,
    train_pointer,
)
from wmpa.montecarlo import (
    CountData,
    NoiseModel,
    derive_seed,
    sigma_x_from_counts,
    simulate_counts,
    spawn_seeds,
)
from wmpa.estimation import (
    COMPARISON_MODES,
    CalibrationResult,
    ComparisonReport,
    ComparisonRow,
    PhaseEstimate,
    PhotonBudget,
    analytic_sensitivity,
    calibrate_r,
    calibration_from_r,
    compare_protocols,
    conventional_baseline,
    estimate_phase,
    kappa_from_counts,
    visibility_floor,
)
from wmpa.config import RunConfig, load_settings, resolve_run_config

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "WmpaError",
    "ValidationError",
    "ConfigError",
    "RailRangeError",
    "DegenerateStateError",
    "GlobalPhaseDegenerateError",
    "UndefinedPhaseError",
    "DivergentMagnificationError",
    "NoSolutionError",
    "InsufficientDataError",
    "UndefinedSensitivityError",
    "CalibrationBoundaryError",
    # states
    "NORM_TOL",
    "JOINT_BASIS_LABELS",
    "PureState2",
    "UnnormalizedState2",
    "JointState",
    "Unitary4",
    "tensor",
    "apply_unitary",
    "project_system",
    "sigma_x_expectation",
    "fidelity",
    # protocol
    "DEGENERACY_TOL",
    "ProtocolConfig",
    "ProtocolOutcome",
    "AmplificationParams",
    "controlled_phase_unitary",
    "run_protocol",
    "amplified_phase_exact",
    "magnification",
    "invert_amplification",
    "amplified_pointer_first_order",
    # optics
    "POL_H",
    "POL_V",
    "WORKING_RAILS",
    "OUTPUT_RAIL",
    "ModeState",
    "HalfWavePlate",
    "VariableRetarder",
    "BeamDisplacer",
    "PolarizingSplitter",
    "Block",
    "OpticalTrain",
    "hwp_jones",
    "lcvr_jones",
    "build_figure1_train",
    "simulate_train",
    "postselect_middle_rail",
    "polarization_major",
    "train_pointer",
    "EquivalenceReport",
    "check_protocol_equivalence",
    # monte carlo
    "NoiseModel",
    "CountData",
    "simulate_counts",
    "sigma_x_from_counts",
    "spawn_seeds",
    "derive_seed",
    # estimation
    "CalibrationResult",
    "PhaseEstimate",
    "PhotonBudget",
    "ComparisonRow",
    "ComparisonReport",
    "COMPARISON_MODES",
    "calibrate_r",
    "calibration_from_r",
    "kappa_from_counts",
    "estimate_phase",
    "analytic_sensitivity",
    "conventional_baseline",
    "visibility_floor",
    "compare_protocols",
    # config
    "RunConfig",
    "load_settings",
    "resolve_run_config",
]
