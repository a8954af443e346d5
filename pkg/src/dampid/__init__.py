"""Identify an (anti-)damping coefficient and the initial state of a
Riesz-spectral PDE from one boundary output."""

from .core import (
    EigenStructure,
    GrowthMap,
    Interval,
    ModalState,
    SpectralModel,
    check_gap_condition,
    eigenvalue,
)
from .errors import (
    BoundUnavailable,
    CoefficientDegeneracyError,
    DampidError,
    DomainError,
    GapWindowError,
    NumericalError,
    PriorSetError,
    SingularParameterError,
    ZeroSignalError,
)
from .identify import (
    EstimationReport,
    InghamConstants,
    WindowSpec,
    epsilon_snr,
    error_bound_f,
    estimate_q,
    estimate_sweep,
    ingham_constants,
    ingham_lower_bound_check,
    reconstruct_initial,
)
from .signal import (
    DisturbanceSpec,
    DisturbedSignal,
    GridSignal,
    ModalSignal,
    apply_disturbance,
    disturb,
    synthesize,
    weighted_exponential_integral,
    window_l2_norm,
)
from .systems import (
    InitialData,
    SchrodingerModel,
    StringsModel,
    WaveModel,
    closed_form,
    evaluate_eigenfunction,
    make_model,
    observation_coefficient,
    project_initial,
)

__version__ = "0.1.0"
