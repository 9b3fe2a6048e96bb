"""Proportional feedback control of one-dimensional population maps under bounded noise."""
from .analysis import (
    AdditiveDesign,
    ControlDesign,
    PerturbationBand,
    PhiProfile,
    SlopeCertificate,
    additive_d_max,
    additive_design,
    additive_y_points,
    design_control,
    design_nu,
    eval_phi,
    fixed_point,
    invert_f,
    invert_phi,
    mult_interval,
    perturbation_band,
    phi_at_zero,
    phi_profile,
    verify_slope_assumption,
)
from .errors import (
    AnalysisError,
    BoundViolationError,
    DesignError,
    DomainError,
    InvalidMapError,
    NoiseSupportError,
    PFNoiseError,
    PreconditionError,
    RangeError,
    SimulationFault,
    SingularityError,
)
from .maps import (
    GrowthMap,
    MapKind,
    beverton_holt_power,
    bh_example,
    custom,
    gompertz,
    make_map,
    map_from_dict,
    maynard_smith,
    quail,
    quail_example,
    ricker,
    truncated_logistic,
)
from .noise import DeterministicSequence, NoiseSpec, sample_stream
from .sim import (
    PF,
    AddNoise,
    DetAdd,
    DetMult,
    EnsembleResult,
    MultNoise,
    Plain,
    SimConfig,
    Trajectory,
    run,
    run_ensemble,
)
from .stats import ContainmentReport, ShrinkageCurve, containment, liminf_limsup_estimates, shrinkage_sweep

__version__ = "0.1.0"
