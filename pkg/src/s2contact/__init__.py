"""Top-level exports for the s2contact package."""

from .angular import (
    CoupledIndex,
    MatrixElementTable,
    build_me_table,
    clebsch_gordan,
    contact_me,
    threej,
    threej_zero_m,
    y4_analytic,
    y4_quadrature,
)
from .analogs import TorusSumSpec, cm_shift_curve, ho_condition, torus_s2
from .config import CliDefaults, load_defaults
from .controller import (
    CurveRequest,
    EvalRequest,
    FitRequest,
    PredictRequest,
    ReplayRequest,
    ZerosRequest,
    fulfill_request,
)
from .halo import (
    Channel,
    EnergyLevel,
    FitResult,
    HaloSystem,
    MeasuredLevel,
    allowed_bands,
    fit_one_level,
    fit_system,
    fit_two_levels,
    mc_propagate,
    predict_spectrum,
)
from .quantization import (
    BandCurve,
    RootRequest,
    band_zeros,
    diagonalize_oracle,
    poles,
    solve_band,
    z_closed,
    z_general,
    z_sum,
)
from .reports import RunManifest
from .specfun import digamma, digamma_complex, trigamma
from .systems import list_halo_systems, load_halo_system

__all__ = [
    "CliDefaults",
    "load_defaults",
    "digamma",
    "digamma_complex",
    "trigamma",
    "CoupledIndex",
    "MatrixElementTable",
    "threej",
    "threej_zero_m",
    "clebsch_gordan",
    "y4_analytic",
    "y4_quadrature",
    "contact_me",
    "build_me_table",
    "BandCurve",
    "RootRequest",
    "z_closed",
    "z_sum",
    "z_general",
    "poles",
    "band_zeros",
    "solve_band",
    "diagonalize_oracle",
    "TorusSumSpec",
    "ho_condition",
    "torus_s2",
    "cm_shift_curve",
    "Channel",
    "MeasuredLevel",
    "HaloSystem",
    "FitResult",
    "EnergyLevel",
    "allowed_bands",
    "fit_two_levels",
    "fit_one_level",
    "mc_propagate",
    "fit_system",
    "predict_spectrum",
    "list_halo_systems",
    "load_halo_system",
    "RunManifest",
    "EvalRequest",
    "CurveRequest",
    "ZerosRequest",
    "FitRequest",
    "PredictRequest",
    "ReplayRequest",
    "fulfill_request",
]
