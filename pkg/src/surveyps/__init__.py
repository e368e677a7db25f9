"""Survey-weighted propensity score weighting with sandwich inference."""

from .balancing import EstimandSpec, Tilt, UnitWeights, build_unit_weights, tilting_value, unit_weight_pair
from .data import DesignMode, SurveySample
from .errors import SurveyPSError
from .estimators import (
    EstimateResult,
    EstimatorKind,
    OutcomeFit,
    estimate,
    estimate_augmented,
    estimate_psw,
    fit_outcome_models,
)
from .glm import DesignMatrix, GlmFit, fit_weighted_linear, fit_weighted_logistic
from .mestimation import EeStack, ThetaStack, assemble_sandwich, evaluate_psi
from .propensity import PsFit, PsMode, PsSpec, compute_ratio_rz, fit_propensity, marginal_selection_probability

__version__ = "0.1.0"

__all__ = [
    "DesignMatrix",
    "DesignMode",
    "EeStack",
    "EstimandSpec",
    "EstimateResult",
    "EstimatorKind",
    "GlmFit",
    "OutcomeFit",
    "PsFit",
    "PsMode",
    "PsSpec",
    "SurveyPSError",
    "SurveySample",
    "ThetaStack",
    "Tilt",
    "UnitWeights",
    "assemble_sandwich",
    "build_unit_weights",
    "compute_ratio_rz",
    "estimate",
    "estimate_augmented",
    "estimate_psw",
    "evaluate_psi",
    "fit_outcome_models",
    "fit_propensity",
    "fit_weighted_linear",
    "fit_weighted_logistic",
    "marginal_selection_probability",
    "tilting_value",
    "unit_weight_pair",
]
