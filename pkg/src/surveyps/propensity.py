"""Population- and sample-level propensity scores under four survey-weight modes.

=====  ===========================  ==============================
mode   regression weights           survey weight as a covariate
=====  ===========================  ==============================
U_PS   1                            no
W_PS   survey weight                no
C_PS   1                            yes (raw scale)
CW_PS  survey weight                yes (raw scale)
=====  ===========================  ==============================

In retrospective designs a second, unweighted fit on the baseline covariates
gives the in-sample score ``e_fp``; the ratio of the two scores links the
arm-specific sampling probability to the marginal one.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .data import DesignMode, SurveySample
from .errors import MissingSampleLevelFit, SurveyPSError
from .glm import DesignMatrix, GlmFit, clip_probability, fit_weighted_logistic

WEIGHT_COVARIATE = "survey_weight"


class PsMode(str, enum.Enum):
    U_PS = "u"
    W_PS = "w"
    C_PS = "c"
    CW_PS = "cw"

    @property
    def weighted(self) -> bool:
        return self in (PsMode.W_PS, PsMode.CW_PS)

    @property
    def weight_as_covariate(self) -> bool:
        return self in (PsMode.C_PS, PsMode.CW_PS)


@dataclass(frozen=True)
class PsSpec:
    mode: PsMode = PsMode.W_PS
    covariate_columns: tuple[int, ...] | None = None
    add_intercept: bool = True
    trunc_alpha: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", PsMode(self.mode))
        if self.covariate_columns is not None:
            cols = tuple(int(c) for c in self.covariate_columns)
            if not cols:
                raise ValueError("covariate_columns must be nonempty")
            object.__setattr__(self, "covariate_columns", cols)
        if not 0.0 <= self.trunc_alpha <= 0.1:
            raise ValueError("trunc_alpha must lie in [0, 0.1]")

    def columns(self, sample: SurveySample) -> tuple[int, ...]:
        if self.covariate_columns is None:
            return tuple(range(sample.X.p))
        return self.covariate_columns


@dataclass(frozen=True)
class PsFit:
    """Fitted propensity scores and everything the variance code needs to refit them."""

    spec: PsSpec
    beta_sp: np.ndarray
    e_sp: np.ndarray
    design_sp: DesignMatrix
    regression_weight: np.ndarray
    fit_sp: GlmFit
    beta_fp: np.ndarray | None = None
    e_fp: np.ndarray | None = None
    r_z: np.ndarray | None = None
    design_fp: DesignMatrix | None = None
    fit_fp: GlmFit | None = None

    @property
    def diagnostics(self) -> tuple[GlmFit, GlmFit | None]:
        return self.fit_sp, self.fit_fp


def baseline_design(sample: SurveySample, spec: PsSpec) -> DesignMatrix:
    cols = list(spec.columns(sample))
    names = [sample.covariate_names[c] for c in cols]
    return DesignMatrix.build(sample.X.values[:, cols], names, add_intercept=spec.add_intercept)


def population_design(sample: SurveySample, spec: PsSpec) -> DesignMatrix:
    """Design ``X*`` of the population-level model.

    A constant weight column is aliased with the intercept and carries no
    information, so it is left out.
    """
    base = baseline_design(sample, spec)
    w = sample.survey_weight
    if not spec.mode.weight_as_covariate or np.ptp(w) <= 1e-12 * np.max(np.abs(w)):
        return base
    return DesignMatrix(
        np.column_stack([base.values, w]), (*base.column_names, WEIGHT_COVARIATE)
    )


def fit_propensity(sample: SurveySample, spec: PsSpec) -> PsFit:
    design_sp = population_design(sample, spec)
    reg_w = sample.survey_weight if spec.mode.weighted else np.ones(sample.n)
    try:
        fit_sp = fit_weighted_logistic(design_sp, sample.z, reg_w)
    except SurveyPSError as exc:
        raise exc.tagged(module="propensity", arm="e_sp")

    if sample.design_mode is DesignMode.PROSPECTIVE:
        return PsFit(
            spec=spec,
            beta_sp=fit_sp.coefficients,
            e_sp=fit_sp.fitted,
            design_sp=design_sp,
            regression_weight=reg_w,
            fit_sp=fit_sp,
        )

    design_fp = baseline_design(sample, spec)
    try:
        fit_fp = fit_weighted_logistic(design_fp, sample.z, np.ones(sample.n))
    except SurveyPSError as exc:
        raise exc.tagged(module="propensity", arm="e_fp")
    return PsFit(
        spec=spec,
        beta_sp=fit_sp.coefficients,
        e_sp=fit_sp.fitted,
        design_sp=design_sp,
        regression_weight=reg_w,
        fit_sp=fit_sp,
        beta_fp=fit_fp.coefficients,
        e_fp=fit_fp.fitted,
        r_z=compute_ratio_rz(fit_sp.fitted, fit_fp.fitted, sample.z),
        design_fp=design_fp,
        fit_fp=fit_fp,
    )


def compute_ratio_rz(e_sp: np.ndarray, e_fp: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``e_sp / e_fp`` for treated units and ``(1 - e_sp) / (1 - e_fp)`` for controls."""
    e_sp = np.asarray(e_sp, dtype=float)
    e_fp = np.asarray(e_fp, dtype=float)
    z = np.asarray(z, dtype=float)
    for name, e in (("e_sp", e_sp), ("e_fp", e_fp)):
        if not np.all(np.isfinite(e)) or np.any((e <= 0) | (e >= 1)):
            raise ValueError(f"{name} must lie strictly inside (0, 1)")
    return np.where(z == 1.0, e_sp / e_fp, (1.0 - e_sp) / (1.0 - e_fp))


def selection_probability(
    survey_weight: np.ndarray, r_z: np.ndarray | None, design_mode: DesignMode
) -> np.ndarray:
    p = 1.0 / np.asarray(survey_weight, dtype=float)
    if design_mode is DesignMode.RETROSPECTIVE:
        p = r_z * p
    return np.minimum(p, 1.0)


def marginal_selection_probability(sample: SurveySample, ps: PsFit) -> np.ndarray:
    """``P(S=1 | X)`` per unit: ``r_z * p_z`` (retrospective) or ``p`` (prospective)."""
    if sample.design_mode is DesignMode.RETROSPECTIVE and ps.r_z is None:
        raise MissingSampleLevelFit(
            "retrospective design needs the sample-level propensity fit", module="propensity"
        )
    return selection_probability(sample.survey_weight, ps.r_z, sample.design_mode)


def select_columns(sample: SurveySample, names: Sequence[str]) -> tuple[int, ...]:
    index = {name: j for j, name in enumerate(sample.covariate_names)}
    return tuple(index[name] for name in names)


__all__ = [
    "PsFit",
    "PsMode",
    "PsSpec",
    "baseline_design",
    "clip_probability",
    "compute_ratio_rz",
    "fit_propensity",
    "marginal_selection_probability",
    "population_design",
    "selection_probability",
]
