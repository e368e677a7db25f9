"""Weighting (PSW) and augmented (MOM, CVR, WET) treatment-effect estimators.

All four are ratio estimators in the balancing weights, so rescaling the
survey weights by a constant leaves every point estimate unchanged.

The augmented estimate is ``tau = v1 + v2 - v3`` with

    v1 = sum(h_p (m1 - m0)) / sum(h_p)
    v2 = sum(w1 z (y - m1)) / sum(w1 z)
    v3 = sum(w0 (1 - z) (y - m0)) / sum(w0 (1 - z))

and its standard error comes from the stacked sandwich in
:mod:`surveyps.mestimation`. PSW has a closed-form influence function.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .balancing import EstimandSpec, UnitWeights, build_unit_weights, smooth_tilt_derivative
from .data import DesignMode, SurveySample
from .errors import ConfigError, EmptyArmWeight, SurveyPSError
from .glm import DesignMatrix, GlmFit, fit_weighted_linear
from .mestimation import (
    EeStack,
    EstimatorKind,
    StackConfig,
    StackData,
    ThetaStack,
    assemble_sandwich,
)
from .propensity import PsFit, PsSpec, fit_propensity

Z_CRIT = 1.96


class RegressionWeightsKind(str, enum.Enum):
    NONE = "none"
    BALANCING = "balancing"


@dataclass(frozen=True)
class EstimateResult:
    estimator: EstimatorKind
    estimand: EstimandSpec
    tau: float
    se: float
    ci_low: float
    ci_high: float
    components: tuple[float, float, float]
    n_used: int
    stack: EeStack | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_estimate(cls, estimator, estimand, tau, se, components, n_used, stack=None):
        se = float(se)
        return cls(
            estimator=EstimatorKind(estimator),
            estimand=estimand,
            tau=float(tau),
            se=se,
            ci_low=float(tau) - Z_CRIT * se,
            ci_high=float(tau) + Z_CRIT * se,
            components=tuple(float(c) for c in components),
            n_used=int(n_used),
            stack=stack,
        )

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator.value,
            "estimand": self.estimand.key,
            "estimand_label": self.estimand.label,
            "alpha": self.estimand.alpha,
            "tau": self.tau,
            "se": self.se,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "components": list(self.components),
            "n_used": self.n_used,
        }


@dataclass(frozen=True)
class OutcomeFit:
    """Arm-specific outcome regressions with predictions for every unit.

    ``clever1``/``clever0`` record whether the arm's balancing weight entered
    as an extra regressor; a weight that is constant within the arm is
    aliased with the intercept and left out.
    """

    kind: EstimatorKind
    alpha1: np.ndarray
    alpha0: np.ndarray
    m1: np.ndarray
    m0: np.ndarray
    regression_weights_kind: RegressionWeightsKind
    design: DesignMatrix
    clever_terms: tuple[np.ndarray, np.ndarray] | None = None
    clever1: bool = False
    clever0: bool = False
    fits: tuple[GlmFit, GlmFit] | None = field(default=None, repr=False)


def _arm_totals(sample: SurveySample, uw: UnitWeights) -> tuple[float, float]:
    z = sample.z
    s1 = float(np.sum(uw.w1 * z))
    s0 = float(np.sum(uw.w0 * (1.0 - z)))
    if not s1 > 0:
        raise EmptyArmWeight("treated arm carries no balancing weight", module="estimators", arm="treated")
    if not s0 > 0:
        raise EmptyArmWeight("control arm carries no balancing weight", module="estimators", arm="control")
    return s1, s0


def _n_used(uw: UnitWeights) -> int:
    return int(np.count_nonzero(uw.h > 0))


def stack_data(sample: SurveySample, ps: PsFit, of: OutcomeFit | None = None) -> StackData:
    return StackData(
        z=sample.z,
        y=sample.y,
        survey_weight=sample.survey_weight,
        ps_weight=ps.regression_weight,
        x_sp=ps.design_sp.values,
        x_fp=None if ps.design_fp is None else ps.design_fp.values,
        x_out=None if of is None else of.design.values,
    )


def _require_spec(uw: UnitWeights) -> EstimandSpec:
    if uw.spec is None:
        raise ConfigError("unit weights carry no estimand", module="estimators")
    return uw.spec


def psw_influence(sample: SurveySample, ps: PsFit, uw: UnitWeights) -> tuple[float, float, np.ndarray]:
    """``(tau1, tau0, I)`` where ``I`` is the per-unit influence of ``tau``.

    Each arm is normalized by its own weight mass; the propensity-score
    correction enters through ``H' E^-1 psi_beta``.
    """
    spec = _require_spec(uw)
    z, y = sample.z, sample.y
    s1, s0 = _arm_totals(sample, uw)
    tau1 = float(np.sum(uw.w1 * z * y) / s1)
    tau0 = float(np.sum(uw.w0 * (1.0 - z) * y) / s0)
    n = sample.n
    nu1, nu0 = s1 / n, s0 / n

    X = ps.design_sp.values
    e = ps.e_sp
    s = sample.survey_weight
    h = uw.h
    dh = smooth_tilt_derivative(spec, e) * uw.mask
    dw1 = (s * (dh * e - h) * (1.0 - e) / e)[:, None] * X
    dw0 = (s * (dh * (1.0 - e) + h) * e / (1.0 - e))[:, None] * X
    H1 = np.mean((z * (y - tau1))[:, None] * dw1, axis=0)
    H0 = np.mean(((1.0 - z) * (y - tau0))[:, None] * dw0, axis=0)

    wps = ps.regression_weight
    E = (X * (wps * e * (1.0 - e))[:, None]).T @ X / n
    psi_beta = (wps * (z - e))[:, None] * X
    corr1 = psi_beta @ np.linalg.solve(E, H1)
    corr0 = psi_beta @ np.linalg.solve(E, H0)

    infl = (z * uw.w1 * (y - tau1) + corr1) / nu1 - ((1.0 - z) * uw.w0 * (y - tau0) + corr0) / nu0
    return tau1, tau0, infl


def estimate_psw(
    sample: SurveySample, ps: PsFit, uw: UnitWeights, *, variance: str = "analytic"
) -> EstimateResult:
    """Hajek-weighted difference of arm means.

    ``variance="analytic"`` uses the closed-form influence function;
    ``variance="stack"`` runs the same estimator through the numeric sandwich.
    """
    spec = _require_spec(uw)
    if variance == "analytic":
        tau1, tau0, infl = psw_influence(sample, ps, uw)
        se = np.sqrt(np.sum(infl**2)) / sample.n
        return EstimateResult.from_estimate(
            EstimatorKind.PSW, spec, tau1 - tau0, se, (0.0, tau1, tau0), _n_used(uw)
        )
    if variance != "stack":
        raise ValueError("variance must be 'analytic' or 'stack'")

    s1, s0 = _arm_totals(sample, uw)
    z, y = sample.z, sample.y
    tau1 = float(np.sum(uw.w1 * z * y) / s1)
    tau0 = float(np.sum(uw.w0 * (1.0 - z) * y) / s0)
    theta = ThetaStack(
        v1=0.0,
        v2=tau1,
        v3=tau0,
        alpha0=np.empty(0),
        alpha1=np.empty(0),
        beta_fp=ps.beta_fp,
        beta_sp=ps.beta_sp,
    )
    config = StackConfig(EstimatorKind.PSW, spec, sample.design_mode, uw.mask)
    stack = assemble_sandwich(stack_data(sample, ps), theta, config)
    return EstimateResult.from_estimate(
        EstimatorKind.PSW, spec, tau1 - tau0, stack.tau_se, (0.0, tau1, tau0), _n_used(uw), stack
    )


def outcome_design(sample: SurveySample, columns: Sequence[int] | None = None) -> DesignMatrix:
    cols = list(range(sample.X.p)) if columns is None else [int(c) for c in columns]
    names = [sample.covariate_names[c] for c in cols]
    return DesignMatrix.build(sample.X.values[:, cols], names, add_intercept=True)


def _varies(v: np.ndarray) -> bool:
    scale = np.max(np.abs(v)) if v.size else 0.0
    return bool(v.size) and float(np.ptp(v)) > 1e-12 * max(scale, 1e-300)


def _fit_arm(X: np.ndarray, y: np.ndarray, w: np.ndarray, arm: str) -> GlmFit:
    try:
        return fit_weighted_linear(X, y, w)
    except SurveyPSError as exc:
        raise exc.tagged(module="estimators", arm=arm)
    except ValueError as exc:
        raise ConfigError(f"{arm} outcome model: {exc}", module="estimators", arm=arm) from exc


def fit_outcome_models(
    sample: SurveySample,
    uw: UnitWeights,
    kind: EstimatorKind,
    outcome_columns: Sequence[int] | None = None,
) -> OutcomeFit:
    """Per-arm identity-link outcome regressions.

    MOM fits each arm unweighted; CVR appends the arm's balancing weight as a
    regressor; WET uses the balancing weights as regression weights (units
    with zero weight drop out of the fit but still receive predictions).
    """
    kind = EstimatorKind(kind)
    if not kind.augmented:
        raise ConfigError("outcome models exist only for MOM, CVR and WET", module="estimators")
    design = outcome_design(sample, outcome_columns)
    Xo = design.values
    t = sample.z == 1.0
    c = ~t

    X1, X0 = Xo, Xo
    clever1 = clever0 = False
    if kind is EstimatorKind.CVR:
        clever1 = _varies(uw.w1[t])
        clever0 = _varies(uw.w0[c])
        if clever1:
            X1 = np.column_stack([Xo, uw.w1])
        if clever0:
            X0 = np.column_stack([Xo, uw.w0])

    if kind is EstimatorKind.WET:
        rows1 = t & (uw.w1 > 0)
        rows0 = c & (uw.w0 > 0)
        fit1 = _fit_arm(X1[rows1], sample.y[rows1], uw.w1[rows1], "treated")
        fit0 = _fit_arm(X0[rows0], sample.y[rows0], uw.w0[rows0], "control")
        rw_kind = RegressionWeightsKind.BALANCING
    else:
        fit1 = _fit_arm(X1[t], sample.y[t], np.ones(int(t.sum())), "treated")
        fit0 = _fit_arm(X0[c], sample.y[c], np.ones(int(c.sum())), "control")
        rw_kind = RegressionWeightsKind.NONE

    return OutcomeFit(
        kind=kind,
        alpha1=fit1.coefficients,
        alpha0=fit0.coefficients,
        m1=X1 @ fit1.coefficients,
        m0=X0 @ fit0.coefficients,
        regression_weights_kind=rw_kind,
        design=design,
        clever_terms=(uw.w1, uw.w0) if kind is EstimatorKind.CVR else None,
        clever1=clever1,
        clever0=clever0,
        fits=(fit1, fit0),
    )


def augmented_components(
    sample: SurveySample, uw: UnitWeights, m1: np.ndarray, m0: np.ndarray
) -> tuple[float, float, float]:
    z, y = sample.z, sample.y
    s1, s0 = _arm_totals(sample, uw)
    hp_total = float(np.sum(uw.h_over_pS))
    if not hp_total > 0:
        raise EmptyArmWeight("tilted population has zero mass", module="estimators")
    v1 = float(np.sum(uw.h_over_pS * (m1 - m0)) / hp_total)
    v2 = float(np.sum(uw.w1 * z * (y - m1)) / s1)
    v3 = float(np.sum(uw.w0 * (1.0 - z) * (y - m0)) / s0)
    return v1, v2, v3


def estimate_augmented(
    sample: SurveySample,
    ps: PsFit,
    uw: UnitWeights,
    of: OutcomeFit,
    kind: EstimatorKind | None = None,
) -> EstimateResult:
    spec = _require_spec(uw)
    kind = of.kind if kind is None else EstimatorKind(kind)
    if kind is not of.kind:
        raise ConfigError(
            f"outcome fit is {of.kind.name}, estimator requested {kind.name}", module="estimators"
        )
    v1, v2, v3 = augmented_components(sample, uw, of.m1, of.m0)
    theta = ThetaStack(
        v1=v1,
        v2=v2,
        v3=v3,
        alpha0=of.alpha0,
        alpha1=of.alpha1,
        beta_fp=ps.beta_fp,
        beta_sp=ps.beta_sp,
    )
    config = StackConfig(kind, spec, sample.design_mode, uw.mask, of.clever1, of.clever0)
    stack = assemble_sandwich(stack_data(sample, ps, of), theta, config)
    return EstimateResult.from_estimate(
        kind, spec, v1 + v2 - v3, stack.tau_se, (v1, v2, v3), _n_used(uw), stack
    )


def estimate(
    sample: SurveySample,
    kind: EstimatorKind | str,
    estimand: EstimandSpec,
    ps_spec: PsSpec | None = None,
    outcome_columns: Sequence[int] | None = None,
    *,
    ps: PsFit | None = None,
) -> EstimateResult:
    """Fit everything needed for one (estimator, estimand) pair."""
    kind = EstimatorKind(kind)
    if ps is None:
        ps = fit_propensity(sample, ps_spec if ps_spec is not None else PsSpec())
    uw = build_unit_weights(sample, ps, estimand)
    if kind is EstimatorKind.PSW:
        return estimate_psw(sample, ps, uw)
    of = fit_outcome_models(sample, uw, kind, outcome_columns)
    return estimate_augmented(sample, ps, uw, of)


__all__ = [
    "DesignMode",
    "EstimateResult",
    "EstimatorKind",
    "OutcomeFit",
    "RegressionWeightsKind",
    "Z_CRIT",
    "augmented_components",
    "estimate",
    "estimate_augmented",
    "estimate_psw",
    "fit_outcome_models",
    "outcome_design",
    "psw_influence",
    "stack_data",
]
