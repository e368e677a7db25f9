from dataclasses import replace

import numpy as np
import pytest

from helpers import random_sample, toy12_sample
from surveyps import (
    EstimandSpec,
    EstimatorKind,
    PsSpec,
    Tilt,
    assemble_sandwich,
    build_unit_weights,
    estimate,
    estimate_psw,
    evaluate_psi,
    fit_outcome_models,
    fit_propensity,
)
from surveyps.data import DesignMode
from surveyps.errors import DimensionMismatch, SingularA
from surveyps.estimators import stack_data
from surveyps.mestimation import StackConfig, StackData, psi_matrix

KEYS = ["ate", "att", "atc", "ato"]


def run(sample, kind, key, mode="w"):
    return estimate(sample, kind, EstimandSpec(Tilt(key)), PsSpec(mode))


@pytest.mark.parametrize("kind", ["mom", "cvr", "wet"])
@pytest.mark.parametrize("key", KEYS)
def test_stack_root_at_plug_in_estimates(toy12, kind, key):
    res = run(toy12, kind, key)
    assert np.max(np.abs(res.stack.psi_mean)) <= 1e-6


@pytest.mark.parametrize("key", KEYS + ["trunc"])
def test_psw_stack_agrees_with_influence_function(toy12, key):
    spec = EstimandSpec(Tilt.TRUNCATED, 0.1) if key == "trunc" else EstimandSpec(Tilt(key))
    ps = fit_propensity(toy12, PsSpec())
    uw = build_unit_weights(toy12, ps, spec)
    a = estimate_psw(toy12, ps, uw)
    b = estimate_psw(toy12, ps, uw, variance="stack")
    assert b.se == pytest.approx(a.se, rel=1e-8)
    assert np.max(np.abs(b.stack.psi_mean)) <= 1e-10


def toy12_mom_stack(sample):
    ps = fit_propensity(sample, PsSpec())
    uw = build_unit_weights(sample, ps, EstimandSpec())
    of = fit_outcome_models(sample, uw, EstimatorKind.MOM)
    config = StackConfig(EstimatorKind.MOM, EstimandSpec(), sample.design_mode, uw.mask)
    return stack_data(sample, ps, of), config


def test_single_unit_rows_match_hand_evaluation(toy12, mest_oracle):
    case = mest_oracle["single_unit"]
    data, config = toy12_mom_stack(toy12)
    unit = case["unit"]
    config = replace(config, mask=config.mask[[unit]])
    psi = evaluate_psi(data.take(unit), np.array(case["theta"]), config)
    blocks = case["blocks"]
    expected = np.concatenate([blocks[k] for k in ("v1", "v2", "v3", "or0", "or1", "fp", "sp")])
    np.testing.assert_allclose(psi, expected, rtol=1e-12, atol=1e-14)


def test_single_unit_record_is_required(toy12):
    data, config = toy12_mom_stack(toy12)
    with pytest.raises(DimensionMismatch):
        evaluate_psi(data.take([0, 1]), np.zeros(15), config)


@pytest.mark.parametrize("design", ["retro", "pro"])
def test_intercept_only_stack_matches_closed_form(toy12, mest_oracle, design):
    case = mest_oracle["intercept_only"][design]
    ones = np.ones((toy12.n, 1))
    mode = DesignMode(design)
    data = StackData(
        z=toy12.z,
        y=toy12.y,
        survey_weight=toy12.survey_weight,
        ps_weight=toy12.survey_weight,
        x_sp=ones,
        x_fp=ones if mode is DesignMode.RETROSPECTIVE else None,
        x_out=ones,
    )
    config = StackConfig(EstimatorKind.MOM, EstimandSpec(), mode, np.ones(toy12.n, dtype=bool))
    stack = assemble_sandwich(data, np.array(case["theta"]), config)
    assert np.max(np.abs(stack.psi_mean)) <= 1e-12
    assert stack.tau_variance == pytest.approx(case["var"], rel=1e-6)


@pytest.mark.parametrize("kind", ["psw", "mom", "cvr", "wet"])
def test_duplicating_units_halves_variance(kind):
    s = random_sample(61, n=200)
    doubled = s.take(np.concatenate([np.arange(s.n), np.arange(s.n)]))
    a = run(s, kind, "ato")
    b = run(doubled, kind, "ato")
    assert b.tau == pytest.approx(a.tau, abs=1e-12)
    assert b.se**2 == pytest.approx(a.se**2 / 2, rel=1e-8)


@pytest.mark.parametrize("kind", ["psw", "mom", "cvr", "wet"])
@pytest.mark.parametrize("key", KEYS)
def test_toy12_se_matches_numerical_oracle(toy12, mest_oracle, kind, key):
    ref = mest_oracle["toy12"][f"{kind}/{key}"]
    res = run(toy12, kind, key)
    assert res.tau == pytest.approx(ref["tau"], abs=1e-10)
    assert res.se == pytest.approx(ref["se"], rel=1e-6)


@pytest.mark.parametrize("kind", ["mom", "wet"])
def test_prospective_stack_matches_numerical_oracle(mest_oracle, kind):
    ref = mest_oracle["toy12"][f"{kind}/ate/pro"]
    res = run(toy12_sample("pro"), kind, "ate")
    assert res.stack.psi_dim == 3 + 3 + 3 + 3
    assert res.se == pytest.approx(ref["se"], rel=1e-6)


@pytest.mark.parametrize("kind", ["mom", "cvr", "wet"])
def test_meat_matrix_is_symmetric_psd(kind):
    res = run(random_sample(62), kind, "ate", mode="cw")
    B = res.stack.B
    np.testing.assert_array_equal(B, B.T)
    eig = np.linalg.eigvalsh(B)
    assert eig.min() >= -1e-10 * max(1.0, eig.max())
    assert np.all(np.diag(res.stack.V) >= 0)


def test_wrong_theta_length_raises(toy12):
    data, config = toy12_mom_stack(toy12)
    with pytest.raises(DimensionMismatch) as info:
        psi_matrix(data, np.zeros(14), config)
    assert info.value.code == "E_DIMENSION"


def test_aliased_propensity_columns_make_bread_singular(toy12):
    data, config = toy12_mom_stack(toy12)
    x = data.x_sp
    aliased = StackData(
        z=data.z,
        y=data.y,
        survey_weight=data.survey_weight,
        ps_weight=data.ps_weight,
        x_sp=np.column_stack([x, x[:, 1]]),
        x_fp=data.x_fp,
        x_out=data.x_out,
    )
    theta = np.zeros(config.layout(aliased).dim)
    with pytest.raises(SingularA) as info:
        assemble_sandwich(aliased, theta, config)
    assert info.value.code == "E_SINGULAR_A"
