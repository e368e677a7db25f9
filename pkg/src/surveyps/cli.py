"""Command-line front end: ``estimate``, ``balance`` and ``simulate``.

Errors are reported as one JSON object on stderr with a stable ``error``
code and a nonzero exit status. Output files are written to a temporary
file and renamed into place only once the whole report exists.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import tempfile
from collections.abc import Sequence
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .balancing import EstimandSpec, Tilt, build_unit_weights
from .data import DesignMode, SurveySample
from .diagnostics import balance_to_csv, balance_to_json, psmd_table, weight_summary
from .errors import ConfigError, ParseError, SurveyPSError
from .estimators import EstimateResult, estimate_augmented, estimate_psw, fit_outcome_models
from .glm import DesignMatrix
from .mestimation import EstimatorKind
from .propensity import PsFit, PsMode, PsSpec, fit_propensity, select_columns
from .simulation import load_scenario, run_scenario

EXIT_OK = 0
EXIT_ESTIMATION = 1
EXIT_USAGE = 2

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
RESULT_CSV_COLUMNS = (
    "estimand",
    "estimator",
    "tau",
    "se",
    "ci_low",
    "ci_high",
    "v1",
    "v2",
    "v3",
    "n_used",
)


@dataclass(frozen=True)
class RunConfig:
    input: Path
    treatment: str
    outcome: str
    survey_weight: str
    covariates: tuple[str, ...]
    design_mode: DesignMode = DesignMode.RETROSPECTIVE
    ps_mode: PsMode = PsMode.W_PS
    estimands: tuple[EstimandSpec, ...] = (EstimandSpec(Tilt.COMBINED),)
    estimators: tuple[EstimatorKind, ...] = (EstimatorKind.PSW,)
    trunc_alpha: float = 0.0
    output_format: str = "json"
    out: Path | None = None
    seed: int | None = None
    ps_covariates: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        mapped = [self.treatment, self.outcome, self.survey_weight, *self.covariates]
        if len(set(self.covariates)) != len(self.covariates):
            raise ConfigError("covariate list contains duplicate names", module="cli")
        if not self.covariates:
            raise ConfigError("at least one covariate is required", module="cli")
        if len(set(mapped)) != len(mapped):
            raise ConfigError("treatment, outcome, weight and covariate columns must be distinct", module="cli")
        if self.ps_covariates is not None:
            if not self.ps_covariates or len(set(self.ps_covariates)) != len(self.ps_covariates):
                raise ConfigError("--ps-covariates must list distinct names", module="cli")
            extra = [c for c in self.ps_covariates if c not in self.covariates]
            if extra:
                raise ConfigError(f"--ps-covariates not among --covariates: {extra}", module="cli")

    def ps_spec(self, sample: SurveySample) -> PsSpec:
        columns = None if self.ps_covariates is None else select_columns(sample, self.ps_covariates)
        return PsSpec(self.ps_mode, columns, True, self.trunc_alpha)


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of printing usage and exiting."""

    def error(self, message):  # noqa: D401
        raise ConfigError(message, module="cli")


def read_csv_columns(path: Path, names: Sequence[str]) -> dict[str, np.ndarray]:
    """Read the requested numeric columns; header required, no missing values."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {str(path)!r}: {exc.strerror}", module="cli") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("input is empty; a header row is required", module="cli") from None
    if len(set(header)) != len(header):
        raise ParseError("header contains duplicate column names", module="cli")
    missing = [n for n in names if n not in header]
    if missing:
        raise ConfigError(f"column(s) not found in input: {', '.join(missing)}", module="cli")
    index = [header.index(n) for n in names]
    cols: list[list[float]] = [[] for _ in names]
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}", module="cli")
        for out, j in zip(cols, index):
            cell = row[j].strip()
            if not _NUMBER.match(cell):
                raise ParseError(
                    f"line {lineno}, column {header[j]!r}: {cell!r} is not a decimal number",
                    module="cli",
                )
            out.append(float(cell))
    if not cols[0]:
        raise ParseError("input has a header but no data rows", module="cli")
    return {n: np.asarray(c) for n, c in zip(names, cols)}


def load_sample(cfg: RunConfig) -> SurveySample:
    cols = read_csv_columns(cfg.input, [cfg.treatment, cfg.outcome, cfg.survey_weight, *cfg.covariates])
    try:
        X = DesignMatrix(np.column_stack([cols[c] for c in cfg.covariates]), cfg.covariates)
        return SurveySample(
            X=X,
            z=cols[cfg.treatment],
            y=cols[cfg.outcome],
            survey_weight=cols[cfg.survey_weight],
            design_mode=cfg.design_mode,
        )
    except ValueError as exc:
        raise ParseError(str(exc), module="cli") from exc


def _check_size(sample: SurveySample, cfg: RunConfig) -> None:
    p = len(cfg.ps_covariates or cfg.covariates) + 1 + int(cfg.ps_mode.weight_as_covariate)
    if sample.n < 2 * p:
        raise ConfigError(f"need at least {2 * p} rows for {p} model columns, got {sample.n}", module="cli")


def _fit_summary(ps: PsFit) -> dict:
    out = {}
    for label, fit in (("e_sp", ps.fit_sp), ("e_fp", ps.fit_fp)):
        if fit is not None:
            out[label] = {
                "converged": fit.converged,
                "iterations": fit.iterations,
                "deviance": fit.deviance,
                "coefficients": fit.coefficients.tolist(),
            }
    out["e_sp_range"] = [float(ps.e_sp.min()), float(ps.e_sp.max())]
    return out


def run_estimates(sample: SurveySample, cfg: RunConfig) -> tuple[PsFit, list[EstimateResult]]:
    ps = fit_propensity(sample, cfg.ps_spec(sample))
    results = []
    for estimand in cfg.estimands:
        uw = build_unit_weights(sample, ps, estimand)
        for kind in cfg.estimators:
            if kind is EstimatorKind.PSW:
                results.append(estimate_psw(sample, ps, uw))
            else:
                of = fit_outcome_models(sample, uw, kind)
                results.append(estimate_augmented(sample, ps, uw, of))
    return ps, results


def format_estimates(cfg: RunConfig, sample: SurveySample, ps: PsFit, results: list[EstimateResult]) -> str:
    if cfg.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_CSV_COLUMNS)
        for r in results:
            nums = (r.tau, r.se, r.ci_low, r.ci_high, *r.components)
            writer.writerow([r.estimand.key, r.estimator.value, *(format(v, ".17g") for v in nums), r.n_used])
        return buf.getvalue()
    payload = {
        "n": sample.n,
        "design": cfg.design_mode.value,
        "ps_mode": cfg.ps_mode.value,
        "trunc_alpha": cfg.trunc_alpha,
        "ps_diagnostics": _fit_summary(ps),
        "results": [r.to_dict() for r in results],
    }
    return json.dumps(payload, indent=2) + "\n"


def cmd_estimate(cfg: RunConfig) -> str:
    sample = load_sample(cfg)
    _check_size(sample, cfg)
    ps, results = run_estimates(sample, cfg)
    return format_estimates(cfg, sample, ps, results)


def cmd_balance(cfg: RunConfig) -> str:
    sample = load_sample(cfg)
    _check_size(sample, cfg)
    ps = fit_propensity(sample, cfg.ps_spec(sample))
    if len(cfg.estimands) != 1:
        raise ConfigError("balance takes exactly one --estimand", module="cli")
    uw = build_unit_weights(sample, ps, cfg.estimands[0])
    rows = psmd_table(sample, uw)
    if cfg.output_format == "csv":
        return balance_to_csv(rows)
    payload = json.loads(balance_to_json(rows))
    payload["estimand"] = cfg.estimands[0].key
    payload["weights"] = {
        arm: vars(summary) for arm, summary in weight_summary(uw, sample.z).items()
    }
    return json.dumps(payload, indent=2) + "\n"


def cmd_simulate(scenario: str, *, seed: int | None = None, replications: int | None = None,
                 workers: int | None = None) -> str:
    sc = load_scenario(scenario)
    cfg = sc.config
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if replications is not None:
        cfg = replace(cfg, replications=replications)
    result = run_scenario(cfg, sc.entries, sc.reference, workers=workers or sc.workers)
    return result.to_csv()


def write_atomic(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out = Path(out)
    fd, tmp = tempfile.mkstemp(prefix=f".{out.name}.", dir=out.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _estimand_list(keys: Sequence[str] | None, alpha: float) -> tuple[EstimandSpec, ...]:
    keys = keys or ["ate"]
    out = []
    for k in keys:
        tilt = Tilt(k)
        out.append(EstimandSpec(tilt, alpha if tilt is Tilt.TRUNCATED else None))
    if len({e.key for e in out}) != len(out):
        raise ConfigError("an estimand is listed twice", module="cli")
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="surveyps", description="Survey-weighted propensity score weighting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", required=True, type=Path, help="CSV file with a header row")
        p.add_argument("--treatment", required=True)
        p.add_argument("--outcome", required=True)
        p.add_argument("--weight", required=True, help="survey weight column")
        p.add_argument("--covariates", required=True, help="comma-separated covariate columns")
        p.add_argument(
            "--ps-covariates",
            help="subset of --covariates for the propensity model (default: all); "
            "balance still reports every covariate",
        )
        p.add_argument("--design", choices=("retro", "pro"), default="retro")
        p.add_argument("--ps-mode", choices=("u", "w", "c", "cw"), default="w")
        p.add_argument("--estimand", action="append", choices=[t.value for t in Tilt])
        p.add_argument("--alpha", type=float, default=0.1, help="window for --estimand trunc")
        p.add_argument("--trim", type=float, default=0.0, help="symmetric truncation applied to every tilt")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", type=Path)
        p.add_argument("--seed", type=int)

    est = sub.add_parser("estimate", help="treatment-effect estimates with sandwich standard errors")
    data_args(est)
    est.add_argument("--estimator", action="append", choices=[k.value for k in EstimatorKind])
    bal = sub.add_parser("balance", help="PSMD balance table")
    data_args(bal)
    sim = sub.add_parser("simulate", help="run a Monte-Carlo scenario file")
    sim.add_argument("scenario", help="scenario file path or shipped scenario name")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--replications", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out", type=Path)
    return parser


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(c.strip() for c in text.split(",") if c.strip())


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    covariates = _name_list(args.covariates)
    ps_covariates = None if args.ps_covariates is None else _name_list(args.ps_covariates)
    kinds = tuple(EstimatorKind(k) for k in (getattr(args, "estimator", None) or ["psw"]))
    if len(set(kinds)) != len(kinds):
        raise ConfigError("an estimator is listed twice", module="cli")
    try:
        estimands = _estimand_list(args.estimand, args.alpha)
        return RunConfig(
            input=args.input,
            treatment=args.treatment,
            outcome=args.outcome,
            survey_weight=args.weight,
            covariates=covariates,
            design_mode=DesignMode(args.design),
            ps_mode=PsMode(args.ps_mode),
            estimands=estimands,
            estimators=kinds,
            trunc_alpha=args.trim,
            output_format=args.format,
            out=args.out,
            seed=args.seed,
            ps_covariates=ps_covariates,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), module="cli") from exc


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "simulate":
            text = cmd_simulate(args.scenario, seed=args.seed, replications=args.replications,
                                workers=args.workers)
        else:
            cfg = run_config_from_args(args)
            if not 0.0 <= cfg.trunc_alpha <= 0.1:
                raise ConfigError("--trim must lie in [0, 0.1]", module="cli")
            text = cmd_estimate(cfg) if args.command == "estimate" else cmd_balance(cfg)
        write_atomic(text, args.out)
    except SurveyPSError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return EXIT_USAGE if isinstance(exc, (ConfigError, ParseError)) else EXIT_ESTIMATION
    return EXIT_OK


__all__ = ["RunConfig", "build_parser", "cmd_balance", "cmd_estimate", "cmd_simulate", "main"]
