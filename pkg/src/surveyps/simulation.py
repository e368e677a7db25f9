"""Monte-Carlo harness: superpopulation, two sampling mechanisms, scoring.

Random streams
--------------
Every draw uses a Philox generator keyed by ``SeedSequence(seed, spawn_key)``:

* ``(0,)`` builds the superpopulation;
* ``(1, rep, 0)`` draws the sample of replication ``rep``.

Replications therefore produce identical numbers regardless of how they are
scheduled across worker processes, and results are aggregated in
replication order.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import re
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import expit

from .balancing import EstimandSpec, Tilt, build_unit_weights
from .data import DesignMode, SurveySample
from .errors import ConfigError, InfeasibleAllocation, SurveyPSError
from .estimators import estimate_augmented, estimate_psw, fit_outcome_models
from .glm import DesignMatrix
from .mestimation import EstimatorKind
from .propensity import PsMode, PsSpec, fit_propensity

CLUSTERS_SAMPLED = 5
COVARIATE_NAMES = ("x1", "x2", "x3", "x4", "x5", "x6", "x1x2")
FULL_SCALE_ALLOCATIONS = (850, 750, 700, 650, 600, 400, 350, 300, 250, 150)
STREAM_POPULATION = 0
STREAM_REPLICATION = 1
STAGE_SAMPLE = 0


def scaled_allocations(sample_size: int) -> tuple[int, ...]:
    """Stratum allocations proportional to the full-scale design."""
    total = sum(FULL_SCALE_ALLOCATIONS)
    return tuple(a * sample_size // total for a in FULL_SCALE_ALLOCATIONS)


class Sampling(str, enum.Enum):
    MULTISTAGE = "multistage"
    TREATMENT_DEPENDENT = "treatment_dependent"


@dataclass(frozen=True)
class SimConfig:
    n_strata: int = 10
    clusters_per_stratum: int = 20
    units_per_cluster: int = 1000
    sigma_stratum: float = 0.35
    sigma_cluster: float = 0.15
    a0: float = math.log(35 / 80)
    psi: float = 0.6
    a_coeffs: tuple[float, ...] = tuple(math.log(v) for v in (1.1, 1.25, 1.5, 1.75, 2.0, 2.5))
    a7: float = math.log(1.1)
    b0: float = 0.0
    b: tuple[float, ...] = (2.5, -2.0, 1.75, -1.25, 1.5, 1.1)
    b7: float = 2.5
    b8: float = 1.5
    delta0: float = 0.3
    delta1: float = 1.0
    delta2: float = 0.2
    sampling: Sampling = Sampling.MULTISTAGE
    allocations: tuple[int, ...] = scaled_allocations(1000)
    c0: float = math.log(0.005 / 0.995)
    delta_s: float = math.log(0.9)
    c: tuple[float, ...] = tuple(math.log(v) for v in (1.05, 1.10, 1.15, 1.10, 1.05, 1.10))
    trunc_alpha: float = 0.0
    replications: int = 500
    seed: int = 20240601
    name: str = "scenario"

    def __post_init__(self) -> None:
        object.__setattr__(self, "sampling", Sampling(self.sampling))
        for key in ("a_coeffs", "b", "c"):
            vec = tuple(float(v) for v in getattr(self, key))
            if len(vec) != 6:
                raise ConfigError(f"{key} needs 6 entries, got {len(vec)}", module="simulation")
            object.__setattr__(self, key, vec)
        object.__setattr__(self, "allocations", tuple(int(a) for a in self.allocations))
        if self.sampling is Sampling.MULTISTAGE and len(self.allocations) != self.n_strata:
            raise ConfigError("allocations must list one size per stratum", module="simulation")
        if not (self.sigma_stratum > 0 and self.sigma_cluster > 0):
            raise ConfigError("variance parameters must be positive", module="simulation")
        if min(self.n_strata, self.clusters_per_stratum, self.units_per_cluster) < 1:
            raise ConfigError("population dimensions must be positive", module="simulation")
        if self.clusters_per_stratum < CLUSTERS_SAMPLED:
            raise ConfigError(
                f"need at least {CLUSTERS_SAMPLED} clusters per stratum", module="simulation"
            )
        if self.replications < 1:
            raise ConfigError("replications must be positive", module="simulation")
        if not 0.0 <= self.trunc_alpha <= 0.1:
            raise ConfigError("trunc_alpha must lie in [0, 0.1]", module="simulation")

    @property
    def population_size(self) -> int:
        return self.n_strata * self.clusters_per_stratum * self.units_per_cluster

    @property
    def design_mode(self) -> DesignMode:
        # multistage inclusion does not depend on treatment, so 1/weight is P(S=1|X)
        if self.sampling is Sampling.MULTISTAGE:
            return DesignMode.PROSPECTIVE
        return DesignMode.RETROSPECTIVE


@dataclass(frozen=True)
class Population:
    X: np.ndarray
    stratum: np.ndarray
    cluster: np.ndarray
    e: np.ndarray
    z: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    clusters_per_stratum: int
    units_per_cluster: int

    @property
    def y(self) -> np.ndarray:
        return np.where(self.z == 1.0, self.y1, self.y0)

    @property
    def size(self) -> int:
        return self.X.shape[0]

    @cached_property
    def design(self) -> np.ndarray:
        """Covariates plus the x1*x2 interaction, as the models see them."""
        return np.column_stack([self.X, self.X[:, 0] * self.X[:, 1]])


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed), STREAM_POPULATION)


def generate_superpopulation(cfg: SimConfig, seed=None) -> Population:
    """Nested random-effects covariates, logistic treatment, linear potential outcomes."""
    rng = _as_generator(cfg.seed if seed is None else seed)
    S, C, U = cfg.n_strata, cfg.clusters_per_stratum, cfg.units_per_cluster
    n_clusters = S * C
    nu_stratum = rng.normal(0.0, cfg.sigma_stratum, size=(S, 6))
    nu_cluster = rng.normal(0.0, cfg.sigma_cluster, size=(n_clusters, 6))
    cluster = np.repeat(np.arange(n_clusters), U)
    stratum = cluster // C
    X = rng.normal(nu_stratum[stratum] + nu_cluster[cluster], 1.0)
    x12 = X[:, 0] * X[:, 1]

    e = expit(cfg.a0 + cfg.psi * (X @ np.asarray(cfg.a_coeffs) + cfg.a7 * x12))
    z = (rng.random(X.shape[0]) < e).astype(float)
    lin = X @ np.asarray(cfg.b)
    eps = rng.normal(size=X.shape[0])
    y0 = cfg.b0 + cfg.delta0 * (lin + cfg.b7 * x12) + eps
    y1 = y0 + cfg.delta1 + cfg.delta2 * (lin + cfg.b8 * x12)
    return Population(X, stratum, cluster, e, z, y0, y1, C, U)


def _sample_from_rows(pop: Population, rows: np.ndarray, weight: np.ndarray, mode: DesignMode) -> SurveySample:
    return SurveySample(
        X=DesignMatrix(pop.design[rows], COVARIATE_NAMES),
        z=pop.z[rows],
        y=pop.y[rows],
        survey_weight=weight,
        design_mode=mode,
    )


def multistage_rows(pop: Population, allocations: Sequence[int], rng: np.random.Generator):
    """Row indices and weights: SRS of clusters, then equal SRS within each."""
    C, U = pop.clusters_per_stratum, pop.units_per_cluster
    n_strata = pop.size // (C * U)
    if len(allocations) != n_strata:
        raise InfeasibleAllocation(
            f"{len(allocations)} allocations for {n_strata} strata", module="simulation"
        )
    rows, weights = [], []
    for j, alloc in enumerate(allocations):
        if alloc <= 0 or alloc % CLUSTERS_SAMPLED:
            raise InfeasibleAllocation(
                f"stratum {j}: allocation {alloc} is not a positive multiple of {CLUSTERS_SAMPLED}",
                module="simulation",
            )
        m = alloc // CLUSTERS_SAMPLED
        if m > U:
            raise InfeasibleAllocation(
                f"stratum {j}: {m} units per cluster exceeds cluster size {U}", module="simulation"
            )
        chosen = np.sort(rng.choice(C, CLUSTERS_SAMPLED, replace=False))
        w = (C / CLUSTERS_SAMPLED) * (U / m)
        for k in chosen:
            start = (j * C + k) * U
            rows.append(start + np.sort(rng.choice(U, m, replace=False)))
            weights.append(np.full(m, w))
    return np.concatenate(rows), np.concatenate(weights)


def draw_multistage_sample(pop: Population, allocations: Sequence[int], seed) -> SurveySample:
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed), STREAM_REPLICATION, 0, STAGE_SAMPLE)
    rows, w = multistage_rows(pop, allocations, rng)
    return _sample_from_rows(pop, rows, w, DesignMode.PROSPECTIVE)


def treatment_dependent_probability(pop: Population, cfg: SimConfig) -> np.ndarray:
    return expit(cfg.c0 + cfg.delta_s * pop.z + pop.X @ np.asarray(cfg.c))


def draw_treatment_dependent_sample(pop: Population, cfg: SimConfig, seed) -> SurveySample:
    """Bernoulli inclusion with arm-specific probability; weight ``1 / p_z``."""
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed), STREAM_REPLICATION, 0, STAGE_SAMPLE)
    p = treatment_dependent_probability(pop, cfg)
    rows = np.flatnonzero(rng.random(pop.size) < p)
    return _sample_from_rows(pop, rows, 1.0 / p[rows], DesignMode.RETROSPECTIVE)


def draw_sample(pop: Population, cfg: SimConfig, rep: int) -> SurveySample:
    rng = stream(cfg.seed, STREAM_REPLICATION, rep, STAGE_SAMPLE)
    if cfg.sampling is Sampling.MULTISTAGE:
        return draw_multistage_sample(pop, cfg.allocations, rng)
    return draw_treatment_dependent_sample(pop, cfg, rng)


def population_truth(pop: Population, estimand: EstimandSpec, trunc_alpha: float = 0.0) -> float:
    """Finite-population effect for a tilt, using the true propensity score.

    PATT and PATC average over the realized treated and control units;
    PATO weights by ``e(1 - e)``; truncation keeps units whose true score lies
    inside the window.
    """
    tau = pop.y1 - pop.y0
    e = pop.e
    keep = np.ones(pop.size, dtype=bool)
    if trunc_alpha > 0:
        keep &= (e > trunc_alpha) & (e < 1 - trunc_alpha)
    tilt = estimand.tilt
    if tilt is Tilt.TRUNCATED:
        keep &= (e > estimand.alpha) & (e < 1 - estimand.alpha)
    if tilt is Tilt.TREATED:
        keep &= pop.z == 1.0
    elif tilt is Tilt.CONTROL:
        keep &= pop.z == 0.0
    if tilt is Tilt.OVERLAP:
        h = e * (1 - e) * keep
        return float(np.sum(h * tau) / np.sum(h))
    return float(tau[keep].mean())


@dataclass(frozen=True)
class ScenarioEntry:
    """One estimator configuration scored in a scenario."""

    estimator: EstimatorKind
    ps_mode: PsMode
    estimand: EstimandSpec
    ps_correct: bool = True
    outcome_correct: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "estimator", EstimatorKind(self.estimator))
        object.__setattr__(self, "ps_mode", PsMode(self.ps_mode))

    @property
    def spec_flags(self) -> str:
        return f"{'Cor' if self.ps_correct else 'Mis'}|{'Cor' if self.outcome_correct else 'Mis'}"

    @property
    def key(self) -> str:
        est = self.estimand.key if self.estimand.alpha is None else f"trunc:{self.estimand.alpha:g}"
        return f"{self.estimator.value}/{self.ps_mode.value}/{est}/{self.spec_flags}"

    @classmethod
    def parse(cls, text: str) -> "ScenarioEntry":
        """``"psw, w, ate, Cor|Cor"``; truncation as ``trunc:0.05``."""
        parts = [p.strip() for p in re.split(r"[,/]", text) if p.strip()]
        if len(parts) == 5:
            parts = parts[:3] + [f"{parts[3]}|{parts[4]}"]
        if len(parts) != 4:
            raise ConfigError(f"cannot parse scenario entry {text!r}", module="simulation")
        est_text = parts[2].lower()
        try:
            if est_text.startswith("trunc"):
                _, _, a = est_text.partition(":")
                estimand = EstimandSpec(Tilt.TRUNCATED, float(a) if a else 0.1)
            else:
                estimand = EstimandSpec(Tilt(est_text))
            flags = parts[3].split("|")
            if len(flags) != 2 or any(f.lower() not in ("cor", "mis") for f in flags):
                raise ValueError(f"model flags {parts[3]!r} must look like Cor|Mis")
            return cls(
                estimator=EstimatorKind(parts[0].lower()),
                ps_mode=PsMode(parts[1].lower()),
                estimand=estimand,
                ps_correct=flags[0].lower() == "cor",
                outcome_correct=flags[1].lower() == "cor",
            )
        except ValueError as exc:
            raise ConfigError(f"bad scenario entry {text!r}: {exc}", module="simulation") from exc


DEFAULT_REFERENCE = ScenarioEntry(EstimatorKind.PSW, PsMode.W_PS, EstimandSpec(Tilt.COMBINED))


@dataclass(frozen=True)
class ScenarioMetrics:
    relative_bias_pct: float
    relative_efficiency: float
    coverage: float
    mc_variance: float
    truth: float
    mean_estimate: float = float("nan")
    n_success: int = 0
    n_failed: int = 0


def summarize_replications(
    estimates: np.ndarray,
    ses: np.ndarray,
    truth: float,
    reference_variance: float | None = None,
) -> ScenarioMetrics:
    """Score finite replications; NaN entries are counted as failures."""
    estimates = np.asarray(estimates, dtype=float)
    ses = np.asarray(ses, dtype=float)
    ok = np.isfinite(estimates) & np.isfinite(ses)
    est, se = estimates[ok], ses[ok]
    n_ok = int(ok.sum())
    if n_ok == 0:
        nan = float("nan")
        return ScenarioMetrics(nan, nan, nan, nan, truth, nan, 0, int(estimates.size))
    mean = float(est.mean())
    var = float(est.var(ddof=1)) if n_ok > 1 else 0.0
    covered = (est - 1.96 * se <= truth) & (truth <= est + 1.96 * se)
    if reference_variance is None:
        reference_variance = var
    eff = reference_variance / var if var > 0 else float("inf")
    return ScenarioMetrics(
        relative_bias_pct=100.0 * (mean - truth) / truth,
        relative_efficiency=float(eff),
        coverage=float(covered.mean()),
        mc_variance=var,
        truth=truth,
        mean_estimate=mean,
        n_success=n_ok,
        n_failed=int(estimates.size - n_ok),
    )


@dataclass(frozen=True)
class ScenarioRow:
    entry: ScenarioEntry
    metrics: ScenarioMetrics


@dataclass(frozen=True)
class ScenarioResult:
    config: SimConfig
    rows: list[ScenarioRow]
    reference: ScenarioEntry
    estimates: np.ndarray = field(repr=False)
    ses: np.ndarray = field(repr=False)
    errors: list[dict] = field(default_factory=list, repr=False)

    def row(self, entry: ScenarioEntry | str) -> ScenarioRow:
        key = entry if isinstance(entry, str) else entry.key
        for r in self.rows:
            if r.entry.key == key:
                return r
        raise KeyError(key)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for r in self.rows:
            m = r.metrics
            writer.writerow(
                [
                    r.entry.estimand.label,
                    r.entry.estimator.name,
                    r.entry.ps_mode.name,
                    r.entry.spec_flags,
                    *(format(v, ".17g") for v in (m.relative_bias_pct, m.relative_efficiency, m.coverage, m.mc_variance, m.truth, m.mean_estimate)),
                    m.n_success,
                    m.n_failed,
                ]
            )
        return buf.getvalue()


RESULT_COLUMNS = (
    "estimand",
    "estimator",
    "ps_mode",
    "spec",
    "relative_bias_pct",
    "relative_efficiency",
    "coverage",
    "mc_variance",
    "truth",
    "mean_estimate",
    "n_success",
    "n_failed",
)


def estimate_entries(
    sample: SurveySample, entries: Sequence[ScenarioEntry], trunc_alpha: float = 0.0
) -> tuple[np.ndarray, np.ndarray, list[str | None]]:
    """Point estimates and standard errors for every entry on one sample.

    Propensity fits and unit weights are shared across entries that agree on
    them. A failure in one entry is recorded and does not affect the others.
    """
    n_cov = len(COVARIATE_NAMES)
    full = tuple(range(n_cov))
    main = tuple(range(n_cov - 1))
    ps_cache: dict = {}
    uw_cache: dict = {}
    est = np.full(len(entries), np.nan)
    se = np.full(len(entries), np.nan)
    codes: list[str | None] = [None] * len(entries)
    for k, entry in enumerate(entries):
        ps_key = (entry.ps_mode, entry.ps_correct)
        uw_key = (*ps_key, entry.estimand)
        try:
            if ps_key not in ps_cache:
                cols = full if entry.ps_correct else main
                ps_cache[ps_key] = fit_propensity(sample, PsSpec(entry.ps_mode, cols, True, trunc_alpha))
            ps = ps_cache[ps_key]
            if isinstance(ps, SurveyPSError):
                raise ps
            if uw_key not in uw_cache:
                uw_cache[uw_key] = build_unit_weights(sample, ps, entry.estimand)
            uw = uw_cache[uw_key]
            if entry.estimator is EstimatorKind.PSW:
                res = estimate_psw(sample, ps, uw)
            else:
                cols = full if entry.outcome_correct else main
                of = fit_outcome_models(sample, uw, entry.estimator, cols)
                res = estimate_augmented(sample, ps, uw, of)
            if not (np.isfinite(res.tau) and np.isfinite(res.se)):
                raise FloatingPointError("non-finite estimate")
            est[k], se[k] = res.tau, res.se
        except (SurveyPSError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            if ps_key not in ps_cache and isinstance(exc, SurveyPSError):
                ps_cache[ps_key] = exc
            codes[k] = getattr(exc, "code", type(exc).__name__)
    return est, se, codes


# worker-process state, set once per process by the pool initializer
_WORKER: dict = {}


def _init_worker(pop: Population, cfg: SimConfig, entries: tuple[ScenarioEntry, ...]) -> None:
    _WORKER["pop"] = pop
    _WORKER["cfg"] = cfg
    _WORKER["entries"] = entries


def _run_replication(rep: int):
    pop, cfg, entries = _WORKER["pop"], _WORKER["cfg"], _WORKER["entries"]
    try:
        sample = draw_sample(pop, cfg, rep)
    except (SurveyPSError, ValueError) as exc:
        n = len(entries)
        return rep, np.full(n, np.nan), np.full(n, np.nan), [getattr(exc, "code", "E_SAMPLE")] * n
    est, se, codes = estimate_entries(sample, entries, cfg.trunc_alpha)
    return rep, est, se, codes


def run_scenario(
    cfg: SimConfig,
    entries: Sequence[ScenarioEntry],
    reference: ScenarioEntry | None = None,
    *,
    workers: int = 1,
    population: Population | None = None,
) -> ScenarioResult:
    """Score every entry over ``cfg.replications`` samples from one population.

    The reference entry is added to the menu when missing; relative
    efficiency is its Monte-Carlo variance over each entry's.
    """
    reference = DEFAULT_REFERENCE if reference is None else reference
    entries = list(entries)
    if reference.key not in {e.key for e in entries}:
        entries.append(reference)
    entries_t = tuple(entries)
    pop = generate_superpopulation(cfg) if population is None else population

    R, K = cfg.replications, len(entries_t)
    est = np.full((R, K), np.nan)
    se = np.full((R, K), np.nan)
    errors: list[dict] = []
    if workers <= 1:
        _init_worker(pop, cfg, entries_t)
        results = map(_run_replication, range(R))
        pool = None
    else:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(pop, cfg, entries_t))
        results = pool.map(_run_replication, range(R), chunksize=max(1, R // (4 * workers)))
    try:
        for rep, e_r, s_r, codes in results:
            est[rep], se[rep] = e_r, s_r
            for k, code in enumerate(codes):
                if code is not None:
                    errors.append({"replication": rep, "entry": entries_t[k].key, "error": code})
    finally:
        if pool is not None:
            pool.shutdown()
        _WORKER.clear()

    ref_k = [e.key for e in entries_t].index(reference.key)
    ref_vals = est[:, ref_k][np.isfinite(est[:, ref_k])]
    ref_var = float(ref_vals.var(ddof=1)) if ref_vals.size > 1 else float("nan")
    rows = []
    for k, entry in enumerate(entries_t):
        truth = population_truth(pop, entry.estimand, cfg.trunc_alpha)
        rows.append(ScenarioRow(entry, summarize_replications(est[:, k], se[:, k], truth, ref_var)))
    return ScenarioResult(cfg, rows, reference, est, se, errors)


# --- scenario files -------------------------------------------------------

_LOG_RE = re.compile(r"^log\(\s*([0-9.eE+-]+)\s*(?:/\s*([0-9.eE+-]+)\s*)?\)$")
_INT_KEYS = {"n_strata", "clusters_per_stratum", "units_per_cluster", "replications", "seed"}
_VECTOR_KEYS = {"a_coeffs", "b", "c"}


def _parse_number(text: str) -> float:
    text = text.strip()
    m = _LOG_RE.match(text)
    if m:
        num = float(m.group(1))
        den = float(m.group(2)) if m.group(2) else 1.0
        return math.log(num / den)
    return float(text)


@dataclass(frozen=True)
class Scenario:
    config: SimConfig
    entries: tuple[ScenarioEntry, ...]
    reference: ScenarioEntry = DEFAULT_REFERENCE
    workers: int = 1


SCENARIO_KEYS = (
    {f.name for f in fields(SimConfig)} | {"entry", "reference", "workers", "sample_size"}
)


def parse_scenario(text: str) -> Scenario:
    """Parse ``key = value`` lines; ``#`` starts a comment; ``entry`` may repeat.

    Numbers accept ``log(a)`` and ``log(a/b)``; vectors are comma separated.
    """
    values: dict = {}
    entries: list[ScenarioEntry] = []
    reference = DEFAULT_REFERENCE
    workers = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value", module="simulation")
        if key not in SCENARIO_KEYS:
            raise ConfigError(f"unknown scenario key {key!r} (line {lineno})", module="simulation")
        try:
            if key == "entry":
                entries.append(ScenarioEntry.parse(value))
            elif key == "reference":
                reference = ScenarioEntry.parse(value)
            elif key == "workers":
                workers = int(value)
            elif key == "sample_size":
                values["allocations"] = scaled_allocations(int(value))
            elif key == "name":
                values["name"] = value
            elif key == "sampling":
                values["sampling"] = Sampling(value.lower())
            elif key == "allocations":
                values["allocations"] = tuple(int(v) for v in value.split(","))
            elif key in _VECTOR_KEYS:
                values[key] = tuple(_parse_number(v) for v in value.split(","))
            elif key in _INT_KEYS:
                values[key] = int(value)
            else:
                values[key] = _parse_number(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}", module="simulation") from exc
    if not entries:
        raise ConfigError("scenario lists no entry lines", module="simulation")
    return Scenario(SimConfig(**values), tuple(entries), reference, workers)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        shipped = Path(__file__).with_name("scenarios") / f"{path.name.removesuffix('.cfg')}.cfg"
        if shipped.exists():
            path = shipped
        else:
            raise ConfigError(f"scenario file {str(path)!r} not found", module="simulation")
    return parse_scenario(path.read_text())


def shipped_scenarios() -> list[str]:
    return sorted(p.stem for p in Path(__file__).with_name("scenarios").glob("*.cfg"))


__all__ = [
    "COVARIATE_NAMES",
    "Population",
    "Sampling",
    "Scenario",
    "ScenarioEntry",
    "ScenarioMetrics",
    "ScenarioResult",
    "SimConfig",
    "draw_multistage_sample",
    "draw_sample",
    "draw_treatment_dependent_sample",
    "estimate_entries",
    "generate_superpopulation",
    "load_scenario",
    "parse_scenario",
    "population_truth",
    "run_scenario",
    "scaled_allocations",
    "summarize_replications",
]
