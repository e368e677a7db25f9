"""Covariate balance (PSMD) and balancing-weight summaries.

The pooled standard deviation combines the two arms' weighted variances
(denominator = weight mass, no degrees-of-freedom correction) in proportion
to each arm's share of the total balancing-weight mass.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .balancing import UnitWeights
from .data import SurveySample
from .errors import EmptyArmWeight, ZeroVariance

SD_FLOOR = 1e-12
BALANCE_COLUMNS = ("covariate", "mean_treated", "mean_control", "pooled_sd", "psmd")
POOLING_NOTE = "pooled_sd = sqrt((W1*var1 + W0*var0)/(W1 + W0)), weighted variances with ddof 0"


@dataclass(frozen=True)
class BalanceRow:
    covariate: str
    mean_treated: float
    mean_control: float
    pooled_sd: float
    psmd: float


@dataclass(frozen=True)
class ArmWeightSummary:
    n: int
    min: float
    max: float
    cv: float
    ess: float


def _weighted_moments(x: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    mass = w.sum()
    mean = float(np.sum(w * x) / mass)
    var = float(np.sum(w * (x - mean) ** 2) / mass)
    return mean, var


def psmd_table(
    sample: SurveySample, uw: UnitWeights, columns: list[int] | None = None
) -> list[BalanceRow]:
    """Survey-weighted standardized mean difference for each covariate."""
    t = sample.z == 1.0
    w1 = uw.w1[t]
    w0 = uw.w0[~t]
    W1, W0 = float(w1.sum()), float(w0.sum())
    if not W1 > 0:
        raise EmptyArmWeight("treated arm carries no balancing weight", module="diagnostics", arm="treated")
    if not W0 > 0:
        raise EmptyArmWeight("control arm carries no balancing weight", module="diagnostics", arm="control")
    cols = range(sample.X.p) if columns is None else columns
    rows = []
    for j in cols:
        x = sample.X.values[:, j]
        m1, v1 = _weighted_moments(x[t], w1)
        m0, v0 = _weighted_moments(x[~t], w0)
        sd = float(np.sqrt((W1 * v1 + W0 * v0) / (W1 + W0)))
        name = sample.covariate_names[j]
        if sd < SD_FLOOR:
            if m1 != m0:
                raise ZeroVariance(f"covariate {name!r} has zero pooled variance", module="diagnostics")
            psmd = 0.0
        else:
            psmd = abs(m1 - m0) / sd
        rows.append(BalanceRow(name, m1, m0, sd, psmd))
    return rows


def _summarize(w: np.ndarray) -> ArmWeightSummary:
    if w.size == 0 or not np.any(w > 0):
        return ArmWeightSummary(int(w.size), 0.0, 0.0, float("nan"), 0.0)
    mean = w.mean()
    return ArmWeightSummary(
        n=int(w.size),
        min=float(w.min()),
        max=float(w.max()),
        cv=float(w.std() / mean),
        ess=float(w.sum() ** 2 / np.sum(w**2)),
    )


def weight_summary(uw: UnitWeights, z: np.ndarray) -> dict[str, ArmWeightSummary]:
    """Min, max, coefficient of variation and effective sample size per arm."""
    t = np.asarray(z) == 1.0
    return {"treated": _summarize(uw.w1[t]), "control": _summarize(uw.w0[~t])}


def balance_to_csv(rows: list[BalanceRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BALANCE_COLUMNS)
    for row in rows:
        writer.writerow(
            [row.covariate] + [format(getattr(row, k), ".17g") for k in BALANCE_COLUMNS[1:]]
        )
    return buf.getvalue()


def balance_to_json(rows: list[BalanceRow]) -> str:
    payload = {"pooling": POOLING_NOTE, "rows": [asdict(r) for r in rows]}
    return json.dumps(payload, indent=2) + "\n"


__all__ = [
    "ArmWeightSummary",
    "BALANCE_COLUMNS",
    "BalanceRow",
    "balance_to_csv",
    "balance_to_json",
    "psmd_table",
    "weight_summary",
]
