"""The unit-level sample record shared by every estimator."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .glm import DesignMatrix


class DesignMode(str, enum.Enum):
    """Whether sampling happened after exposure (retrospective) or before it."""

    RETROSPECTIVE = "retro"
    PROSPECTIVE = "pro"


@dataclass(frozen=True)
class SurveySample:
    """Covariates, treatment, outcome and survey weights for ``n`` sampled units.

    ``survey_weight`` is ``1 / p_z(x)`` in retrospective designs and
    ``1 / p(x)`` in prospective designs. ``X`` holds baseline covariates
    without an intercept column.
    """

    X: DesignMatrix
    z: np.ndarray
    y: np.ndarray
    survey_weight: np.ndarray
    design_mode: DesignMode = DesignMode.RETROSPECTIVE

    def __post_init__(self) -> None:
        X = self.X if isinstance(self.X, DesignMatrix) else DesignMatrix(self.X)
        n = X.n
        z = np.asarray(self.z, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        w = np.asarray(self.survey_weight, dtype=float).reshape(-1)
        if n == 0:
            raise ValueError("sample is empty")
        if not (z.shape[0] == y.shape[0] == w.shape[0] == n):
            raise ValueError("X, z, y and survey_weight must have the same length")
        if not np.all((z == 0.0) | (z == 1.0)):
            raise ValueError("treatment must be coded 0/1")
        if z.min() == z.max():
            raise ValueError("both treatment arms must be present")
        if not np.all(np.isfinite(y)):
            raise ValueError("outcome contains non-finite values")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("survey weights must be positive and finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "survey_weight", w)
        object.__setattr__(self, "design_mode", DesignMode(self.design_mode))

    @property
    def n(self) -> int:
        return self.X.n

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return self.X.column_names

    def with_weights(self, survey_weight: np.ndarray) -> "SurveySample":
        return replace(self, survey_weight=np.asarray(survey_weight, dtype=float))

    def take(self, index: np.ndarray) -> "SurveySample":
        """Rows ``index`` in the given order (used for permutation and duplication)."""
        index = np.asarray(index)
        return SurveySample(
            X=DesignMatrix(self.X.values[index], self.X.column_names),
            z=self.z[index],
            y=self.y[index],
            survey_weight=self.survey_weight[index],
            design_mode=self.design_mode,
        )
