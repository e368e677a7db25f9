"""Tilting functions and survey-weighted balancing-weight pairs.

For a tilting function ``h(e)`` the arm weights are

    w1 = h / (p1 * e),    w0 = h / (p0 * (1 - e))

where ``p_z`` is the unit's sampling probability in arm ``z``. The overlap
pair is stored as ``((1 - e) / p1, e / p0)``, the same numbers without the
cancelling ``e(1 - e)`` round trip.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import SurveySample
from .propensity import PsFit, marginal_selection_probability


class Tilt(str, enum.Enum):
    COMBINED = "ate"
    TREATED = "att"
    CONTROL = "atc"
    OVERLAP = "ato"
    TRUNCATED = "trunc"


ESTIMAND_LABELS = {
    Tilt.COMBINED: "PATE",
    Tilt.TREATED: "PATT",
    Tilt.CONTROL: "PATC",
    Tilt.OVERLAP: "PATO",
    Tilt.TRUNCATED: "truncated PATE",
}


@dataclass(frozen=True)
class EstimandSpec:
    tilt: Tilt = Tilt.COMBINED
    alpha: float | None = None

    def __post_init__(self) -> None:
        tilt = Tilt(self.tilt)
        object.__setattr__(self, "tilt", tilt)
        if tilt is Tilt.TRUNCATED:
            if self.alpha is None or not 0.0 < float(self.alpha) <= 0.1:
                raise ValueError("TRUNCATED needs alpha in (0, 0.1]")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise ValueError(f"alpha is only meaningful for TRUNCATED, got tilt {tilt.name}")

    @property
    def label(self) -> str:
        return ESTIMAND_LABELS[self.tilt]

    @property
    def key(self) -> str:
        return self.tilt.value


@dataclass(frozen=True)
class UnitWeights:
    """Per-unit tilt ``h``, arm weights ``w1``/``w0`` and ``h / P(S=1|X)``."""

    h: np.ndarray
    w1: np.ndarray
    w0: np.ndarray
    h_over_pS: np.ndarray
    spec: EstimandSpec | None = None
    mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        arrays = [np.asarray(a, dtype=float) for a in (self.h, self.w1, self.w0, self.h_over_pS)]
        n = arrays[0].shape[0]
        for a in arrays:
            if a.shape != (n,):
                raise ValueError("UnitWeights vectors must share one length")
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise ValueError("UnitWeights vectors must be finite and nonnegative")
        for name, a in zip(("h", "w1", "w0", "h_over_pS"), arrays):
            object.__setattr__(self, name, a)
        if self.mask is None:
            object.__setattr__(self, "mask", np.ones(n, dtype=bool))

    @property
    def n(self) -> int:
        return self.h.shape[0]

    def arm_weights(self, z: np.ndarray) -> np.ndarray:
        """The weight each unit carries in its own observed arm."""
        return np.where(np.asarray(z) == 1.0, self.w1, self.w0)


def smooth_tilt(spec: EstimandSpec, e):
    """``h(e)`` without any indicator factor (TRUNCATED gives 1)."""
    e = np.asarray(e, dtype=float)
    tilt = spec.tilt
    if tilt is Tilt.TREATED:
        return e.copy()
    if tilt is Tilt.CONTROL:
        return 1.0 - e
    if tilt is Tilt.OVERLAP:
        return e * (1.0 - e)
    return np.ones_like(e)


def smooth_tilt_derivative(spec: EstimandSpec, e):
    e = np.asarray(e, dtype=float)
    tilt = spec.tilt
    if tilt is Tilt.TREATED:
        return np.ones_like(e)
    if tilt is Tilt.CONTROL:
        return -np.ones_like(e)
    if tilt is Tilt.OVERLAP:
        return 1.0 - 2.0 * e
    return np.zeros_like(e)


def window_mask(e, alpha: float) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    return (e > alpha) & (e < 1.0 - alpha)


def tilt_mask(spec: EstimandSpec, e, trunc_alpha: float = 0.0) -> np.ndarray:
    """Units kept by the TRUNCATED indicator and by any symmetric trimming."""
    e = np.asarray(e, dtype=float)
    mask = np.ones(e.shape, dtype=bool)
    if spec.tilt is Tilt.TRUNCATED:
        mask &= window_mask(e, spec.alpha)
    if trunc_alpha > 0:
        mask &= window_mask(e, trunc_alpha)
    return mask


def tilting_value(spec: EstimandSpec, e):
    """``h(e)``: 1, e, 1-e, e(1-e) or the window indicator."""
    e_arr = np.asarray(e, dtype=float)
    if np.any((e_arr <= 0) | (e_arr >= 1)):
        raise ValueError("propensity score must lie strictly inside (0, 1)")
    h = smooth_tilt(spec, e_arr) * tilt_mask(spec, e_arr)
    return float(h) if np.ndim(e) == 0 else h


def weight_pair_arrays(spec: EstimandSpec, e, p1, p0, mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized balancing pair; ``mask`` multiplies both arms."""
    e = np.asarray(e, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if spec.tilt is Tilt.OVERLAP:
        w1 = (1.0 - e) / p1
        w0 = e / p0
    else:
        h = smooth_tilt(spec, e)
        w1 = h / (p1 * e)
        w0 = h / (p0 * (1.0 - e))
    if mask is not None:
        w1 = w1 * mask
        w0 = w0 * mask
    return w1, w0


def unit_weight_pair(spec: EstimandSpec, e_sp: float, p1: float, p0: float) -> tuple[float, float]:
    if not 0.0 < e_sp < 1.0:
        raise ValueError("e_sp must lie strictly inside (0, 1)")
    if not (0.0 < p1 <= 1.0 and 0.0 < p0 <= 1.0):
        raise ValueError("sampling probabilities must lie in (0, 1]")
    mask = tilt_mask(spec, e_sp)
    w1, w0 = weight_pair_arrays(spec, e_sp, p1, p0, mask)
    return float(w1), float(w0)


def build_unit_weights(sample: SurveySample, ps: PsFit, spec: EstimandSpec) -> UnitWeights:
    """Apply the balancing pair row by row.

    Each unit is observed in one arm only, so its own sampling probability
    ``1 / survey_weight`` stands in for both ``p1`` and ``p0``.
    """
    e = ps.e_sp
    p_own = 1.0 / sample.survey_weight
    mask = tilt_mask(spec, e, ps.spec.trunc_alpha)
    h = smooth_tilt(spec, e) * mask
    w1, w0 = weight_pair_arrays(spec, e, p_own, p_own, mask)
    p_sel = marginal_selection_probability(sample, ps)
    return UnitWeights(h=h, w1=w1, w0=w0, h_over_pS=h / p_sel, spec=spec, mask=mask)


__all__ = [
    "ESTIMAND_LABELS",
    "EstimandSpec",
    "Tilt",
    "UnitWeights",
    "build_unit_weights",
    "smooth_tilt",
    "smooth_tilt_derivative",
    "tilt_mask",
    "tilting_value",
    "unit_weight_pair",
    "weight_pair_arrays",
    "window_mask",
]
