"""Weighted GLM fitting: logistic (IRLS) and identity-link Gaussian.

Both fitters are pure functions of their inputs. Weights enter the score
equations multiplicatively, so multiplying every weight by a constant leaves
the coefficients unchanged.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DegenerateDesign, NonConvergence, Separation

PROB_CLIP = 1e-6
MAX_ITER = 100
TOL = 1e-8
STEP_TOL = 1e-6
SEPARATION_BOUND = 30.0
RCOND_MIN = 1e-12

__all__ = [
    "DesignMatrix",
    "GlmFit",
    "clip_probability",
    "expit",
    "fit_weighted_linear",
    "fit_weighted_logistic",
    "reciprocal_condition",
]


@dataclass(frozen=True)
class DesignMatrix:
    """An ``n x p`` real matrix with column labels.

    Use :meth:`build` to add an intercept column of ones.
    """

    values: np.ndarray
    column_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("design matrix must be two-dimensional")
        n, p = values.shape
        if n < p:
            raise ValueError(f"design has fewer rows ({n}) than columns ({p})")
        if not np.all(np.isfinite(values)):
            raise ValueError("design matrix contains non-finite entries")
        if p and np.any(np.all(values == 0.0, axis=0)):
            raise ValueError("design matrix has an all-zero column")
        names = tuple(self.column_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise ValueError("column_names length does not match the number of columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)

    @classmethod
    def build(
        cls,
        columns: np.ndarray,
        names: Sequence[str] | None = None,
        *,
        add_intercept: bool = True,
    ) -> "DesignMatrix":
        cols = np.asarray(columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        labels = list(names) if names is not None else [f"x{j + 1}" for j in range(cols.shape[1])]
        if add_intercept:
            cols = np.column_stack([np.ones(cols.shape[0]), cols])
            labels = ["(intercept)", *labels]
        return cls(cols, tuple(labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GlmFit:
    coefficients: np.ndarray
    fitted: np.ndarray
    converged: bool
    iterations: int
    deviance: float
    family: str = "binomial"


def clip_probability(p: np.ndarray) -> np.ndarray:
    """Numerical floor keeping probabilities inside ``[1e-6, 1 - 1e-6]``."""
    return np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)


def reciprocal_condition(matrix: np.ndarray) -> float:
    """Reciprocal 2-norm condition of a symmetric PSD matrix after diagonal scaling.

    The unit-diagonal rescaling makes the measure insensitive to column units,
    so it flags collinearity rather than covariates on large scales.
    """
    diag = np.diag(matrix).copy()
    if np.any(diag <= 0) or not np.all(np.isfinite(matrix)):
        return 0.0
    d = 1.0 / np.sqrt(diag)
    scaled = matrix * d[:, None] * d[None, :]
    eig = np.linalg.eigvalsh(scaled)
    if eig[-1] <= 0:
        return 0.0
    return float(max(eig[0], 0.0) / eig[-1])


def _as_values(X) -> np.ndarray:
    if isinstance(X, DesignMatrix):
        return X.values
    return DesignMatrix(np.asarray(X, dtype=float)).values


def _check_weights(w: np.ndarray, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise ValueError("weight vector length does not match the design")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be strictly positive and finite")
    return w


def _binomial_deviance(eta: np.ndarray, z: np.ndarray, w: np.ndarray) -> float:
    # log(expit(eta)) = -log1p(exp(-eta)), computed without overflow
    log_mu = -np.logaddexp(0.0, -eta)
    log_1mu = -np.logaddexp(0.0, eta)
    return float(-2.0 * np.sum(w * (z * log_mu + (1.0 - z) * log_1mu)))


def fit_weighted_logistic(X, z, w) -> GlmFit:
    """Weighted maximum-likelihood logistic regression by Newton/IRLS.

    Solves ``sum_i w_i (z_i - expit(x_i' b)) x_i = 0``. Step-halving guards
    against deviance increases. Iteration stops once the relative deviance
    change or the weight-normalized score max-norm drops below ``1e-8`` and the
    accepted step is small relative to the coefficients; one further Newton
    step then polishes the root. Under (quasi-)separation the Newton steps do
    not shrink, so the coefficients run into the separation bound instead of
    stopping on a flat deviance.

    Raises
    ------
    DegenerateDesign
        Weighted information is numerically singular.
    Separation
        A coefficient exceeds 30 in absolute value.
    NonConvergence
        100 iterations without meeting the tolerance.
    """
    Xv = _as_values(X)
    n, p = Xv.shape
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != n:
        raise ValueError("response length does not match the design")
    if not np.all((z == 0.0) | (z == 1.0)):
        raise ValueError("response must be binary 0/1")
    if z.min() == z.max():
        raise ValueError("both response classes must be present")
    w = _check_weights(w, n)
    wsum = w.sum()

    if reciprocal_condition(Xv.T @ (w[:, None] * Xv)) < RCOND_MIN:
        raise DegenerateDesign("weighted design is rank deficient", module="glm_core")

    beta = np.zeros(p)
    eta = Xv @ beta
    dev = _binomial_deviance(eta, z, w)
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        mu = expit(eta)
        score = Xv.T @ (w * (z - mu))
        info = Xv.T @ ((w * mu * (1.0 - mu))[:, None] * Xv)
        if reciprocal_condition(info) < RCOND_MIN:
            if np.max(np.abs(beta)) > SEPARATION_BOUND / 2:
                raise Separation("fitted probabilities saturate (separation)", module="glm_core")
            raise DegenerateDesign("weighted information is singular", module="glm_core")
        step = np.linalg.solve(info, score)
        t = 1.0
        for _ in range(30):
            cand = beta + t * step
            cand_eta = Xv @ cand
            cand_dev = _binomial_deviance(cand_eta, z, w)
            if np.isfinite(cand_dev) and cand_dev <= dev * (1 + 1e-12) + 1e-300:
                break
            t *= 0.5
        beta, eta = cand, cand_eta
        rel_change = abs(dev - cand_dev) / (abs(cand_dev) + 0.1)
        dev = cand_dev
        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            raise Separation(
                f"coefficient magnitude {np.max(np.abs(beta)):.3g} exceeds {SEPARATION_BOUND}",
                module="glm_core",
            )
        new_score = Xv.T @ (w * (z - expit(eta)))
        small_step = np.max(np.abs(t * step)) <= STEP_TOL * (1.0 + np.max(np.abs(beta)))
        if small_step and (rel_change < TOL or np.max(np.abs(new_score)) / wsum < TOL):
            converged = True
            break

    if not converged:
        raise NonConvergence(f"no convergence after {MAX_ITER} iterations", module="glm_core")

    # polishing Newton step; quadratic convergence takes the score to rounding level
    mu = expit(eta)
    info = Xv.T @ ((w * mu * (1.0 - mu))[:, None] * Xv)
    step = np.linalg.solve(info, Xv.T @ (w * (z - mu)))
    cand = beta + step
    cand_dev = _binomial_deviance(Xv @ cand, z, w)
    if np.isfinite(cand_dev) and cand_dev <= dev * (1 + 1e-12):
        beta, dev = cand, cand_dev
        eta = Xv @ beta

    if np.max(np.abs(beta)) > SEPARATION_BOUND:
        raise Separation("coefficient magnitude exceeds the separation bound", module="glm_core")

    return GlmFit(
        coefficients=beta,
        fitted=clip_probability(expit(eta)),
        converged=True,
        iterations=it,
        deviance=dev,
        family="binomial",
    )


def fit_weighted_linear(X, y, w) -> GlmFit:
    """Weighted least squares: solves ``X'WX a = X'Wy``."""
    Xv = _as_values(X)
    n, _ = Xv.shape
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != n:
        raise ValueError("response length does not match the design")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    w = _check_weights(w, n)
    gram = Xv.T @ (w[:, None] * Xv)
    if reciprocal_condition(gram) < RCOND_MIN:
        raise DegenerateDesign("weighted Gram matrix is singular", module="glm_core")
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(sw[:, None] * Xv, sw * y, rcond=None)
    fitted = Xv @ coef
    return GlmFit(
        coefficients=coef,
        fitted=fitted,
        converged=True,
        iterations=1,
        deviance=float(np.sum(w * (y - fitted) ** 2)),
        family="gaussian",
    )
