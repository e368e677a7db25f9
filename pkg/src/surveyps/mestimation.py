"""Stacked estimating equations and the empirical sandwich.

The parameter vector is laid out as

    theta = (v1, v2, v3, alpha0, alpha1, beta_fp, beta_sp)

and the per-unit residual stack has one block per parameter group:

=========  ==================================================
block      residual
=========  ==================================================
beta_fp    x (z - e_fp)                     retrospective only
beta_sp    w_ps x* (z - e_sp)
alpha1     w_or1 z x' (y - m1)
alpha0     w_or0 (1 - z) x'' (y - m0)
v1         h_p (m1 - m0 - v1)
v2         w1 z (y - m1 - v2)
v3         w0 (1 - z) (y - m0 - v3)
=========  ==================================================

``h_p = h / P(S=1|X)``. The plain weighting estimator uses the same stack
with ``m1 = m0 = 0`` and no outcome parameters, so ``v1 = 0``,
``v2 = tau1`` and ``v3 = tau0``.

``A`` is the negated mean Jacobian, taken by central differences, and
``V = A^-1 B A^-T`` with ``B`` the mean outer product of the residuals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .balancing import EstimandSpec, smooth_tilt, weight_pair_arrays
from .data import DesignMode
from .errors import DimensionMismatch, SingularA
from .glm import RCOND_MIN, clip_probability, expit
from .propensity import compute_ratio_rz, selection_probability

STEP_SCALE = np.finfo(float).eps ** (1.0 / 3.0)


class EstimatorKind(str, enum.Enum):
    PSW = "psw"
    MOM = "mom"
    CVR = "cvr"
    WET = "wet"

    @property
    def augmented(self) -> bool:
        return self is not EstimatorKind.PSW


@dataclass(frozen=True)
class ThetaStack:
    v1: float
    v2: float
    v3: float
    alpha0: np.ndarray
    alpha1: np.ndarray
    beta_fp: np.ndarray | None
    beta_sp: np.ndarray

    def to_vector(self) -> np.ndarray:
        parts = [
            np.array([self.v1, self.v2, self.v3], dtype=float),
            np.asarray(self.alpha0, dtype=float),
            np.asarray(self.alpha1, dtype=float),
        ]
        if self.beta_fp is not None:
            parts.append(np.asarray(self.beta_fp, dtype=float))
        parts.append(np.asarray(self.beta_sp, dtype=float))
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, theta: np.ndarray, layout: "StackLayout") -> "ThetaStack":
        theta = layout.check(theta)
        return cls(
            v1=float(theta[0]),
            v2=float(theta[1]),
            v3=float(theta[2]),
            alpha0=theta[layout.alpha0],
            alpha1=theta[layout.alpha1],
            beta_fp=theta[layout.beta_fp] if layout.n_fp else None,
            beta_sp=theta[layout.beta_sp],
        )


@dataclass(frozen=True)
class StackLayout:
    n_alpha0: int
    n_alpha1: int
    n_fp: int
    n_sp: int

    @property
    def dim(self) -> int:
        return 3 + self.n_alpha0 + self.n_alpha1 + self.n_fp + self.n_sp

    @property
    def alpha0(self) -> slice:
        return slice(3, 3 + self.n_alpha0)

    @property
    def alpha1(self) -> slice:
        start = 3 + self.n_alpha0
        return slice(start, start + self.n_alpha1)

    @property
    def beta_fp(self) -> slice:
        start = 3 + self.n_alpha0 + self.n_alpha1
        return slice(start, start + self.n_fp)

    @property
    def beta_sp(self) -> slice:
        start = 3 + self.n_alpha0 + self.n_alpha1 + self.n_fp
        return slice(start, start + self.n_sp)

    def contrast(self) -> np.ndarray:
        g = np.zeros(self.dim)
        g[:3] = (1.0, 1.0, -1.0)
        return g

    def check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.dim:
            raise DimensionMismatch(
                f"theta has {theta.shape[0]} entries, configuration expects {self.dim}",
                module="m_estimation",
            )
        return theta


@dataclass(frozen=True)
class StackData:
    """Unit-level inputs to the residual stack.

    ``x_out`` is the outcome design without clever columns; ``None`` for the
    plain weighting estimator.
    """

    z: np.ndarray
    y: np.ndarray
    survey_weight: np.ndarray
    ps_weight: np.ndarray
    x_sp: np.ndarray
    x_fp: np.ndarray | None = None
    x_out: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.z.shape[0]

    def take(self, index) -> "StackData":
        index = np.atleast_1d(index)
        return StackData(
            z=self.z[index],
            y=self.y[index],
            survey_weight=self.survey_weight[index],
            ps_weight=self.ps_weight[index],
            x_sp=self.x_sp[index],
            x_fp=None if self.x_fp is None else self.x_fp[index],
            x_out=None if self.x_out is None else self.x_out[index],
        )


@dataclass(frozen=True)
class StackConfig:
    """Fixes which rows exist and how they are weighted.

    ``mask`` is the truncation indicator evaluated at the fitted scores and
    held fixed, so the Jacobian treats it as locally constant.
    """

    kind: EstimatorKind
    estimand: EstimandSpec
    design_mode: DesignMode
    mask: np.ndarray
    clever1: bool = False
    clever0: bool = False

    def layout(self, data: StackData) -> StackLayout:
        n_fp = data.x_fp.shape[1] if self.design_mode is DesignMode.RETROSPECTIVE else 0
        if self.kind is EstimatorKind.PSW:
            n_a0 = n_a1 = 0
        else:
            if data.x_out is None:
                raise DimensionMismatch("augmented stack needs an outcome design", module="m_estimation")
            p = data.x_out.shape[1]
            n_a1 = p + int(self.clever1)
            n_a0 = p + int(self.clever0)
        return StackLayout(n_alpha0=n_a0, n_alpha1=n_a1, n_fp=n_fp, n_sp=data.x_sp.shape[1])


@dataclass(frozen=True)
class StackQuantities:
    """Every derived per-unit vector at one value of theta."""

    e_sp: np.ndarray
    e_fp: np.ndarray | None
    h: np.ndarray
    h_p: np.ndarray
    w1: np.ndarray
    w0: np.ndarray
    m1: np.ndarray
    m0: np.ndarray
    x1: np.ndarray | None
    x0: np.ndarray | None


def stack_quantities(data: StackData, theta: ThetaStack, config: StackConfig) -> StackQuantities:
    s = data.survey_weight
    e_sp = clip_probability(expit(data.x_sp @ theta.beta_sp))
    h = smooth_tilt(config.estimand, e_sp) * config.mask
    p_own = 1.0 / s
    w1, w0 = weight_pair_arrays(config.estimand, e_sp, p_own, p_own, config.mask)

    e_fp = None
    r = None
    if config.design_mode is DesignMode.RETROSPECTIVE:
        e_fp = clip_probability(expit(data.x_fp @ theta.beta_fp))
        r = compute_ratio_rz(e_sp, e_fp, data.z)
    h_p = h / selection_probability(s, r, config.design_mode)

    if config.kind is EstimatorKind.PSW:
        zeros = np.zeros(data.n)
        return StackQuantities(e_sp, e_fp, h, h_p, w1, w0, zeros, zeros, None, None)

    x1 = data.x_out
    x0 = data.x_out
    if config.clever1:
        x1 = np.column_stack([x1, w1])
    if config.clever0:
        x0 = np.column_stack([x0, w0])
    return StackQuantities(
        e_sp, e_fp, h, h_p, w1, w0, x1 @ theta.alpha1, x0 @ theta.alpha0, x1, x0
    )


def psi_matrix(data: StackData, theta, config: StackConfig) -> np.ndarray:
    """``n x psi_dim`` matrix of per-unit residuals, rows ordered like theta."""
    layout = config.layout(data)
    if not isinstance(theta, ThetaStack):
        theta = ThetaStack.from_vector(theta, layout)
    else:
        layout.check(theta.to_vector())
    q = stack_quantities(data, theta, config)
    z, y = data.z, data.y

    blocks = [
        (q.h_p * (q.m1 - q.m0 - theta.v1))[:, None],
        (q.w1 * z * (y - q.m1 - theta.v2))[:, None],
        (q.w0 * (1.0 - z) * (y - q.m0 - theta.v3))[:, None],
    ]
    if config.kind.augmented:
        if config.kind is EstimatorKind.WET:
            w_or1, w_or0 = q.w1, q.w0
        else:
            w_or1 = w_or0 = np.ones(data.n)
        blocks.append((w_or0 * (1.0 - z) * (y - q.m0))[:, None] * q.x0)
        blocks.append((w_or1 * z * (y - q.m1))[:, None] * q.x1)
    if q.e_fp is not None:
        blocks.append((z - q.e_fp)[:, None] * data.x_fp)
    blocks.append((data.ps_weight * (z - q.e_sp))[:, None] * data.x_sp)
    return np.concatenate(blocks, axis=1)


def evaluate_psi(record: StackData, theta, config: StackConfig) -> np.ndarray:
    """Residual vector of a single unit (``record`` holds one row)."""
    if record.n != 1:
        raise DimensionMismatch("evaluate_psi expects a one-unit record", module="m_estimation")
    return psi_matrix(record, theta, config)[0]


@dataclass(frozen=True)
class EeStack:
    theta: ThetaStack
    psi_dim: int
    A: np.ndarray
    B: np.ndarray
    V: np.ndarray
    n: int
    psi_mean: np.ndarray = field(repr=False)

    @property
    def tau(self) -> float:
        return self.theta.v1 + self.theta.v2 - self.theta.v3

    @property
    def tau_variance(self) -> float:
        g = np.zeros(self.psi_dim)
        g[:3] = (1.0, 1.0, -1.0)
        return float(g @ self.V @ g / self.n)

    @property
    def tau_se(self) -> float:
        return float(np.sqrt(max(self.tau_variance, 0.0)))


def numeric_jacobian(data: StackData, theta: np.ndarray, config: StackConfig) -> np.ndarray:
    """Mean Jacobian of the residual stack by central differences."""
    k = theta.shape[0]
    jac = np.empty((k, k))
    for j in range(k):
        step = STEP_SCALE * max(1.0, abs(theta[j]))
        up = theta.copy()
        dn = theta.copy()
        up[j] += step
        dn[j] -= step
        jac[:, j] = (
            psi_matrix(data, up, config).mean(axis=0) - psi_matrix(data, dn, config).mean(axis=0)
        ) / (up[j] - dn[j])
    return jac


def equilibrated_rcond(A: np.ndarray) -> float:
    """Reciprocal 2-norm condition number after row and column max-scaling."""
    if not np.all(np.isfinite(A)):
        return 0.0
    r = np.max(np.abs(A), axis=1)
    if np.any(r == 0):
        return 0.0
    scaled = A / r[:, None]
    c = np.max(np.abs(scaled), axis=0)
    if np.any(c == 0):
        return 0.0
    scaled = scaled / c[None, :]
    sv = np.linalg.svd(scaled, compute_uv=False)
    return float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0


def assemble_sandwich(data: StackData, theta, config: StackConfig) -> EeStack:
    layout = config.layout(data)
    if isinstance(theta, ThetaStack):
        vec = layout.check(theta.to_vector())
    else:
        vec = layout.check(theta)
        theta = ThetaStack.from_vector(vec, layout)
    psi = psi_matrix(data, vec, config)
    n = data.n
    A = -numeric_jacobian(data, vec, config)
    if equilibrated_rcond(A) < RCOND_MIN:
        raise SingularA("sandwich bread matrix A is numerically singular", module="m_estimation")
    B = psi.T @ psi / n
    # V = A^-1 B A^-T as a Gram matrix of influence vectors: exactly PSD
    infl = np.linalg.solve(A, psi.T)
    V = infl @ infl.T / n
    return EeStack(
        theta=theta, psi_dim=layout.dim, A=A, B=B, V=V, n=n, psi_mean=psi.mean(axis=0)
    )


__all__ = [
    "EeStack",
    "EstimatorKind",
    "StackConfig",
    "StackData",
    "StackLayout",
    "StackQuantities",
    "ThetaStack",
    "assemble_sandwich",
    "equilibrated_rcond",
    "evaluate_psi",
    "numeric_jacobian",
    "psi_matrix",
    "stack_quantities",
]
