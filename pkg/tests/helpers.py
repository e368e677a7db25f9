"""Shared data builders for the test suite."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from surveyps import DesignMatrix, SurveySample

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text())


def toy12_sample(design_mode: str = "retro") -> SurveySample:
    raw = np.genfromtxt(FIXTURES / "toy12.csv", delimiter=",", names=True)
    X = DesignMatrix(np.column_stack([raw["x1"], raw["x2"]]), ("x1", "x2"))
    return SurveySample(X, raw["z"], raw["y"], raw["w"], design_mode)


def random_sample(seed: int, n: int = 300, p: int = 3, design_mode: str = "retro",
                  weight_spread: float = 0.5) -> SurveySample:
    """Logistic treatment, linear outcome, log-normal survey weights tied to z and x."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    coef = np.linspace(0.6, -0.4, p)
    e = 1.0 / (1.0 + np.exp(-(0.2 + X @ coef)))
    z = (rng.random(n) < e).astype(float)
    y = 1.0 + X @ np.linspace(1.0, -1.0, p) + 1.5 * z + rng.normal(size=n)
    w = 20.0 * np.exp(weight_spread * rng.normal(size=n) + 0.3 * z + 0.2 * X[:, 0])
    names = tuple(f"x{j + 1}" for j in range(p))
    return SurveySample(DesignMatrix(X, names), z, y, w, design_mode)
