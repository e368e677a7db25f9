"""Generate the 12-unit retrospective toy data set (``fixtures/toy12.csv``).

Seeded pure-Python draws, rounded to two decimals. Survey weights are whole
numbers of at least 5 so every marginal selection probability stays below 1.
"""

import math
import random
from pathlib import Path

from .glm_ref import logistic

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
SEED = 1207


def toy12_rows(seed=SEED):
    rng = random.Random(seed)
    rows = []
    for i in range(12):
        x1 = round(rng.gauss(0.0, 1.0), 2)
        x2 = round(rng.gauss(0.5, 1.0), 2)
        z = 1 if i % 2 == 0 else 0
        y = round(1.0 + 0.8 * x1 - 0.5 * x2 + 1.5 * z + rng.gauss(0.0, 0.5), 2)
        w = 5 + int(10 * rng.random()) + (6 if z == 0 else 0) + int(3 * abs(x1))
        rows.append((x1, x2, z, y, w))
    return rows


def check_no_separation(rows):
    X = [[1.0, r[0], r[1]] for r in rows]
    z = [float(r[2]) for r in rows]
    for w in ([1.0] * len(rows), [float(r[4]) for r in rows]):
        beta = logistic(X, z, w)
        if max(abs(b) for b in beta) > 10 or any(math.isnan(b) for b in beta):
            raise ValueError(f"toy data nearly separated: {beta}")


def write_toy12(path=None):
    rows = toy12_rows()
    check_no_separation(rows)
    path = Path(path) if path else FIXTURES / "toy12.csv"
    lines = ["x1,x2,z,y,w"] + [f"{a:.2f},{b:.2f},{c},{d:.2f},{e}" for a, b, c, d, e in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


if __name__ == "__main__":
    print(write_toy12())
