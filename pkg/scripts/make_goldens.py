#!/usr/bin/env python3
"""Freeze golden matrices for the generator tests.

Deliberately independent of the selfpredict package: everything here is
written with plain loops so that a bug in the library cannot leak into the
expected values.  Output lives in tests/golden/ as headerless CSV at 17
significant digits plus a JSON sidecar describing how each file was made.

Draw order for the doubly stochastic generator (one value stream per matrix):
uniform raw matrix, then alternating normalization, then a random permutation,
then the mixing weight alpha.  The symmetric generator reuses the first two
draws and symmetrizes the result.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"


def alternating_normalize(matrix, tol=1e-12, max_iters=100_000):
    """Scale rows then columns until both sum to one within tol."""
    out = [row[:] for row in matrix]
    n = len(out)
    for _ in range(max_iters):
        for i in range(n):
            s = sum(out[i])
            for j in range(n):
                out[i][j] /= s
        for j in range(n):
            s = sum(out[i][j] for i in range(n))
            for i in range(n):
                out[i][j] /= s
        worst = 0.0
        for i in range(n):
            worst = max(worst, abs(sum(out[i]) - 1.0))
        for j in range(n):
            worst = max(worst, abs(sum(out[i][j] for i in range(n)) - 1.0))
        if worst <= tol:
            for i in range(n):
                s = sum(out[i])
                for j in range(n):
                    out[i][j] /= s
            return out
    raise RuntimeError("alternating normalization did not converge")


def doubly_stochastic(n, seed, alpha="random"):
    rng = np.random.default_rng(seed)
    raw = [[float(rng.random()) for _ in range(n)] for _ in range(n)]
    base = alternating_normalize(raw)
    perm = [int(p) for p in rng.permutation(n)]
    if alpha == "random":
        alpha = float(rng.uniform())
    out = [[alpha * base[i][j] for j in range(n)] for i in range(n)]
    for i in range(n):
        out[i][perm[i]] += 1.0 - alpha
    return out, alpha


def symmetric(n, seed):
    rng = np.random.default_rng(seed)
    raw = [[float(rng.random()) for _ in range(n)] for _ in range(n)]
    base = alternating_normalize(raw)
    out = [[0.5 * (base[i][j] + base[j][i]) for j in range(n)] for i in range(n)]
    return out


def write_csv(path, matrix):
    lines = [",".join("%.17g" % v for v in row) for row in matrix]
    path.write_text("\n".join(lines) + "\n")


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(7)
    raw = [[float(rng.random()) for _ in range(20)] for _ in range(20)]
    plain = alternating_normalize(raw)
    write_csv(OUT_DIR / "sinkhorn_n20_seed7.csv", plain)
    (OUT_DIR / "sinkhorn_n20_seed7.json").write_text(json.dumps(
        {"kind": "sinkhorn_of_uniform_raw", "n": 20, "seed": 7, "tol": 1e-12},
        indent=2, sort_keys=True) + "\n")

    ds, alpha = doubly_stochastic(20, 11)
    write_csv(OUT_DIR / "doubly_stochastic_n20_seed11.csv", ds)
    (OUT_DIR / "doubly_stochastic_n20_seed11.json").write_text(json.dumps(
        {"kind": "doubly_stochastic", "n": 20, "seed": 11, "alpha": alpha},
        indent=2, sort_keys=True) + "\n")

    sym = symmetric(20, 3)
    write_csv(OUT_DIR / "symmetric_n20_seed3.csv", sym)
    (OUT_DIR / "symmetric_n20_seed3.json").write_text(json.dumps(
        {"kind": "symmetric", "n": 20, "seed": 3},
        indent=2, sort_keys=True) + "\n")

    print("wrote goldens to", OUT_DIR)


if __name__ == "__main__":
    main()
