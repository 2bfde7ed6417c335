"""Shared numeric helpers for the test suite."""

from __future__ import annotations

import numpy as np


def central_fd(fun, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    xf = x.ravel()
    for i in range(xf.size):
        bump = np.zeros_like(xf)
        bump[i] = h
        hi = fun((xf + bump).reshape(x.shape))
        lo = fun((xf - bump).reshape(x.shape))
        flat[i] = (hi - lo) / (2.0 * h)
    return grad


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    """Relative error of a against reference b in the Frobenius norm."""
    denom = np.linalg.norm(b)
    if denom == 0.0:
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(a - b) / denom)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> bool:
    """Record one acceptance line for the terminal summary and echo it."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
