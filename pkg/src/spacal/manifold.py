"""Riemannian conjugate gradient on the complex circle manifold.

The manifold is the set of complex arrays with every entry of unit
modulus. Projection, retraction and the Polak-Ribiere+ driver operate
entrywise, so vectors and matrices share one implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["tangent_project", "retract", "rcg_minimize", "RcgResult"]

_TINY = 1e-300


def tangent_project(x: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Project an ambient vector onto the tangent space at x (|x_i| = 1)."""
    return e - np.real(e * x.conj()) * x


def retract(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Entrywise normalization retraction; returns x where x + v vanishes."""
    y = x + v
    mag = np.abs(y)
    return np.where(mag > 0, y / np.maximum(mag, _TINY), x)


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a.ravel(), b.ravel())))


@dataclass
class RcgResult:
    x: np.ndarray
    cost: float
    iterations: int
    grad_norm: float
    cost_trace: list


def rcg_minimize(x0: np.ndarray,
                 cost: Callable[[np.ndarray], float],
                 egrad: Callable[[np.ndarray], np.ndarray],
                 max_iter: int = 200,
                 grad_tol: float = 1e-8,
                 initial_step: float = 1.0,
                 armijo_c: float = 1e-4,
                 shrink: float = 0.5,
                 max_backtracks: int = 50) -> RcgResult:
    """Minimize a smooth cost over unit-modulus arrays.

    Polak-Ribiere+ conjugacy with projection-based transport, Armijo
    backtracking on the retraction, restart to steepest descent whenever
    the conjugate direction fails to descend. The cost callable may
    return ``inf`` to veto a candidate (the line search then shrinks).
    """
    x = np.array(x0, dtype=complex)
    f = cost(x)
    r = tangent_project(x, egrad(x))
    r2 = _inner(r, r)
    d = -r
    trace = [f]
    alpha_prev = initial_step
    it = 0
    for it in range(1, max_iter + 1):
        if np.sqrt(r2) <= grad_tol:
            it -= 1
            break
        slope = _inner(r, d)
        if slope >= 0:
            d = -r
            slope = -r2
        alpha = min(2.0 * alpha_prev, initial_step * 1024.0)
        accepted = False
        for _ in range(max_backtracks):
            cand = retract(x, alpha * d)
            fc = cost(cand)
            if fc <= f + armijo_c * alpha * slope:
                accepted = True
                break
            alpha *= shrink
        if not accepted:
            break
        alpha_prev = alpha
        r_new = tangent_project(cand, egrad(cand))
        r2_new = _inner(r_new, r_new)
        pr = _inner(r_new, r_new - tangent_project(cand, r))
        beta = max(0.0, pr / max(r2, _TINY))
        d = -r_new + beta * tangent_project(cand, d)
        x, f, r, r2 = cand, fc, r_new, r2_new
        trace.append(f)
    return RcgResult(x=x, cost=f, iterations=it, grad_norm=float(np.sqrt(r2)), cost_trace=trace)
