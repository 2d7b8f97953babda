"""Ground-truth propagator and error metrics.

The reference integrates the matrix equation U' = -i H(t) U with a classic
fourth-order one-step scheme under step-doubling error control (accepted
steps keep the Richardson-extrapolated result).  It shares no code with the
product-formula path it is used to judge.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


class ToleranceNotReachedError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


class InsufficientDataError(ValueError):
    def __init__(self, message: str, at_floor: int = 0):
        super().__init__(message)
        self.at_floor = at_floor


def _rk4_step(h_fn, t: float, h: float, u: np.ndarray) -> np.ndarray:
    k1 = -1j * (h_fn(t) @ u)
    k2 = -1j * (h_fn(t + 0.5 * h) @ (u + 0.5 * h * k1))
    k3 = -1j * (h_fn(t + 0.5 * h) @ (u + 0.5 * h * k2))
    k4 = -1j * (h_fn(t + h) @ (u + h * k3))
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_piece(h_fn, t_a, t_b, u, tol, total_span):
    t = t_a
    h = (t_b - t_a) / 16.0
    h_min = (t_b - t_a) * 1e-13
    while t < t_b - 1e-15 * total_span:
        h = min(h, t_b - t)
        one = _rk4_step(h_fn, t, h, u)
        half = _rk4_step(h_fn, t, 0.5 * h, u)
        two = _rk4_step(h_fn, t + 0.5 * h, 0.5 * h, half)
        err = float(np.linalg.norm(two - one)) / 15.0
        budget = tol * h / total_span
        if err <= budget or h <= h_min:
            if err > budget and h <= h_min:
                raise ToleranceNotReachedError(
                    f"step error {err:.3e} above budget {budget:.3e} at minimum step",
                    achieved=err * total_span / h,
                )
            u = two + (two - one) / 15.0
            t += h
        scale = 0.9 * (budget / max(err, 1e-300)) ** 0.2
        h *= min(4.0, max(0.1, scale))
    return u


def exact_propagator(
    h_fn: Callable[[float], np.ndarray],
    t_a: float,
    t_b: float,
    tol: float = 1e-12,
    discontinuities: Sequence[float] = (),
) -> np.ndarray:
    """Time-ordered evolution operator U(t_b, t_a) to operator-norm accuracy tol.

    h_fn must return the assembled Hermitian matrix.  Listed discontinuities
    inside (t_a, t_b) split the integration into smooth pieces.
    """
    if not t_b > t_a:
        raise ValueError("need t_b > t_a")
    dim = np.asarray(h_fn(t_a)).shape[0]
    cuts = [t for t in sorted(discontinuities) if t_a < t < t_b]
    edges = [t_a, *cuts, t_b]
    u = np.eye(dim, dtype=complex)
    for lo, hi in zip(edges[:-1], edges[1:]):
        u = _integrate_piece(h_fn, lo, hi, u, tol, t_b - t_a)
    return u


def operator_error(u_exact: np.ndarray, u_approx: np.ndarray) -> float:
    """Spectral-norm distance (largest singular value of the difference)."""
    a = np.asarray(u_exact)
    b = np.asarray(u_approx)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b, 2))


ERROR_FLOOR = 1e-14


def order_scaling_probe(
    entry,
    k: int,
    dts: Sequence[float],
    t0: float = 0.1,
    tol: float = 1e-13,
) -> float:
    """Fitted log-log slope of single-segment splitting error against length.

    Points whose error sits at the round-off floor are excluded; if everything
    is excluded the formula is exact on this input and no slope exists.
    """
    from .decomposition import DecomposedHamiltonian
    from .integrator import Segment, build_segment_plan, plan_as_matrix

    decomp = DecomposedHamiltonian.build(entry.terms)
    usable_dt, usable_err = [], []
    floor_count = 0
    for dt in dts:
        plan = build_segment_plan(Segment(t0, t0 + dt, k), decomp)
        realized = plan_as_matrix(plan, decomp)
        exact = exact_propagator(entry.full_hamiltonian, t0, t0 + dt, tol=tol)
        err = operator_error(exact, realized)
        if err < ERROR_FLOOR:
            floor_count += 1
            continue
        usable_dt.append(dt)
        usable_err.append(err)
    if len(usable_dt) < 3:
        msg = (
            "formula is exact on this input (all errors at round-off floor)"
            if floor_count == len(list(dts))
            else f"only {len(usable_dt)} usable points above the error floor"
        )
        raise InsufficientDataError(msg, at_floor=floor_count)
    slope, _ = np.polyfit(np.log(usable_dt), np.log(usable_err), 1)
    return float(slope)
