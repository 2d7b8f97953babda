"""Built-in Hamiltonian catalog.

Reproducible test systems with declared analytic derivative bounds:

* ``gaussian_delta``   -- narrow Gaussian pulse times identity, the sharply
  peaked system where adaptive stepping pays off.
* ``singular_scalar``  -- t^5 sin(1/t) e^-t times identity, whose higher
  derivatives diverge at t = 0 (order-adaptive splitting target).
* ``random_sparse``    -- seeded d-sparse matrix with trigonometric-polynomial
  time dependence, smooth to every order.
* ``piecewise_jumps``  -- off-diagonal pulse with jump discontinuities at
  listed interior times.
* ``noncommuting_pair`` -- cos(t) X plus sin(t) Z on one qubit, the standard
  order-scaling probe.

Planners consume only what each entry declares: derivative-norm bounds, the
tabulated pointwise-smoothness envelope, a magnitude bound for the element
oracle, and a bound on the first time derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from .model import HamiltonianTerm, SmoothnessProfile, TabulatedBound

ENVELOPE_PAD = 1.005  # safety factor on tabulated bound nodes

# Term evaluators are pure functions of t, so a small memo is safe; within one
# splitting segment every class shares a handful of evaluation times, making
# hits the common case.  Callers must treat returned matrices as read-only.
_EVAL_MEMO = 16


@dataclass(frozen=True)
class CatalogEntry:
    """A catalog Hamiltonian plus everything the planners need declared."""

    name: str
    terms: tuple
    interval: tuple[float, float]
    h_max: float
    max_dh: float
    deriv_total: Callable[[int, np.ndarray], np.ndarray]
    discontinuities: tuple = ()
    upsilon_floor_abs: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.terms[0].dim

    @property
    def qubits(self) -> int:
        return self.terms[0].qubits

    def upsilon_values(self, P: int, ts: np.ndarray) -> np.ndarray:
        """Pointwise-smallest smoothness bound on a grid, from declared bounds."""
        ts = np.asarray(ts, dtype=float)
        best = np.zeros_like(ts)
        for p in range(P + 1):
            totals = np.asarray(self.deriv_total(p, ts), dtype=float)
            np.maximum(best, totals ** (1.0 / (p + 1)), out=best)
        return best

    def profile(
        self,
        k: int,
        interval: tuple[float, float] | None = None,
        nodes: int = 4097,
    ) -> SmoothnessProfile:
        """Tabulated smoothness declaration for a 2k-order run on an interval.

        The declared pointwise bound is a padded piecewise-linear envelope with
        a small positive floor (so step recurrences stay finite where the true
        bound underflows); its growth constant is exact for the interpolant.
        """
        lo, hi = interval if interval is not None else self.interval
        ts = np.linspace(lo, hi, nodes)
        vals = self.upsilon_values(2 * k, np.maximum(ts, 1e-12)) * ENVELOPE_PAD
        if not np.all(np.isfinite(vals)):
            raise ValueError(
                f"{self.name}: smoothness bound diverges on [{lo}, {hi}] at order {2 * k}"
            )
        tab = TabulatedBound(ts, vals, floor=self.upsilon_floor_abs)
        return SmoothnessProfile(
            k=k,
            lambda_bound=tab.max(),
            upsilon=tab,
            growth_constant=tab.tightest_growth_constant(),
            interval=(lo, hi),
        )

    def full_hamiltonian(self, t: float) -> np.ndarray:
        """Assembled H(t) = sum_a T_a^dag H_a(t) T_a as a dense matrix."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for term in self.terms:
            h = np.asarray(term.evaluate(t), dtype=complex)
            if term.transform is not None:
                h = term.transform.conj().T @ h @ term.transform
            total += h
        return total


def _diag_pattern(dim: int) -> frozenset:
    return frozenset((x, x) for x in range(dim))


def _hermite_abs(p: int, x: np.ndarray) -> np.ndarray:
    h0 = np.ones_like(x)
    if p == 0:
        return np.abs(h0)
    h1 = 2.0 * x
    for k in range(1, p):
        h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
    return np.abs(h1)


def gaussian_delta(a: float = 0.1, qubits: int = 1, center: float = 1.0) -> CatalogEntry:
    """Normalized Gaussian pulse times identity on [0, 2].

    H(t) = exp(-(t-center)^2/a^2) / (a sqrt(pi)) * I.  All derivative norms are
    exact via Hermite polynomials.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    dim = 2**qubits
    root_pi = math.sqrt(math.pi)

    def scalar(t: float) -> float:
        u = (t - center) / a
        return math.exp(-u * u) / (a * root_pi)

    @lru_cache(maxsize=_EVAL_MEMO)
    def evaluate(t: float) -> np.ndarray:
        return scalar(t) * np.eye(dim, dtype=complex)

    def deriv_bound(p: int, t: float) -> float:
        u = np.asarray((t - center) / a)
        return float(_hermite_abs(p, u) * np.exp(-u * u) / (a ** (p + 1) * root_pi))

    def deriv_total(p: int, ts: np.ndarray) -> np.ndarray:
        u = (np.asarray(ts) - center) / a
        return _hermite_abs(p, u) * np.exp(-u * u) / (a ** (p + 1) * root_pi)

    term = HamiltonianTerm(
        dim=dim,
        evaluate=evaluate,
        pattern=_diag_pattern(dim),
        derivative_bound=deriv_bound,
        interval=(0.0, 2.0),
        name=f"gaussian(a={a})",
    )
    return CatalogEntry(
        name="gaussian_delta",
        terms=(term,),
        interval=(0.0, 2.0),
        h_max=1.0 / (a * root_pi),
        max_dh=math.sqrt(2.0) * math.exp(-0.5) / (a * a * root_pi),
        deriv_total=deriv_total,
        upsilon_floor_abs=0.3,
        params={"a": a, "qubits": qubits},
    )


def _singular_derivatives(max_order: int = 6):
    t = sp.Symbol("t", positive=True)
    g = t**5 * sp.sin(1 / t) * sp.exp(-t)
    funcs = []
    expr = g
    for _ in range(max_order + 1):
        funcs.append(sp.lambdify(t, expr, modules="numpy"))
        expr = sp.diff(expr, t)
    return funcs


def singular_scalar(horizon: float = 2.0, qubits: int = 1) -> CatalogEntry:
    """H(t) = t^5 sin(1/t) e^-t * I on [0, horizon].

    Derivatives of order three and above diverge as t -> 0, so only a
    second-order run is admissible on intervals containing the origin.
    """
    dim = 2**qubits
    funcs = _singular_derivatives()

    @lru_cache(maxsize=_EVAL_MEMO)
    def evaluate(t: float) -> np.ndarray:
        tt = max(float(t), 1e-12)
        return float(funcs[0](tt)) * np.eye(dim, dtype=complex)

    def deriv_bound(p: int, t: float) -> float:
        tt = max(float(t), 1e-9)
        return float(np.abs(funcs[p](tt)))

    def deriv_total(p: int, ts: np.ndarray) -> np.ndarray:
        tt = np.maximum(np.asarray(ts, dtype=float), 1e-9)
        return np.abs(funcs[p](tt))

    term = HamiltonianTerm(
        dim=dim,
        evaluate=evaluate,
        pattern=_diag_pattern(dim),
        derivative_bound=deriv_bound,
        interval=(0.0, horizon),
        name="singular(t^5 sin(1/t) e^-t)",
    )
    grid = np.linspace(1e-9, horizon, 20001)
    g_abs = np.abs(funcs[0](grid))
    g1_abs = np.abs(funcs[1](grid))
    return CatalogEntry(
        name="singular_scalar",
        terms=(term,),
        interval=(0.0, horizon),
        h_max=float(g_abs.max()) * ENVELOPE_PAD,
        max_dh=float(g1_abs.max()) * ENVELOPE_PAD,
        deriv_total=deriv_total,
        upsilon_floor_abs=0.08,
        params={"horizon": horizon, "qubits": qubits},
    )


class _TrigCoefficient:
    """sum_j c_j exp(i (w_j t + phi_j)), with exact derivative magnitude bounds."""

    def __init__(self, amps, freqs, phases):
        self.terms = [(float(a), float(w), float(p)) for a, w, p in zip(amps, freqs, phases)]

    def __call__(self, t: float) -> complex:
        total = 0.0j
        for a, w, p in self.terms:
            arg = w * t + p
            total += complex(a * math.cos(arg), a * math.sin(arg))
        return total

    def real_part(self, t: float) -> float:
        return sum(a * math.cos(w * t + p) for a, w, p in self.terms)

    def deriv_bound(self, p: int) -> float:
        return sum(a * w**p for a, w, _ in self.terms)

    def real_deriv_bound(self, p: int) -> float:
        return self.deriv_bound(p)


def _random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_sparse(
    seed: int = 0,
    qubits: int = 2,
    amplitude: float = 0.3,
    base_freq: float = 0.8,
    transform: str = "none",
    interval: tuple[float, float] = (0.0, 1.0),
) -> CatalogEntry:
    """Seeded 2-sparse Hermitian term with smooth trigonometric time dependence.

    The union pattern is the full diagonal plus a random perfect matching, so
    every row holds at most two entries.  Entry coefficients are short
    trigonometric polynomials; derivative norms of every order are declared
    exactly from the coefficient magnitudes.
    """
    rng = np.random.default_rng(seed)
    dim = 2**qubits
    perm = rng.permutation(dim)
    pairs = [tuple(sorted((int(perm[2 * i]), int(perm[2 * i + 1])))) for i in range(dim // 2)]

    def draw_coeff() -> _TrigCoefficient:
        n = 2
        amps = amplitude * (0.3 + 0.7 * rng.random(n)) / n
        freqs = base_freq * (0.5 + rng.random(n))
        phases = 2 * math.pi * rng.random(n)
        return _TrigCoefficient(amps, freqs, phases)

    diag_coeffs = {x: draw_coeff() for x in range(dim)}
    pair_coeffs = {pair: draw_coeff() for pair in pairs}

    pattern = set((x, x) for x in range(dim))
    for (x, y) in pairs:
        pattern.add((x, y))
        pattern.add((y, x))

    @lru_cache(maxsize=_EVAL_MEMO)
    def evaluate(t: float) -> np.ndarray:
        h = np.zeros((dim, dim), dtype=complex)
        for x, coeff in diag_coeffs.items():
            h[x, x] = coeff.real_part(t)
        for (x, y), coeff in pair_coeffs.items():
            z = coeff(t)
            h[x, y] = z
            h[y, x] = z.conjugate()
        return h

    def row_bound(p: int) -> float:
        # max absolute row sum bounds the spectral norm of a Hermitian matrix
        best = 0.0
        for x in range(dim):
            total = diag_coeffs[x].real_deriv_bound(p)
            for pair in pairs:
                if x in pair:
                    total += pair_coeffs[pair].deriv_bound(p)
            best = max(best, total)
        return best

    def deriv_bound(p: int, t: float) -> float:
        return row_bound(p)

    def deriv_total(p: int, ts: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(ts, dtype=float), row_bound(p))

    tmat = None
    if transform == "random":
        tmat = _random_unitary(dim, rng)
    elif transform not in ("none", None):
        raise ValueError(f"unknown transform kind {transform!r}")

    term = HamiltonianTerm(
        dim=dim,
        evaluate=evaluate,
        pattern=frozenset(pattern),
        transform=tmat,
        derivative_bound=deriv_bound,
        interval=interval,
        name=f"random_sparse(seed={seed})",
    )
    h_max = max(
        max(c.deriv_bound(0) for c in diag_coeffs.values()),
        max(c.deriv_bound(0) for c in pair_coeffs.values()),
    )
    return CatalogEntry(
        name="random_sparse",
        terms=(term,),
        interval=interval,
        h_max=h_max,
        max_dh=row_bound(1),
        deriv_total=deriv_total,
        params={
            "seed": seed,
            "qubits": qubits,
            "amplitude": amplitude,
            "base_freq": base_freq,
            "transform": transform,
        },
    )


def piecewise_jumps(
    jumps: tuple[float, ...] = (0.5, 1.0),
    interval: tuple[float, float] = (0.0, 1.5),
    amplitude: float = 0.8,
    seed: int = 7,
) -> CatalogEntry:
    """Single-qubit off-diagonal pulse with jump discontinuities.

    Each smooth piece carries its own amplitude, frequency and phase, so both
    the element values and their derivatives jump at the listed times.
    """
    lo, hi = interval
    jumps = tuple(sorted(float(j) for j in jumps))
    if any(not (lo < j < hi) for j in jumps):
        raise ValueError("jump times must lie strictly inside the interval")
    rng = np.random.default_rng(seed)
    edges = [lo, *jumps, hi]
    npieces = len(edges) - 1
    amps = amplitude * (0.5 + 0.5 * rng.random(npieces))
    freqs = 1.0 + rng.random(npieces)
    phases = 2 * math.pi * rng.random(npieces)

    def piece_index(t: float) -> int:
        idx = int(np.searchsorted(np.asarray(jumps), t, side="right"))
        return min(idx, npieces - 1)

    def coeff(t: float) -> complex:
        i = piece_index(t)
        arg = freqs[i] * t + phases[i]
        return complex(amps[i] * math.cos(arg), amps[i] * math.sin(arg))

    @lru_cache(maxsize=_EVAL_MEMO)
    def evaluate(t: float) -> np.ndarray:
        z = coeff(t)
        return np.array([[0.0, z], [z.conjugate(), 0.0]], dtype=complex)

    def deriv_bound(p: int, t: float) -> float:
        i = piece_index(t)
        return float(amps[i] * freqs[i] ** p)

    def deriv_total(p: int, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        idx = np.minimum(np.searchsorted(np.asarray(jumps), ts, side="right"), npieces - 1)
        return amps[idx] * freqs[idx] ** p

    term = HamiltonianTerm(
        dim=2,
        evaluate=evaluate,
        pattern=frozenset({(0, 1), (1, 0)}),
        derivative_bound=deriv_bound,
        interval=interval,
        name=f"piecewise(L={len(jumps)})",
    )
    return CatalogEntry(
        name="piecewise_jumps",
        terms=(term,),
        interval=interval,
        h_max=float(amps.max()),
        max_dh=float((amps * freqs).max()),
        deriv_total=deriv_total,
        discontinuities=jumps,
        params={"jumps": jumps, "interval": interval, "amplitude": amplitude, "seed": seed},
    )


def noncommuting_pair(interval: tuple[float, float] = (0.0, 3.0)) -> CatalogEntry:
    """cos(t) X plus sin(t) Z on one qubit; derivative bounds are exact."""

    @lru_cache(maxsize=_EVAL_MEMO)
    def eval_x(t: float) -> np.ndarray:
        c = math.cos(t)
        return np.array([[0.0, c], [c, 0.0]], dtype=complex)

    @lru_cache(maxsize=_EVAL_MEMO)
    def eval_z(t: float) -> np.ndarray:
        s = math.sin(t)
        return np.array([[s, 0.0], [0.0, -s]], dtype=complex)

    def bound_x(p: int, t: float) -> float:
        return abs(math.cos(t + p * math.pi / 2))

    def bound_z(p: int, t: float) -> float:
        return abs(math.sin(t + p * math.pi / 2))

    def deriv_total(p: int, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.abs(np.cos(ts + p * math.pi / 2)) + np.abs(np.sin(ts + p * math.pi / 2))

    term_x = HamiltonianTerm(
        dim=2,
        evaluate=eval_x,
        pattern=frozenset({(0, 1), (1, 0)}),
        derivative_bound=bound_x,
        interval=interval,
        name="cos(t) X",
    )
    term_z = HamiltonianTerm(
        dim=2,
        evaluate=eval_z,
        pattern=frozenset({(0, 0), (1, 1)}),
        derivative_bound=bound_z,
        interval=interval,
        name="sin(t) Z",
    )
    return CatalogEntry(
        name="noncommuting_pair",
        terms=(term_x, term_z),
        interval=interval,
        h_max=1.0,
        max_dh=1.0,
        deriv_total=deriv_total,
        params={},
    )


_BUILDERS = {
    "gaussian_delta": gaussian_delta,
    "singular_scalar": singular_scalar,
    "random_sparse": random_sparse,
    "piecewise_jumps": piecewise_jumps,
    "noncommuting_pair": noncommuting_pair,
}


def available() -> list[str]:
    return sorted(_BUILDERS)


def get_entry(name: str, **params) -> CatalogEntry:
    """Instantiate a catalog entry by name with keyword parameters."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; available: {available()}") from None
    return builder(**params)
