"""Hamiltonian terms, smoothness metadata and the checks the planners rely on.

A simulation input is a sum of Hermitian terms, each sparse in its own basis:
``H(t) = sum_a  T_a^dag  H_a(t)  T_a``.  Every term carries the union-over-time
sparsity pattern and, for catalog entries, analytic bounds on the norms of its
time derivatives.  Planners consume only declared bounds; finite differences
exist for verification and are never used to plan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-12


class DegenerateInputError(ValueError):
    """Raised for inputs the planners cannot meaningfully process."""


class InsufficientSmoothnessError(ValueError):
    """Raised when required derivative data is missing or unbounded."""


class OutOfIntervalError(ValueError):
    """Raised when an evaluation time falls outside a term's declared interval."""


@dataclass(frozen=True)
class HamiltonianTerm:
    """One time-dependent Hermitian matrix with sparsity and basis metadata.

    Attributes:
        dim: matrix dimension (a power of two for statevector runs).
        evaluate: pure function t -> Hermitian ndarray of shape (dim, dim).
        pattern: union-over-time nonzero positions as a frozenset of
            (row, col) pairs; must be symmetric.
        transform: basis transform applied as T^dag H T, or None for identity.
        derivative_bound: optional (order p, time t) -> bound on the spectral
            norm of the p-th derivative.  Analytic, declared by the catalog.
        interval: closed time interval on which the term is declared.
        name: label used in reports.
    """

    dim: int
    evaluate: Callable[[float], np.ndarray]
    pattern: frozenset
    transform: np.ndarray | None = None
    derivative_bound: Callable[[int, float], float] | None = None
    interval: tuple[float, float] = (0.0, 1.0)
    name: str = "term"

    def element(self, x: int, y: int, t: float) -> complex:
        """Matrix element at (x, y) and time t; zero outside the pattern."""
        if (x, y) not in self.pattern:
            return 0.0 + 0.0j
        return complex(self.evaluate(t)[x, y])

    @property
    def qubits(self) -> int:
        n = int(round(math.log2(self.dim)))
        if 2**n != self.dim:
            raise DegenerateInputError(f"dim {self.dim} is not a power of two")
        return n

    def validate(self, times: Sequence[float]) -> None:
        """Check Hermiticity, pattern containment and transform unitarity.

        Raises ValueError with the first violated invariant.
        """
        if not self.pattern:
            raise DegenerateInputError("empty sparsity pattern")
        for (x, y) in self.pattern:
            if (y, x) not in self.pattern:
                raise ValueError(f"pattern not symmetric: ({x},{y}) has no partner")
        for t in times:
            h = np.asarray(self.evaluate(t), dtype=complex)
            scale = max(np.linalg.norm(h, 2), 1.0)
            if np.linalg.norm(h - h.conj().T, 2) > HERMITICITY_TOL * scale:
                raise ValueError(f"{self.name}: not Hermitian at t={t}")
            nz = np.argwhere(np.abs(h) > 0)
            for x, y in nz:
                if (int(x), int(y)) not in self.pattern:
                    raise ValueError(
                        f"{self.name}: nonzero entry ({x},{y}) at t={t} outside pattern"
                    )
        if self.transform is not None:
            tmat = np.asarray(self.transform)
            err = np.linalg.norm(tmat.conj().T @ tmat - np.eye(self.dim), 2)
            if err > UNITARITY_TOL * self.dim:
                raise ValueError(f"{self.name}: transform not unitary (residual {err:.2e})")


class TabulatedBound:
    """Piecewise-linear declared upper bound for a positive function of time.

    Catalog profiles tabulate their smoothness envelopes on a dense grid so
    schedule construction stays cheap.  The declared function IS the
    interpolant, so the tightest growth constant can be computed exactly from
    the segment slopes.
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray, floor: float = 0.0):
        grid = np.asarray(grid, dtype=float)
        values = np.maximum(np.asarray(values, dtype=float), floor)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 2:
            raise DegenerateInputError("need matching 1-d grid/values with >= 2 nodes")
        if np.any(np.diff(grid) <= 0):
            raise DegenerateInputError("grid must be strictly increasing")
        self.grid = grid
        self.values = values
        self.floor = floor

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    def average(self) -> float:
        """Exact average of the interpolant over its grid."""
        span = self.grid[-1] - self.grid[0]
        return float(np.trapezoid(self.values, self.grid) / span)

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    def tightest_growth_constant(self) -> float:
        """Smallest K with |d/dt bound| <= K^2 bound^2, exact for the interpolant."""
        dv = np.abs(np.diff(self.values))
        dt = np.diff(self.grid)
        lo = np.minimum(self.values[:-1], self.values[1:])
        with np.errstate(divide="ignore", invalid="ignore"):
            k2 = np.where(dv > 0, dv / dt / np.maximum(lo, 1e-300) ** 2, 0.0)
        return float(np.sqrt(k2.max())) if len(k2) else 0.0


@dataclass(frozen=True)
class SmoothnessProfile:
    """Declared smoothness data for one interval and one formula order.

    Attributes:
        k: half the smoothness order (the product formula is accurate to
            order 2k, derivatives up to order P = 2k enter the bounds).
        lambda_bound: uniform bound over the interval.
        upsilon: pointwise bound evaluator, time -> float.
        growth_constant: K with |d/dt upsilon| <= K^2 upsilon^2.
        interval: the interval both bounds are declared on.
    """

    k: int
    lambda_bound: float
    upsilon: Callable[[float], float]
    growth_constant: float
    interval: tuple[float, float]

    @property
    def order(self) -> int:
        return 2 * self.k

    def average_upsilon(self) -> float:
        if isinstance(self.upsilon, TabulatedBound):
            return self.upsilon.average()
        from scipy.integrate import quad

        a, b = self.interval
        val, _ = quad(self.upsilon, a, b, limit=400)
        return float(val / (b - a))

    def validate(self, samples: int = 64) -> None:
        a, b = self.interval
        ts = np.linspace(a, b, samples)
        ups = np.array([float(self.upsilon(t)) for t in ts])
        if self.lambda_bound + 1e-12 < ups.max():
            raise ValueError(
                f"lambda_bound {self.lambda_bound} below sampled upsilon max {ups.max()}"
            )
        if np.any(ups < 0):
            raise ValueError("upsilon must be nonnegative")


def sparsity_degree(term: HamiltonianTerm) -> int:
    """Maximum number of union-pattern entries in any row."""
    if not term.pattern:
        raise DegenerateInputError("empty sparsity pattern")
    counts: dict[int, int] = {}
    for x, _ in term.pattern:
        counts[x] = counts.get(x, 0) + 1
    return max(counts.values())


def _central_difference(term: HamiltonianTerm, p: int, t: float, h: float) -> np.ndarray:
    # p-th order central stencil: sum_i (-1)^i C(p,i) f(t + (p/2 - i) h) / h^p
    acc = np.zeros((term.dim, term.dim), dtype=complex)
    for i in range(p + 1):
        offset = (p / 2.0 - i) * h
        acc += (-1) ** i * math.comb(p, i) * np.asarray(term.evaluate(t + offset), dtype=complex)
    return acc / h**p


def estimate_derivative_norm(term: HamiltonianTerm, p: int, t: float, h: float) -> float:
    """Spectral norm of the p-th time derivative, by central finite differences.

    Verification-only fallback: a second-order central stencil with one
    Richardson refinement.  Planners must use declared analytic bounds.
    """
    if p < 0 or h <= 0:
        raise DegenerateInputError("need p >= 0 and h > 0")
    lo, hi = term.interval
    reach = (p / 2.0 + 1.0) * h
    if t - reach < lo - 1e-12 or t + reach > hi + 1e-12:
        raise OutOfIntervalError(
            f"stencil [{t - reach}, {t + reach}] leaves declared interval [{lo}, {hi}]"
        )
    if p == 0:
        return float(np.linalg.norm(np.asarray(term.evaluate(t), dtype=complex), 2))
    coarse = _central_difference(term, p, t, h)
    fine = _central_difference(term, p, t, h / 2.0)
    richardson = (4.0 * fine - coarse) / 3.0
    return float(np.linalg.norm(richardson, 2))


def _derivative_norm(term: HamiltonianTerm, p: int, t: float, fd_step: float | None) -> float:
    if term.derivative_bound is not None:
        return float(term.derivative_bound(p, t))
    if fd_step is None:
        raise InsufficientSmoothnessError(
            f"{term.name}: no derivative bound at order {p} and finite differences disabled"
        )
    return estimate_derivative_norm(term, p, t, fd_step)


def upsilon_floor(
    terms: Sequence[HamiltonianTerm],
    P: int,
    t: float,
    fd_step: float | None = None,
) -> float:
    """Smallest admissible pointwise smoothness bound at time t.

    Returns max over p in {0..P} of (sum_j ||H_j^(p)(t)||)^(1/(p+1)), using the
    terms' declared derivative bounds (or finite differences when fd_step is
    given and a term declares none).
    """
    best = 0.0
    for p in range(P + 1):
        total = sum(_derivative_norm(term, p, t, fd_step) for term in terms)
        best = max(best, total ** (1.0 / (p + 1)))
    return best


@dataclass
class GrowthCheckReport:
    """Outcome of checking |d/dt upsilon| <= K^2 upsilon^2 on sample points."""

    violations: list = field(default_factory=list)
    tightest_K: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_upsilon_derivative_bound(
    profile: SmoothnessProfile,
    terms: Sequence[HamiltonianTerm],
    interval: tuple[float, float],
    samples: int,
) -> GrowthCheckReport:
    """Report every sample point where the declared growth constant fails.

    The derivative of the declared upsilon is estimated by central differences
    on the sample spacing.  Report-only: never raises for violations.
    """
    if samples < 2:
        raise DegenerateInputError("need at least 2 samples")
    a, b = interval
    ts = np.linspace(a, b, samples)
    h = (b - a) / (samples - 1) / 8.0
    report = GrowthCheckReport()
    k2 = profile.growth_constant**2
    worst = 0.0
    for t in ts:
        t0 = min(max(t, a + h), b - h)
        deriv = (float(profile.upsilon(t0 + h)) - float(profile.upsilon(t0 - h))) / (2 * h)
        ups = float(profile.upsilon(t0))
        if ups <= 0:
            continue
        ratio = abs(deriv) / ups**2
        worst = max(worst, ratio)
        if abs(deriv) > k2 * ups**2 * (1 + 1e-9) + 1e-12:
            report.violations.append((float(t0), float(deriv), ups))
    report.tightest_K = math.sqrt(worst)
    return report
