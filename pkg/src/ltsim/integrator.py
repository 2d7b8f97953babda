"""Recursive product-formula plans and their execution.

A plan is the ordered list of primitive operations realizing the order-2k
splitting of the evolution over one or more segments.  The order-2 base case
evaluates every class at the segment midpoint for half the segment, sweeping
classes forward then backward; each recursion level replaces a segment by
five sub-segments with fractions s_l = 1/(4 - 4^(1/(2l-1))), the middle one
running backward in time.  Steps are stored in application order (first step
hits the state first).

Basis transforms wrap each term's block of color classes once per sweep, so a
segment at order 2k uses 4 M 5^(k-1) transform applications against
2 m 5^(k-1) exponentials.  Terms whose transform is the identity contribute no
transform steps at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import DecomposedHamiltonian
from .executor import apply_one_sparse_exponential, apply_transform
from .oracle import OracleConfig, QueryLedger, mesh_window

TRANSFORM = "transform"
TRANSFORM_INV = "transform_inv"
EXPONENTIAL = "exp"


@dataclass(frozen=True)
class PlanStep:
    kind: str
    term: int
    color: int
    eval_time: float
    duration: float

    def to_line(self) -> str:
        return ",".join(
            (
                self.kind,
                str(self.term),
                str(self.color),
                format(self.eval_time, ".17g"),
                format(self.duration, ".17g"),
            )
        )

    @classmethod
    def from_line(cls, line: str) -> "PlanStep":
        kind, term, color, eval_time, duration = line.strip().split(",")
        return cls(kind, int(term), int(color), float(eval_time), float(duration))


@dataclass(frozen=True)
class Segment:
    """One time slice integrated by a single order-2k formula."""

    t_start: float
    t_end: float
    k: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("segment must have positive length")
        if self.k < 1:
            raise ValueError("k must be a positive integer")


@dataclass(frozen=True)
class ExponentialPlan:
    """Ordered primitive operations plus segment bookkeeping.

    window is the subinterval all evaluation times may be rounded within; for
    a smooth run it is the whole simulated interval, for an excised run the
    containing smooth piece.
    """

    steps: tuple
    segment_boundaries: tuple
    segment_slices: tuple
    k: int
    window: tuple[float, float]

    @property
    def exponential_count(self) -> int:
        return sum(1 for s in self.steps if s.kind == EXPONENTIAL)

    @property
    def transform_count(self) -> int:
        return sum(1 for s in self.steps if s.kind != EXPONENTIAL)

    @property
    def segment_count(self) -> int:
        return len(self.segment_slices)

    def segment_steps(self, i: int):
        lo, hi = self.segment_slices[i]
        return self.steps[lo:hi]

    def duration_sums(self, i: int) -> dict:
        """Signed duration per (term, color) over segment i (telescoping check)."""
        sums: dict = {}
        for s in self.segment_steps(i):
            if s.kind == EXPONENTIAL:
                key = (s.term, s.color)
                sums[key] = sums.get(key, 0.0) + s.duration
        return sums

    def abs_duration_sum(self, i: int) -> float:
        return sum(abs(s.duration) for s in self.segment_steps(i) if s.kind == EXPONENTIAL)

    def to_text(self) -> str:
        lines = [
            f"# k={self.k}",
            "# window=" + ",".join(format(v, ".17g") for v in self.window),
            "# boundaries=" + ",".join(format(v, ".17g") for v in self.segment_boundaries),
            "# slices=" + ",".join(f"{a}:{b}" for a, b in self.segment_slices),
        ]
        lines.extend(s.to_line() for s in self.steps)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExponentialPlan":
        header: dict[str, str] = {}
        steps = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val
            else:
                steps.append(PlanStep.from_line(line))
        window = tuple(float(v) for v in header["window"].split(","))
        boundaries = tuple(float(v) for v in header["boundaries"].split(","))
        slices = tuple(
            tuple(int(x) for x in part.split(":")) for part in header["slices"].split(",")
        )
        return cls(
            steps=tuple(steps),
            segment_boundaries=boundaries,
            segment_slices=slices,
            k=int(header["k"]),
            window=window,
        )


def suzuki_fractions(ell: int) -> float:
    """Recursion fraction s_l = 1 / (4 - 4^(1/(2l-1))) for level l >= 2."""
    if ell < 2:
        raise ValueError("recursion fractions are defined for level >= 2")
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * ell - 1)))


def _emit_order2(steps: list, decomp: DecomposedHamiltonian, t_a: float, t_b: float) -> None:
    mid = 0.5 * (t_a + t_b)
    half = 0.5 * (t_b - t_a)
    term_ids = range(decomp.M)
    for ti in term_ids:
        has_transform = decomp.terms[ti].transform is not None
        if has_transform:
            steps.append(PlanStep(TRANSFORM, ti, -1, mid, 0.0))
        for cls_ in decomp.classes[ti]:
            steps.append(PlanStep(EXPONENTIAL, ti, cls_.color, mid, half))
        if has_transform:
            steps.append(PlanStep(TRANSFORM_INV, ti, -1, mid, 0.0))
    for ti in reversed(term_ids):
        has_transform = decomp.terms[ti].transform is not None
        if has_transform:
            steps.append(PlanStep(TRANSFORM, ti, -1, mid, 0.0))
        for cls_ in reversed(decomp.classes[ti]):
            steps.append(PlanStep(EXPONENTIAL, ti, cls_.color, mid, half))
        if has_transform:
            steps.append(PlanStep(TRANSFORM_INV, ti, -1, mid, 0.0))


def _emit(steps: list, decomp: DecomposedHamiltonian, t_a: float, t_b: float, ell: int) -> None:
    if ell == 1:
        _emit_order2(steps, decomp, t_a, t_b)
        return
    s = suzuki_fractions(ell)
    tau = t_b - t_a
    marks = (
        t_a,
        t_a + s * tau,
        t_a + 2.0 * s * tau,
        t_a + (1.0 - 2.0 * s) * tau,
        t_a + (1.0 - s) * tau,
        t_b,
    )
    for i in range(5):
        _emit(steps, decomp, marks[i], marks[i + 1], ell - 1)


def build_segment_plan(
    segment: Segment,
    decomp: DecomposedHamiltonian,
    window: tuple[float, float] | None = None,
) -> ExponentialPlan:
    """Plan one segment at order 2k.  Empty class lists give an empty plan."""
    steps: list = []
    if decomp.m_actual:
        _emit(steps, decomp, segment.t_start, segment.t_end, segment.k)
    return ExponentialPlan(
        steps=tuple(steps),
        segment_boundaries=(segment.t_start, segment.t_end),
        segment_slices=((0, len(steps)),),
        k=segment.k,
        window=window if window is not None else (segment.t_start, segment.t_end),
    )


def build_subdivided_plan(
    times: "list[float] | np.ndarray",
    k: int,
    decomp: DecomposedHamiltonian,
    window: tuple[float, float] | None = None,
) -> ExponentialPlan:
    """Concatenate per-segment plans over an increasing list of split times."""
    times = list(times)
    if len(times) < 2:
        raise ValueError("need at least two boundary times")
    steps: list = []
    slices = []
    for a, b in zip(times[:-1], times[1:]):
        start = len(steps)
        if decomp.m_actual:
            _emit(steps, decomp, a, b, k)
        slices.append((start, len(steps)))
    return ExponentialPlan(
        steps=tuple(steps),
        segment_boundaries=tuple(times),
        segment_slices=tuple(slices),
        k=k,
        window=window if window is not None else (times[0], times[-1]),
    )


def constant_step_count(k: int, lam: float, span: float, eps: float) -> int:
    """Number of uniform segments keeping the splitting error below eps.

    lam is the uniform smoothness bound of the family actually being split
    (for a decomposed d-sparse input that is 6 d^2 times the per-term bound).
    The caller must have clamped eps into the formula's regime.
    """
    if lam * span == 0.0:
        return 1
    if eps > 0.9 * (5.0 / 3.0) ** k * lam * span * (1 + 1e-12):
        raise ValueError(
            f"eps {eps} outside the subdivision formula regime "
            f"(must be <= {0.9 * (5.0 / 3.0) ** k * lam * span})"
        )
    r = 2.0 * eps ** (-1.0 / (2 * k)) * (2.0 * k * (5.0 / 3.0) ** (k - 1) * lam * span) ** (
        1.0 + 1.0 / (2 * k)
    )
    return max(1, math.ceil(r))


def execute_plan(
    plan: ExponentialPlan,
    state: np.ndarray,
    decomp: DecomposedHamiltonian,
    config: OracleConfig | None = None,
    ledger: QueryLedger | None = None,
) -> np.ndarray:
    """Apply every plan step in order to a statevector or matrix of columns.

    With a config, every evaluation time is rounded onto the mesh inside the
    plan's window and elements pass through the oracle truncation; without
    one, times and elements are exact.
    """
    state = np.array(state, dtype=complex, copy=True)
    if state.ndim == 1 and abs(np.linalg.norm(state) - 1.0) > 1e-8:
        raise ValueError("initial state must be normalized")
    if config is not None:
        q_lo, q_hi = mesh_window(plan.window, config)
        sigma = config.mesh_cell
        t0 = config.t0
    for step in plan.steps:
        if step.kind == EXPONENTIAL:
            t = step.eval_time
            if config is not None:
                q = min(max(round((t - t0) / sigma + 0.5), q_lo), q_hi)
                t = t0 + (q - 0.5) * sigma
            state = apply_one_sparse_exponential(
                state,
                decomp.terms[step.term],
                decomp.one_sparse(step.term, step.color),
                t,
                step.duration,
                config=config,
                ledger=ledger,
            )
        else:
            state = apply_transform(
                state,
                decomp.terms[step.term].transform,
                inverse=step.kind == TRANSFORM_INV,
                ledger=ledger,
            )
    return state


def plan_as_matrix(
    plan: ExponentialPlan,
    decomp: DecomposedHamiltonian,
    config: OracleConfig | None = None,
    ledger: QueryLedger | None = None,
) -> np.ndarray:
    """Execute the plan on the identity, yielding the realized propagator."""
    return execute_plan(plan, np.eye(decomp.dim, dtype=complex), decomp, config, ledger)
