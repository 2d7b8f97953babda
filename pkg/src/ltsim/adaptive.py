"""Adaptive time-step selection from a pointwise smoothness bound.

Step widths follow the recurrence t_{p+1} = t_p + 1/(ups(t_p) (Y + K^2)): the
growth condition |d/dt ups| <= K^2 ups^2 turns the value at the left endpoint
into a certified bound ups(t_p)/(1 - K^2 ups(t_p) dt) on the whole step, and
with Y chosen from the guessed step count r_g every certified product stays
within the per-step error condition.  An iterative variant replaces the
a-priori r_g by the fixed point of "choose widths for r, count the steps".

Discontinuity handling excises delta-neighborhoods around each jump, budgets
the remaining smooth pieces proportionally to their lengths and certifies the
omitted evolution as near-identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import SmoothnessProfile
from .oracle import OracleConfig

STEP_CAP = 20_000_000


class ScheduleInvariantError(RuntimeError):
    """The constructed schedule contradicts its own a-priori guarantees."""


class ScheduleBlowupError(RuntimeError):
    """Step construction will not terminate within any reasonable budget."""


@dataclass
class AdaptiveSchedule:
    """Chosen times plus the per-step certificates backing them."""

    times: np.ndarray
    r_g: int
    Y: float
    certificates: list = field(repr=False, default_factory=list)
    k: int = 1
    eps: float = 0.0
    warning: str | None = None
    rounds: int = 0

    @property
    def r(self) -> int:
        return len(self.times) - 1

    def widths(self) -> np.ndarray:
        return np.diff(self.times)

    def certificates_ok(self, slack: float = 1e-9) -> bool:
        limit = (1.0 + slack) / self.Y
        return all(product <= limit for (_, _, product) in self.certificates)

    def to_text(self) -> str:
        lines = [
            f"# r={self.r}",
            f"# r_g={self.r_g}",
            "# Y=" + format(self.Y, ".17g"),
            "t_p,dt_p,certified_product",
        ]
        for (t, dt, product) in self.certificates:
            lines.append(
                ",".join(format(v, ".17g") for v in (t, dt, product))
            )
        return "\n".join(lines) + "\n"


def guess_r(
    k: int, d: int, mean_upsilon_span: float, eps: float, K: float
) -> tuple[float, int, float]:
    """A-priori step count for an adaptive run.

    Returns (A, r_g, Y): the smooth-part step estimate, the guessed total
    including the growth correction, and the inverse width target derived
    from budgeting each step's error as eps/r_g.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if mean_upsilon_span <= 0 or k < 1 or d < 1 or K < 0:
        raise ValueError("arguments out of domain")
    coeff = 24.0 * d * d * k * (5.0 / 3.0) ** (k - 1)
    A = (coeff * mean_upsilon_span) ** (1.0 + 1.0 / (2 * k)) / eps ** (1.0 / (2 * k))
    r_g = math.ceil(A + 3.0 * K * K * mean_upsilon_span + 1.0)
    Y = coeff / (eps / r_g) ** (1.0 / (2 * k + 1))
    return A, r_g, Y


def _walk(
    upsilon: Callable[[float], float],
    interval: tuple[float, float],
    rate: float,
    K: float,
    cap: int,
) -> tuple[list[float], list[tuple]]:
    """March the recurrence dt = 1/(ups (rate + K^2)) across the interval.

    rate = 1/W is the inverse of the certified width target; the certified
    product max-ups * dt then equals exactly W for untruncated steps.
    """
    a, b = interval
    k2 = K * K
    times = [a]
    certs = []
    t = a
    tiny = (b - a) * 1e-12
    while t < b - tiny:
        ups = float(upsilon(t))
        if not ups > 0 or not math.isfinite(ups):
            raise ScheduleBlowupError(f"smoothness bound {ups} at t={t} stalls the recurrence")
        dt = 1.0 / (ups * (rate + k2))
        t_next = min(t + dt, b)
        dt_act = t_next - t
        denom = 1.0 - k2 * ups * dt_act
        cert = ups / denom
        certs.append((t, dt_act, cert * dt_act))
        times.append(t_next)
        t = t_next
        if len(certs) > cap:
            raise ScheduleBlowupError(f"step count exceeded cap {cap}")
    times[-1] = b
    return times, certs


def build_schedule(
    profile: SmoothnessProfile,
    interval: tuple[float, float],
    k: int,
    d: int,
    eps: float,
) -> AdaptiveSchedule:
    """Schedule from the a-priori guess; aborts if the guess is exceeded.

    Exceeding r_g means the declared (upsilon, K) pair cannot be valid, since
    the guess provably covers every conforming declaration.
    """
    a, b = interval
    mean_up_span = profile.average_upsilon() * (b - a)
    K = profile.growth_constant
    _, r_g, Y = guess_r(k, d, mean_up_span, eps, K)
    times, certs = _walk(profile.upsilon, interval, Y, K, cap=max(2 * r_g + 10, 1000))
    if len(times) - 1 > r_g:
        raise ScheduleInvariantError(
            f"recurrence produced {len(times) - 1} steps, above the guaranteed {r_g}; "
            "the declared smoothness bound or growth constant is inconsistent"
        )
    sched = AdaptiveSchedule(
        times=np.array(times), r_g=r_g, Y=Y, certificates=certs, k=k, eps=eps
    )
    if not sched.certificates_ok():
        raise ScheduleInvariantError("a step certificate exceeds the width target")
    return sched


def refine_r_iteratively(
    profile: SmoothnessProfile,
    interval: tuple[float, float],
    k: int,
    d: int,
    eps: float,
    max_rounds: int = 50,
) -> AdaptiveSchedule:
    """Fixed point of choosing widths for r steps and counting the result.

    Starts from the a-priori guess and feeds the realized count back into the
    width target; the count shrinks monotonically to its fixed point, which
    typically undercuts the guess substantially.  Returns the last iterate
    with a warning if 50 rounds do not settle.
    """
    a, b = interval
    mean_up_span = profile.average_upsilon() * (b - a)
    K = profile.growth_constant
    coeff = 24.0 * d * d * k * (5.0 / 3.0) ** (k - 1)
    _, r_g, _ = guess_r(k, d, mean_up_span, eps, K)

    r_current = r_g
    times, certs, rate = None, None, None
    warning = None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        rate = coeff / (eps / r_current) ** (1.0 / (2 * k + 1))
        times, certs = _walk(profile.upsilon, interval, rate, K, cap=STEP_CAP)
        count = len(times) - 1
        if count == r_current:
            break
        r_current = max(count, 1)
    else:
        warning = f"no fixed point after {max_rounds} rounds (last count {r_current})"
    return AdaptiveSchedule(
        times=np.array(times),
        r_g=r_g,
        Y=rate,
        certificates=certs,
        k=k,
        eps=eps,
        warning=warning,
        rounds=rounds,
    )


@dataclass(frozen=True)
class DiscontinuitySplit:
    """Excision layout around interior jump times."""

    subintervals: tuple
    delta: float
    budgets: tuple
    omitted_bound: float


def split_discontinuities(
    interval: tuple[float, float],
    jump_times: Sequence[float],
    h_max: float,
    eps: float,
    config: OracleConfig,
) -> DiscontinuitySplit:
    """Excise delta-neighborhoods around each jump and budget the remainder.

    Requires the time mesh finer than the smallest gap between consecutive
    jumps (endpoints included); the returned pieces each keep at least one
    mesh cell.  The omitted evolution over all excised windows is certified
    below eps/6 through the norm bound on H.
    """
    a, b = interval
    jumps = sorted(float(t) for t in jump_times)
    if any(not a < t < b for t in jumps):
        raise ValueError("jump times must lie strictly inside the interval")
    L = len(jumps)
    edges = [a, *jumps, b]
    gaps = [hi - lo for lo, hi in zip(edges[:-1], edges[1:])]
    sigma = config.mesh_cell
    if sigma >= min(gaps):
        raise ValueError(
            f"mesh cell {sigma} is not finer than the smallest jump gap {min(gaps)}; "
            "increase time_bits"
        )
    delta = min(
        0.5 * (min(gaps) - sigma),
        math.log1p((eps / 6.0) / (L + 2)) / (2.0 * h_max),
    )
    if delta <= 0:
        raise ValueError("no admissible excision width")
    subintervals = tuple((lo + delta, hi - delta) for lo, hi in zip(edges[:-1], edges[1:]))
    for lo, hi in subintervals:
        if hi - lo < sigma * (1 - 1e-12):
            raise ValueError("an excised piece is shorter than one mesh cell")
    span = b - a
    budgets = tuple(eps * (hi - lo) / (3.0 * span) for lo, hi in subintervals)
    omitted = L * math.expm1(2.0 * h_max * delta) + 2.0 * math.expm1(h_max * delta)
    if omitted > eps / 6.0 * (1 + 1e-9):
        raise AssertionError("excision certification failed; delta selection is wrong")
    return DiscontinuitySplit(
        subintervals=subintervals, delta=delta, budgets=budgets, omitted_bound=omitted
    )


@dataclass
class SplitOrderResult:
    """Outcome of optimizing the order-switch time for a singular input."""

    t_split: float
    cost: int
    curve: list
    single_low: int
    single_high: float
    warning: str | None = None


def _golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def optimize_adaptive_k(
    entry,
    interval: tuple[float, float],
    eps: float,
    k_low: int = 1,
    k_high: int = 2,
    t_tol: float = 1e-3,
    grid_points: int = 12,
) -> SplitOrderResult:
    """Pick the time where the formula order switches from k_low to k_high.

    The interval [a, t'] runs at the low order (admissible through the
    singular region), [t', b] at the high order; both use iteratively refined
    adaptive schedules and t' minimizes the total exponential count by
    golden-section search.  The degenerate split t' = b reproduces the
    single-interval low-order cost and is always among the candidates.
    """
    from .decomposition import DecomposedHamiltonian

    a, b = interval
    decomp = DecomposedHamiltonian.build(entry.terms)
    m = decomp.m_actual
    d = decomp.d

    def schedule_cost(k: int, lo: float, hi: float) -> int:
        profile = entry.profile(k, (lo, hi))
        sched = refine_r_iteratively(profile, (lo, hi), k, d, eps)
        return 2 * m * 5 ** (k - 1) * sched.r

    def objective(t_split: float) -> int:
        left = schedule_cost(k_low, a, t_split)
        if b - t_split < 1e-9 * (b - a):
            return left
        return left + schedule_cost(k_high, t_split, b)

    single_low = objective(b)
    try:
        single_high = float(schedule_cost(k_high, a, b))
    except (ScheduleBlowupError, ValueError, OverflowError):
        single_high = math.inf

    lo = a + 0.02 * (b - a)
    grid = np.linspace(lo, b, grid_points)
    curve = [(float(t), int(objective(float(t)))) for t in grid]
    t_best, f_best = _golden_section(objective, lo, b, t_tol)
    f_best = int(f_best)
    warning = None
    grid_t, grid_f = min(curve, key=lambda p: p[1])
    if grid_f < f_best:
        warning = "cost curve not unimodal; returning best sampled split"
        t_best, f_best = grid_t, grid_f
    if single_low < f_best:
        t_best, f_best = b, single_low
    return SplitOrderResult(
        t_split=float(t_best),
        cost=int(f_best),
        curve=curve,
        single_low=int(single_low),
        single_high=single_high,
        warning=warning,
    )
