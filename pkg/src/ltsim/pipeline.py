"""End-to-end assembly: catalog entry + run settings -> plans, runs, reports.

Error budgeting per mode:

* constant:  splitting error eps/2 (after clamping eps into the subdivision
  formula's regime), discretization eps/2 from the precision formulas.
* adaptive:  per-step certified widths keep the splitting error below eps/2;
  discretization eps/2 as above.
* piecewise: excised neighborhoods eps/6, per-piece splitting budgets summing
  below eps/3, discretization eps/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adaptive import (
    AdaptiveSchedule,
    DiscontinuitySplit,
    build_schedule,
    split_discontinuities,
)
from .catalog import CatalogEntry
from .costs import (
    CostReport,
    adaptive_exponential_bound,
    build_cost_report,
    clamp_epsilon,
    constant_step_exponential_bound,
    piecewise_exponential_bound,
)
from .decomposition import DecomposedHamiltonian
from .integrator import ExponentialPlan, build_subdivided_plan, constant_step_count
from .oracle import OracleConfig, QueryLedger, precision_requirements
from .reference import exact_propagator, operator_error

MODES = ("constant", "adaptive", "piecewise")
EXECUTION_DIM_LIMIT = 64


@dataclass(frozen=True)
class RunSettings:
    """Knobs for one simulation run."""

    mode: str = "constant"
    k: int = 1
    epsilon: float = 1e-3
    t0: float = 0.0
    dt: float = 1.0
    time_bits_override: int | None = None
    value_qubits_override: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.dt <= 0 or self.k < 1:
            raise ValueError("dt must be positive and k >= 1")

    @property
    def interval(self) -> tuple[float, float]:
        return (self.t0, self.t0 + self.dt)


@dataclass
class PlanBundle:
    """Everything needed to execute and account one planned run."""

    entry: CatalogEntry
    settings: RunSettings
    decomp: DecomposedHamiltonian
    config: OracleConfig
    plans: list
    schedule: AdaptiveSchedule | None
    split: DiscontinuitySplit | None
    r: int
    r_g: int
    N_exp_formula: int
    lambda_used: float
    mean_upsilon_span: float

    @property
    def planned_exponentials(self) -> int:
        return sum(p.exponential_count for p in self.plans)

    def cost_report(self, ledger: QueryLedger | None) -> CostReport:
        return build_cost_report(
            k=self.settings.k,
            M=self.decomp.M,
            d=self.decomp.d,
            n_qubits=self.decomp.n_qubits,
            m_actual=self.decomp.m_actual,
            r=self.r,
            r_g=self.r_g,
            time_bits=self.config.time_bits,
            value_qubits=self.config.value_qubits,
            N_exp_formula=self.N_exp_formula,
            ledger=ledger,
            mean_upsilon_span=self.mean_upsilon_span,
            eps=self.settings.epsilon,
            mode=self.settings.mode,
        )


def make_oracle_config(
    entry: CatalogEntry, settings: RunSettings, decomp: DecomposedHamiltonian
) -> OracleConfig:
    n_time, n_value = precision_requirements(
        settings.k,
        decomp.M,
        decomp.d,
        settings.dt,
        settings.epsilon,
        entry.max_dh,
        entry.h_max,
    )
    if settings.time_bits_override is not None:
        n_time = settings.time_bits_override
    if settings.value_qubits_override is not None:
        n_value = settings.value_qubits_override
    return OracleConfig(
        time_bits=n_time,
        value_qubits=n_value,
        h_max=entry.h_max,
        t0=settings.t0,
        total_span=settings.dt,
    )


def plan_run(entry: CatalogEntry, settings: RunSettings) -> PlanBundle:
    """Build the full exponential plan for a run in the requested mode."""
    decomp = DecomposedHamiltonian.build(entry.terms)
    k, eps, interval = settings.k, settings.epsilon, settings.interval
    d, M = decomp.d, decomp.M
    config = make_oracle_config(entry, settings, decomp)
    schedule = None
    split = None

    if settings.mode == "constant":
        profile = entry.profile(k, interval)
        lam = profile.lambda_bound
        eps_t = clamp_epsilon(eps, k, d, lam, settings.dt)
        r = constant_step_count(k, 6.0 * d * d * lam, settings.dt, eps_t / 2.0)
        times = np.linspace(interval[0], interval[1], r + 1)
        plans = [build_subdivided_plan(times, k, decomp, window=interval)]
        n_exp_formula = constant_step_exponential_bound(k, M, d, lam, settings.dt, eps)
        r_g = r
        mean_up_span = profile.average_upsilon() * settings.dt

    elif settings.mode == "adaptive":
        if entry.discontinuities:
            raise ValueError("adaptive mode requires a smooth entry; use piecewise")
        profile = entry.profile(k, interval)
        schedule = build_schedule(profile, interval, k, d, eps)
        plans = [build_subdivided_plan(schedule.times, k, decomp, window=interval)]
        mean_up_span = profile.average_upsilon() * settings.dt
        n_exp_formula = adaptive_exponential_bound(
            k, M, d, mean_up_span, eps, profile.growth_constant
        )
        r, r_g = schedule.r, schedule.r_g
        lam = profile.lambda_bound

    else:  # piecewise
        jumps = [t for t in entry.discontinuities if interval[0] < t < interval[1]]
        profile = entry.profile(k, interval)
        lam = profile.lambda_bound
        regime = min(1.0, 27.0 * (5.0 / 3.0) ** (k - 1) * d * d * lam * settings.dt)
        if eps > regime:
            raise ValueError(f"epsilon {eps} above the excision regime bound {regime}")
        norm_max = float(entry.deriv_total(0, np.linspace(*interval, 2001)).max()) * 1.005
        split = split_discontinuities(interval, jumps, norm_max, eps, config)
        plans = []
        r = 0
        for (lo, hi), budget in zip(split.subintervals, split.budgets):
            r_piece = constant_step_count(k, 6.0 * d * d * lam, hi - lo, budget)
            times = np.linspace(lo, hi, r_piece + 1)
            plans.append(build_subdivided_plan(times, k, decomp, window=(lo, hi)))
            r += r_piece
        n_exp_formula = piecewise_exponential_bound(
            k, M, d, lam, settings.dt, eps, len(jumps)
        )
        r_g = r
        mean_up_span = profile.average_upsilon() * settings.dt

    return PlanBundle(
        entry=entry,
        settings=settings,
        decomp=decomp,
        config=config,
        plans=plans,
        schedule=schedule,
        split=split,
        r=r,
        r_g=r_g,
        N_exp_formula=n_exp_formula,
        lambda_used=lam,
        mean_upsilon_span=mean_up_span,
    )


def simulate_unitary(
    bundle: PlanBundle, discretize: bool = True
) -> tuple[np.ndarray, QueryLedger]:
    """Execute the planned run on the identity, returning (U, ledger).

    discretize=False runs with exact times and elements (the ledger then only
    counts exponentials and transforms, since no oracle bits are read).
    """
    from .integrator import execute_plan

    if bundle.decomp.dim > EXECUTION_DIM_LIMIT:
        raise ValueError(
            f"dimension {bundle.decomp.dim} above execution limit {EXECUTION_DIM_LIMIT}; "
            "use plan-only mode"
        )
    ledger = QueryLedger()
    state = np.eye(bundle.decomp.dim, dtype=complex)
    config = bundle.config if discretize else None
    for plan in bundle.plans:
        state = execute_plan(plan, state, bundle.decomp, config=config, ledger=ledger)
    return state, ledger


def reference_unitary(entry: CatalogEntry, settings: RunSettings, tol: float = 1e-11) -> np.ndarray:
    return exact_propagator(
        entry.full_hamiltonian,
        settings.t0,
        settings.t0 + settings.dt,
        tol=tol,
        discontinuities=entry.discontinuities,
    )


@dataclass
class SimulationResult:
    bundle: PlanBundle
    unitary: np.ndarray
    ledger: QueryLedger
    error: float
    report: CostReport


def run_and_measure(
    entry: CatalogEntry,
    settings: RunSettings,
    discretize: bool = True,
    reference_tol: float = 1e-11,
) -> SimulationResult:
    """Plan, execute and compare against the exact propagator."""
    bundle = plan_run(entry, settings)
    u_sim, ledger = simulate_unitary(bundle, discretize=discretize)
    u_ref = reference_unitary(entry, settings, tol=reference_tol)
    err = operator_error(u_ref, u_sim)
    return SimulationResult(
        bundle=bundle,
        unitary=u_sim,
        ledger=ledger,
        error=err,
        report=bundle.cost_report(ledger),
    )
