"""Closed-form query-cost bounds and the report reconciling them with ledgers.

Every formula is evaluated verbatim with the worst-case class count
m = 6 M d^2, while measured counts come from the executed plan's ledger with
the actual (smaller) greedy class count.  Both appear side by side in the
report; they are never mixed inside a formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .oracle import QueryLedger


def z_chain(n: int) -> int:
    """Iterations of z -> ceil(2 log2 z) from n until the value is at most 6."""
    if n < 1:
        raise ValueError("n must be positive")
    count = 0
    z = n
    while z > 6:
        z = math.ceil(2 * math.log2(z))
        count += 1
    return count


def log_star(n: int) -> int:
    """Iterated base-2 logarithm: steps of log2 from n until the value <= 1."""
    count = 0
    x = float(n)
    while x > 1.0:
        x = math.log2(x)
        count += 1
    return count


def space_qubits_estimate(n: int) -> int:
    """Informational n (log* n)^2 space figure; reported, never verified."""
    return n * log_star(n) ** 2


def one_sparse_query_cost(n: int, value_qubits: int) -> int:
    """Oracle queries per one-sparse exponential: C = 4n(z_n + 2) + 3n''."""
    if n < 1:
        raise ValueError("n must be positive")
    if value_qubits % 2 or value_qubits < 0:
        raise ValueError("value_qubits must be even and nonnegative")
    return 4 * n * (z_chain(n) + 2) + 3 * value_qubits


def clamp_epsilon(eps: float, k: int, d: int, lam: float, span: float) -> float:
    """Planner clamp keeping the subdivision-count formula inside its regime."""
    return min(eps, 18.0 * (5.0 / 3.0) ** (k - 1) * d * d * lam * span)


def constant_step_exponential_bound(k: int, M: int, d: int, lam: float, span: float, eps: float) -> int:
    """Worst-case exponential count for a constant-step run, evaluated verbatim."""
    eps_t = clamp_epsilon(eps, k, d, lam, span)
    inner = (
        24.0 * k * d * d * lam * span * (5.0 / 3.0) ** k
        * (6.0 * d * d * lam * span / (eps_t / 2.0)) ** (1.0 / (2 * k))
    )
    return 12 * M * d * d * 5 ** (k - 1) * math.ceil(inner)


def constant_step_oracle_bound(
    k: int, M: int, d: int, lam: float, span: float, eps: float, C: int
) -> int:
    """Query bound for a constant-step run: C times the exponential bound."""
    return C * constant_step_exponential_bound(k, M, d, lam, span, eps)


def adaptive_exponential_bound(
    k: int, M: int, d: int, mean_upsilon_span: float, eps: float, K: float
) -> int:
    """Worst-case exponential count for an adaptive run (guessed-step theorem)."""
    a_term = (24.0 * d * d * k * (5.0 / 3.0) ** (k - 1) * mean_upsilon_span) ** (1.0 + 1.0 / (2 * k))
    r_cap = math.ceil(a_term / (eps / 4.0) ** (1.0 / (2 * k)) + 3.0 * K * K * mean_upsilon_span + 1.0)
    return 12 * M * d * d * 5 ** (k - 1) * r_cap


def adaptive_oracle_bound(
    k: int, M: int, d: int, mean_upsilon_span: float, eps: float, K: float, C: int
) -> int:
    return C * adaptive_exponential_bound(k, M, d, mean_upsilon_span, eps, K)


def piecewise_exponential_bound(
    k: int, M: int, d: int, lam: float, span: float, eps: float, L: int
) -> int:
    """Exponential bound when L interior discontinuities are excised."""
    inner = (
        24.0 * k * d * d * lam * span * (5.0 / 3.0) ** k
        * (6.0 * d * d * lam * span / (eps / 3.0)) ** (1.0 / (2 * k))
    )
    return math.ceil(12 * M * d * d * 5 ** (k - 1) * ((L + 1) + inner))


def piecewise_oracle_bound(
    k: int, M: int, d: int, lam: float, span: float, eps: float, L: int, C: int
) -> int:
    return C * piecewise_exponential_bound(k, M, d, lam, span, eps, L)


def near_linear_k(d: int, mean_upsilon_span: float, eps: float) -> int:
    """Order choice making the query count scale nearly linearly in time."""
    arg = d * d * mean_upsilon_span / eps
    if arg <= 1.0:
        return 1
    return max(1, math.ceil(math.sqrt(0.5 * math.log(arg) / math.log(25.0 / 3.0))))


@dataclass
class CostReport:
    """Planned and measured resource counts for one simulation run."""

    k: int
    M: int
    d: int
    n_qubits: int
    m_paper: int
    m_actual: int
    r: int
    r_g: int
    time_bits: int
    value_qubits: int
    C: int
    N_exp_formula: int
    N_exp_actual: int
    N_oracle_formula: int
    N_oracle_measured: int
    N_T_formula: float
    N_T_measured: int
    k_star: int
    space_qubits: int
    mode: str = "constant"

    @classmethod
    def csv_header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list[str]:
        out = []
        for f in fields(self):
            val = getattr(self, f.name)
            out.append(format(val, ".17g") if isinstance(val, float) else str(val))
        return out

    def check_invariants(self) -> list[str]:
        """Reconciliation failures, empty when every measured count is in bounds."""
        problems = []
        if self.N_exp_actual > self.N_exp_formula:
            problems.append(
                f"measured exponentials {self.N_exp_actual} exceed bound {self.N_exp_formula}"
            )
        if self.N_oracle_measured > self.N_oracle_formula:
            problems.append(
                f"measured queries {self.N_oracle_measured} exceed bound {self.N_oracle_formula}"
            )
        if self.N_oracle_formula != self.C * self.N_exp_formula:
            problems.append("query bound is not C times the exponential bound")
        limit = self.N_exp_actual / (3.0 * self.d * self.d) + 1.0
        if self.N_T_measured > limit:
            problems.append(
                f"measured transforms {self.N_T_measured} exceed N_exp/(3 d^2)+1 = {limit:.2f}"
            )
        return problems


def build_cost_report(
    *,
    k: int,
    M: int,
    d: int,
    n_qubits: int,
    m_actual: int,
    r: int,
    r_g: int,
    time_bits: int,
    value_qubits: int,
    N_exp_formula: int,
    ledger: QueryLedger | None,
    mean_upsilon_span: float,
    eps: float,
    mode: str,
) -> CostReport:
    """Assemble the report for one run from formulas plus an optional ledger."""
    C = one_sparse_query_cost(n_qubits, value_qubits)
    n_oracle_formula = C * N_exp_formula
    n_exp_actual = ledger.exponentials_applied if ledger else 0
    n_oracle_measured = ledger.total_oracle_queries if ledger else 0
    n_t_measured = ledger.transform_calls if ledger else 0
    return CostReport(
        k=k,
        M=M,
        d=d,
        n_qubits=n_qubits,
        m_paper=6 * M * d * d,
        m_actual=m_actual,
        r=r,
        r_g=r_g,
        time_bits=time_bits,
        value_qubits=value_qubits,
        C=C,
        N_exp_formula=N_exp_formula,
        N_exp_actual=n_exp_actual,
        N_oracle_formula=n_oracle_formula,
        N_oracle_measured=n_oracle_measured,
        N_T_formula=N_exp_formula / (3.0 * d * d),
        N_T_measured=n_t_measured,
        k_star=near_linear_k(d, mean_upsilon_span, eps),
        space_qubits=space_qubits_estimate(n_qubits),
        mode=mode,
    )
