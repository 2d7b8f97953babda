"""Bit-level emulation of the two Hamiltonian oracles.

The column oracle answers one bit of one column index per query; the value
oracle answers one bit of a polar-encoded matrix element evaluated on a finite
time mesh.  A ledger tallies every charged bit so executed runs can be
reconciled against the closed-form query bounds.

Encoding: an element rho * exp(i phi) is stored as n''/2 magnitude bits
(binary fraction scaled by h_max) and n''/2 phase bits (binary fraction of
2 pi).  Both registers truncate rather than round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OracleConfig:
    """Precision and mesh parameters for the discretized oracles.

    Attributes:
        time_bits: bits used to index the time mesh (n').
        value_qubits: qubits of element precision (n''), split evenly
            between magnitude and phase.
        h_max: declared upper bound on the largest element magnitude.
        t0: left end of the meshed interval.
        total_span: meshed interval length.
    """

    time_bits: int
    value_qubits: int
    h_max: float
    t0: float
    total_span: float

    def __post_init__(self):
        if self.time_bits < 1:
            raise ValueError("time_bits must be positive")
        if self.value_qubits < 2 or self.value_qubits % 2:
            raise ValueError("value_qubits must be a positive even integer")
        if self.h_max <= 0 or self.total_span <= 0:
            raise ValueError("h_max and total_span must be positive")

    @property
    def mesh_cell(self) -> float:
        """Mesh spacing sigma = span / 2^n'."""
        return self.total_span / 2.0**self.time_bits

    @property
    def mesh_size(self) -> int:
        return 2**self.time_bits


@dataclass
class QueryLedger:
    """Monotone counters for every oracle interaction of one run."""

    column_bit_queries: int = 0
    value_bit_queries: int = 0
    transform_calls: int = 0
    exponentials_applied: int = 0
    min_value_bits_per_exp: int | None = None
    max_value_bits_per_exp: int | None = None

    def charge_column_bits(self, bits: int) -> None:
        if bits < 0:
            raise ValueError("cannot charge negative queries")
        self.column_bit_queries += bits

    def charge_value_bits(self, bits: int) -> None:
        if bits < 0:
            raise ValueError("cannot charge negative queries")
        self.value_bit_queries += bits

    def charge_transform(self) -> None:
        self.transform_calls += 1

    def note_exponential(self, value_bits: int, column_bits: int) -> None:
        self.exponentials_applied += 1
        self.charge_value_bits(value_bits)
        self.charge_column_bits(column_bits)
        if self.min_value_bits_per_exp is None:
            self.min_value_bits_per_exp = self.max_value_bits_per_exp = value_bits
        else:
            self.min_value_bits_per_exp = min(self.min_value_bits_per_exp, value_bits)
            self.max_value_bits_per_exp = max(self.max_value_bits_per_exp, value_bits)

    @property
    def total_oracle_queries(self) -> int:
        return self.column_bit_queries + self.value_bit_queries


def precision_requirements(
    k: int,
    M: int,
    d: int,
    span: float,
    eps: float,
    max_dh: float,
    h_max: float,
) -> tuple[int, int]:
    """Bits of time precision and qubits of element precision for a run.

    Guarantees that the combined error from rounding each evaluation time onto
    the mesh and truncating each element to its registers stays below eps/2
    over an entire product-formula execution.
    """
    if min(k, M, d) < 1 or min(span, max_dh, h_max) <= 0:
        raise ValueError("arguments must be positive")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    common = 32.0 * k * M * d * d * (5.0 / 3.0) ** (k - 1)
    n_time = math.ceil(math.log2(max_dh * common * span * span / eps))
    n_value = 2 * math.ceil(math.log2(common * h_max * span / eps)) + 6
    return max(n_time, 1), max(n_value, 2)


def mesh_time(q: int, config: OracleConfig) -> float:
    """Mesh point t_q = t0 + (q - 1/2) * span / 2^n' for q in [1, 2^n']."""
    if not 1 <= q <= config.mesh_size:
        raise IndexError(f"mesh index {q} outside [1, {config.mesh_size}]")
    return config.t0 + (q - 0.5) * config.mesh_cell


def mesh_window(subinterval: tuple[float, float], config: OracleConfig) -> tuple[int, int]:
    """Smallest and largest mesh index whose point lies inside the subinterval.

    The subinterval must sit inside the meshed range and contain at least one
    full mesh cell (the coarseness condition the precision formulas assume).
    """
    a, b = subinterval
    sigma = config.mesh_cell
    lo, hi = config.t0, config.t0 + config.total_span
    if a < lo - 1e-9 * sigma or b > hi + 1e-9 * sigma:
        raise ValueError(f"subinterval [{a}, {b}] outside mesh range [{lo}, {hi}]")
    if b - a < sigma * (1 - 1e-12):
        raise ValueError(
            f"subinterval length {b - a} below one mesh cell {sigma}; "
            "time precision too coarse for this window"
        )
    q_lo = max(1, math.ceil((a - config.t0) / sigma + 0.5 - 1e-9))
    q_hi = min(config.mesh_size, math.floor((b - config.t0) / sigma + 0.5 + 1e-9))
    if mesh_time(q_lo, config) < a - 1e-9 * sigma:
        q_lo += 1
    if mesh_time(q_hi, config) > b + 1e-9 * sigma:
        q_hi -= 1
    if q_lo > q_hi:
        raise ValueError("no mesh point inside subinterval")
    return q_lo, q_hi


def round_time(tau: float, subinterval: tuple[float, float], config: OracleConfig) -> int:
    """Index of the mesh point nearest tau among those inside the subinterval.

    The subinterval must contain at least one full mesh cell; the returned
    point is then guaranteed closer to tau than one cell width.
    """
    q_lo, q_hi = mesh_window(subinterval, config)
    q = round((tau - config.t0) / config.mesh_cell + 0.5)
    return int(min(max(q, q_lo), q_hi))


def truncate_magnitude(rho, h_max: float, value_qubits: int):
    """Floor rho onto the magnitude register grid (h_max * m / 2^(n''/2))."""
    levels = 2 ** (value_qubits // 2)
    scaled = np.floor(np.asarray(rho, dtype=float) / h_max * levels)
    return np.minimum(scaled, levels - 1) * h_max / levels


def truncate_phase(phi, value_qubits: int):
    """Floor phi (taken mod 2 pi) onto the phase register grid."""
    levels = 2 ** (value_qubits // 2)
    frac = np.mod(np.asarray(phi, dtype=float), TWO_PI) / TWO_PI
    return np.floor(frac * levels) / levels * TWO_PI


def matrix_value_polar(
    term,
    x: int,
    y: int,
    q: int,
    config: OracleConfig,
    ledger: QueryLedger | None = None,
) -> tuple[float, float]:
    """Discretized polar readout of one matrix element at mesh time t_q.

    Returns (rho, phi) truncated to the two registers.  Charges a full n''
    bits when a ledger is supplied -- the oracle is queried even when the
    position falls outside the pattern and the answer is exactly zero.
    """
    t = mesh_time(q, config)
    value = term.element(x, y, t)
    rho, phi = abs(value), math.atan2(value.imag, value.real)
    if rho > config.h_max * (1 + 1e-12):
        raise ValueError(
            f"element magnitude {rho} exceeds declared h_max {config.h_max}"
        )
    if ledger is not None:
        ledger.charge_value_bits(config.value_qubits)
    if rho == 0.0:
        return 0.0, 0.0
    rho_t = float(truncate_magnitude(rho, config.h_max, config.value_qubits))
    phi_t = float(truncate_phase(phi, config.value_qubits))
    return rho_t, phi_t


def column_list(term, x: int, d: int) -> list[int]:
    """Sorted column indices of row x padded to length d with x itself.

    The self-padding convention keeps the oracle total: padded slots read back
    as diagonal positions whose value oracle returns zero.
    """
    cols = sorted(y for (row, y) in term.pattern if row == x)
    return cols + [x] * (d - len(cols))


def column_index_bit(
    term,
    x: int,
    i: int,
    p: int,
    d: int,
    ledger: QueryLedger | None = None,
) -> int:
    """Bit p of the i-th potentially nonzero column index in row x."""
    if not 0 <= i < d:
        raise IndexError(f"column slot {i} outside [0, {d})")
    if not 0 <= p < term.qubits:
        raise IndexError(f"bit position {p} outside [0, {term.qubits})")
    if ledger is not None:
        ledger.charge_column_bits(1)
    col = column_list(term, x, d)[i]
    return (col >> p) & 1
