"""Statevector application of one-sparse operator exponentials.

exp(-i H dt) for a one-sparse Hermitian H acts independently on 1D and 2D
invariant subspaces.  The 2D action is the five-rotation sequence
Rz(-pi/2) Rz(-phi) Ry(2 rho dt) Rz(phi) Rz(pi/2) on the (a_m, a_M) block; the
1D action is the corresponding diagonal phase.  The hot path applies the
closed form of those products; the literal rotation sequences live here too
and are pinned to the closed forms by the algebra tests.

Query accounting per applied exponential follows the one-qubit-at-a-time
oracle model: 3 n'' value bits (three controlled rotations read n''/2 bits
each, then uncompute them) plus 4 n (z_n + 2) column bits for running and
inverting the subspace identification.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from .costs import z_chain
from .decomposition import OneSparseTerm
from .model import HamiltonianTerm
from .oracle import OracleConfig, QueryLedger, truncate_magnitude, truncate_phase

NORM_TOL = 1e-10


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[cmath.exp(-0.5j * theta), 0.0], [0.0, cmath.exp(0.5j * theta)]], dtype=complex
    )


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rotation_angles(rho: float, phi: float, dt: float) -> tuple[float, float]:
    """Controlled-rotation angles for one element: alpha = 2 rho dt, phase phi."""
    if rho < 0:
        raise ValueError("element magnitude must be nonnegative")
    return 2.0 * rho * dt, phi


def two_level_rotation_product(rho: float, phi: float, dt: float) -> np.ndarray:
    """Literal five-rotation sequence for the 2D subspace action."""
    alpha, phi = rotation_angles(rho, phi, dt)
    return rz(-math.pi / 2) @ rz(-phi) @ ry(alpha) @ rz(phi) @ rz(math.pi / 2)


def two_level_unitary(rho: float, phi: float, dt: float) -> np.ndarray:
    """Closed form of the 2D action: exp(-i dt [[0, rho e^{i phi}], [c.c., 0]])."""
    c, s = math.cos(rho * dt), math.sin(rho * dt)
    e = cmath.exp(1j * phi)
    return np.array([[c, -1j * e * s], [-1j * np.conj(e) * s, c]], dtype=complex)


def one_dim_rotation_product(element: float, phi: float, dt: float) -> np.ndarray:
    """Literal rotation sequence for the 1D (diagonal) subspace action.

    The sequence Rz(-phi) Rx(-pi/2) Ry(2 h dt) Rx(pi/2) Rz(phi) collapses to
    Rz(-2 h dt); the encoded row sits on the |1> branch, so its amplitude
    picks up exactly exp(-i h dt).  h carries the sign of the diagonal
    element (phase bit folded into the rotation direction), which makes the
    sequence agree with the exact 1D action instead of only up to sign.
    """
    return rz(-phi) @ rx(-math.pi / 2) @ ry(2.0 * element * dt) @ rx(math.pi / 2) @ rz(phi)


def one_dim_phase(element: float, dt: float) -> complex:
    """Closed form of the 1D action on the encoded branch."""
    return cmath.exp(-1j * element * dt)


@lru_cache(maxsize=None)
def class_layout(one_sparse: OneSparseTerm):
    """(pairs, diagonals) of one color class, as plain tuples."""
    pairs = tuple(sorted({(a, b) for (a, b) in one_sparse.entries if a < b}))
    diags = tuple(sorted(a for (a, b) in one_sparse.entries if a == b))
    return pairs, diags


def norm(state: np.ndarray) -> float:
    return float(np.linalg.norm(state.reshape(-1)))


@lru_cache(maxsize=16)
def _eye(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def _trunc_mag(rho: float, h_max: float, levels: int) -> float:
    m = int(rho / h_max * levels)
    if m >= levels:
        m = levels - 1
    return m * h_max / levels


def _trunc_phase(phi: float, levels: int) -> float:
    idx = int((phi % (2.0 * math.pi)) / (2.0 * math.pi) * levels)
    if idx >= levels:
        idx = levels - 1
    return idx / levels * 2.0 * math.pi


def step_unitary(
    mat: np.ndarray,
    one_sparse: OneSparseTerm,
    dt: float,
    config: OracleConfig | None = None,
) -> np.ndarray:
    """Dense dim x dim unitary exp(-i H_class dt) assembled block by block.

    With a config, element magnitudes and phases pass through the oracle
    truncation grids before entering the rotation angles.
    """
    pairs, diags = class_layout(one_sparse)
    u = _eye(mat.shape[0]).copy()
    levels = 2 ** (config.value_qubits // 2) if config is not None else 0
    for x in diags:
        h = mat[x, x].real
        if config is not None:
            rho = _trunc_mag(abs(h), config.h_max, levels)
            h = rho * math.cos(_trunc_phase(math.pi if h < 0 else 0.0, levels))
        u[x, x] = cmath.exp(-1j * h * dt)
    for (m, big) in pairs:
        v = mat[m, big]
        rho = abs(v)
        phi = math.atan2(v.imag, v.real)
        if config is not None:
            rho = _trunc_mag(rho, config.h_max, levels)
            phi = _trunc_phase(phi, levels)
        c = math.cos(rho * dt)
        s = math.sin(rho * dt)
        phase = cmath.exp(1j * phi)
        u[m, m] = c
        u[m, big] = -1j * phase * s
        u[big, m] = -1j * phase.conjugate() * s
        u[big, big] = c
    return u


def apply_one_sparse_exponential(
    state: np.ndarray,
    term: HamiltonianTerm,
    one_sparse: OneSparseTerm,
    t: float,
    dt: float,
    config: OracleConfig | None = None,
    ledger: QueryLedger | None = None,
) -> np.ndarray:
    """Apply exp(-i H_class(t) dt) to a statevector (or matrix of columns).

    With a config, elements pass through the oracle truncation, and the
    ledger is charged the per-exponential query model (one superposed query
    round per bit position serves every row at once, so charges do not scale
    with the dimension).  t must already be a mesh time in that case;
    rounding is the caller's job.
    """
    if not math.isfinite(dt):
        raise ValueError("duration must be finite")
    if ledger is not None:
        n = term.qubits
        value_bits = 3 * config.value_qubits if config is not None else 0
        ledger.note_exponential(value_bits, 4 * n * (z_chain(n) + 2))
    mat = term.evaluate(t)
    return step_unitary(mat, one_sparse, dt, config) @ state


def apply_transform(
    state: np.ndarray,
    transform: np.ndarray,
    inverse: bool = False,
    ledger: QueryLedger | None = None,
) -> np.ndarray:
    """Apply a basis transform (or its inverse) as a dense unitary."""
    mat = transform.conj().T if inverse else transform
    if ledger is not None:
        ledger.charge_transform()
    return mat @ state
