"""Exact statevector and density-matrix evolution for small circuits.

This is the ground truth the rest of the package is checked against.
Statevectors hold up to 24 qubits, density matrices up to 10.  Global
indices are big-endian: qubit 0 is the most significant bit of the flat
amplitude index, matching the local gate-matrix convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gates as _g
from .circuit import (
    BiasPerm,
    Circuit,
    CtrlX,
    CtrlZ,
    LocalGate,
    Named,
    NoiseChannel,
    PrepState,
    XDiag,
)

SV_MAX_QUBITS = 24
DM_MAX_QUBITS = 10


def gate_unitary(gate: LocalGate) -> np.ndarray:
    """Dense 2^k x 2^k matrix of a local gate (Z basis, support order)."""
    kind = gate.kind
    if isinstance(kind, XDiag):
        return _g.matrix_from_xdiag(kind.lam)
    if isinstance(kind, BiasPerm):
        return _g.matrix_from_permutation(kind.perm, kind.phases)
    if isinstance(kind, Named):
        return _g.named_matrix(kind.name, gate.arity)
    if isinstance(kind, CtrlX):
        return _g.controlled_x(_g.matrix_from_xdiag(kind.payload.lam))
    if isinstance(kind, CtrlZ):
        return _g.controlled_z(_g.matrix_from_xdiag(kind.payload.lam))
    raise ValueError(f"unknown gate kind {type(kind).__name__}")


def prep_statevector(prep: PrepState) -> np.ndarray:
    """Product state from per-qubit Bloch angles, noise ignored."""
    m = prep.n
    if m > SV_MAX_QUBITS:
        raise ValueError(f"{m} qubits exceed the statevector cap {SV_MAX_QUBITS}")
    state = np.ones(1, dtype=complex)
    for i in range(m):
        state = np.kron(state, prep.qubit_state(i))
    return state


def apply_unitary_sv(state: np.ndarray, u: np.ndarray, support: Sequence[int], m: int) -> np.ndarray:
    """Apply a local unitary on the given qubits of an m-qubit statevector."""
    k = len(support)
    psi = state.reshape((2,) * m)
    psi = np.moveaxis(psi, support, range(k))
    shape = psi.shape
    psi = u @ psi.reshape(2**k, -1)
    psi = np.moveaxis(psi.reshape(shape), range(k), support)
    return psi.reshape(-1)


def circuit_operator(gatelist: Sequence[LocalGate], m: int) -> np.ndarray:
    """Dense unitary of a gate sequence on m qubits (m small, test use)."""
    if m > 12:
        raise ValueError("circuit_operator supports at most 12 qubits")
    dim = 2**m
    u = np.eye(dim, dtype=complex)
    for gate in gatelist:
        mat = gate_unitary(gate)
        for col in range(dim):
            u[:, col] = apply_unitary_sv(np.ascontiguousarray(u[:, col]), mat, gate.support, m)
    return u


def evolve_pure(c: Circuit, ignore_noise: bool = True) -> np.ndarray:
    """Prep then every gate unitary in order; noise is ignored."""
    if not ignore_noise:
        raise ValueError("evolve_pure cannot simulate noise; use evolve_density")
    m = c.n_qubits
    if m > SV_MAX_QUBITS:
        raise ValueError(f"{m} qubits exceed the statevector cap {SV_MAX_QUBITS}")
    state = prep_statevector(c.prep)
    for inst in c.gatelist:
        state = apply_unitary_sv(state, gate_unitary(inst.gate), inst.gate.support, m)
    return state


# ---------------------------------------------------------------------------
# density matrices


def apply_unitary_dm(rho: np.ndarray, u: np.ndarray, support: Sequence[int], m: int) -> np.ndarray:
    """rho -> U rho U^dagger with a local U, via contraction on the support axes."""
    k = len(support)
    t = rho.reshape((2,) * (2 * m))
    row_axes = list(support)
    col_axes = [m + q for q in support]
    t = np.moveaxis(t, row_axes + col_axes, list(range(k)) + list(range(m, m + k)))
    # after the move: first k axes are the row support, axes m..m+k-1 the col support
    shape = t.shape
    t = t.reshape(2**k, 2 ** (m - k), 2**k, 2 ** (m - k))
    # (U rho U+)[a,j,d,l] = sum_{b,c} U[a,b] rho[b,j,c,l] conj(U[d,c])
    t = np.einsum("ab,bjcl,dc->ajdl", u, t, u.conj(), optimize=True)
    t = t.reshape(shape)
    t = np.moveaxis(t, list(range(k)) + list(range(m, m + k)), row_axes + col_axes)
    return t.reshape(2**m, 2**m)


def apply_xmask_dm(rho: np.ndarray, mask_qubits: Sequence[int], m: int) -> np.ndarray:
    """X_alpha rho X_alpha: flip the masked qubits on rows and columns."""
    if not mask_qubits:
        return rho
    t = rho.reshape((2,) * (2 * m))
    axes = tuple(q for q in mask_qubits) + tuple(m + q for q in mask_qubits)
    return np.flip(t, axis=axes).reshape(2**m, 2**m)


def apply_noise_dm(rho: np.ndarray, channel: NoiseChannel, m: int) -> np.ndarray:
    if channel.is_trivial():
        return rho
    out = np.zeros_like(rho)
    for mask, p in channel.terms:
        if p == 0.0:
            continue
        out += p * apply_xmask_dm(rho, mask.sorted(), m)
    return out


def apply_bitflip_dm(rho: np.ndarray, qubit: int, p: float, m: int) -> np.ndarray:
    if p == 0.0:
        return rho
    return (1 - p) * rho + p * apply_xmask_dm(rho, (qubit,), m)


def evolve_density(c: Circuit, check_state: bool = False) -> np.ndarray:
    """Prep (with per-qubit flips), then unitary + Kraus noise per gate.

    The measurement flip is NOT folded in; callers model it as a bit-flip
    channel on the measured qubit before a perfect Y/Z measurement.
    """
    m = c.n_qubits
    if m > DM_MAX_QUBITS:
        raise ValueError(f"{m} qubits exceed the density-matrix cap {DM_MAX_QUBITS}")
    psi = prep_statevector(c.prep)
    rho = np.outer(psi, psi.conj())
    for q in range(m):
        rho = apply_bitflip_dm(rho, q, c.prep.flip, m)
    for inst in c.gatelist:
        rho = apply_unitary_dm(rho, gate_unitary(inst.gate), inst.gate.support, m)
        rho = apply_noise_dm(rho, inst.noise, m)
        if check_state:
            _check_density(rho)
    return rho


def _check_density(rho: np.ndarray, tol: float = 1e-9) -> None:
    if abs(np.trace(rho) - 1.0) > tol:
        raise AssertionError("density matrix trace drifted")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise AssertionError("density matrix lost Hermiticity")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise AssertionError("density matrix lost positivity")


def reduce_qubit(rho: np.ndarray, qubit: int) -> np.ndarray:
    """Partial trace onto one qubit, by direct index arithmetic."""
    dim = rho.shape[0]
    m = int(round(np.log2(dim)))
    pos = m - 1 - qubit  # bit position of the qubit inside the flat index
    rest = np.arange(dim // 2)
    low = rest & ((1 << pos) - 1)
    high = (rest >> pos) << (pos + 1)
    base = high | low
    out = np.empty((2, 2), dtype=complex)
    for a in (0, 1):
        rows = base | (a << pos)
        for b in (0, 1):
            cols = base | (b << pos)
            out[a, b] = rho[rows, cols].sum()
    return out


def bloch_components(rho2: np.ndarray) -> tuple[float, float, float]:
    x = float(np.real(rho2[0, 1] + rho2[1, 0]))
    y = float(np.real(1j * (rho2[0, 1] - rho2[1, 0])))
    z = float(np.real(rho2[0, 0] - rho2[1, 1]))
    return x, y, z


def density_from_bloch(x: float, y: float, z: float) -> np.ndarray:
    return 0.5 * (np.eye(2, dtype=complex) + x * _g.X + y * _g.Y + z * _g.Z)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    eigs = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.sum(np.abs(eigs)))


def exact_overlap(
    prep: PrepState, b_gates: Sequence[LocalGate], u_gates: Sequence[LocalGate]
) -> complex:
    """<psi|U|psi> with |psi> = B (tensor of prepared qubits), via two pure runs."""
    n = prep.n
    if n > 20:
        raise ValueError("exact_overlap caps the data register at 20 qubits")
    psi = prep_statevector(prep)
    for gate in b_gates:
        psi = apply_unitary_sv(psi, gate_unitary(gate), gate.support, n)
    upsi = psi
    for gate in u_gates:
        upsi = apply_unitary_sv(upsi, gate_unitary(gate), gate.support, n)
    return complex(np.vdot(psi, upsi))


def overlap_to_yz(overlap: complex) -> tuple[float, float]:
    """Bloch (y, z) of the ideal measured qubit: y = -Im, z = Re of <psi|U|psi>."""
    return -float(np.imag(overlap)), float(np.real(overlap))


@dataclass
class ReducedStateSummary:
    """Least-squares fit of a single-qubit state against (I + a*(yY+zZ))/2."""

    bloch: tuple[float, float, float]
    alpha: float
    residual: float


def fit_reduced_form(rho2: np.ndarray, y: float, z: float) -> ReducedStateSummary:
    """Best alpha for rho ~ (I + alpha*(y*Y + z*Z))/2 and the leftover norm.

    The residual is the Frobenius norm of the difference at the optimum; it
    picks up any X component and any distortion of the y/z ratio.
    """
    denom = y * y + z * z
    if denom <= 0.0:
        raise ValueError("form not identifiable: (y, z) must not be (0, 0)")
    xb, yb, zb = bloch_components(rho2)
    alpha = (y * yb + z * zb) / denom
    model = density_from_bloch(0.0, alpha * y, alpha * z)
    residual = float(np.linalg.norm(rho2 - model))
    return ReducedStateSummary((xb, yb, zb), float(alpha), residual)
