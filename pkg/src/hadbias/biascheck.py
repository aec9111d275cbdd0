"""Certification of gate families from dense matrices.

Three independent certifiers, matching the three roles a gate can play:

* :func:`is_x_type` - membership in the X-diagonal unitaries (valid U-gates);
* :func:`certify_bias_preserving` - membership in the bias-preserving gates,
  i.e. permutations-with-phases of the product X basis (valid B-gates);
* :func:`check_controlled` - whether a payload may sit under a given control
  axis without leaking X errors toward the control.

Note that these classes are nested but distinct: every X-diagonal gate is
bias-preserving, and so are some gates that are not X-diagonal (cnot,
toffoli_prime, and also Pauli Z, which swaps |+> and |->).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates as _g
from .circuit import LocalGate, index_signs

DEFAULT_TOL = 1e-8


def _as_matrix(gate: "LocalGate | np.ndarray") -> np.ndarray:
    if isinstance(gate, LocalGate):
        from .dense import gate_unitary

        return gate_unitary(gate)
    return np.asarray(gate, dtype=complex)


def _require_unitary(m: np.ndarray, tol: float = 1e-10) -> None:
    if not _g.is_unitary(m, tol):
        raise ValueError("input matrix is not unitary")


def is_x_type(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff m is diagonal in the product X basis (a linear combination of X Paulis)."""
    m = np.asarray(m, dtype=complex)
    _require_unitary(m)
    d = _g.xbasis_matrix(m)
    off = d - np.diag(np.diag(d))
    return bool(np.max(np.abs(off)) <= tol)


@dataclass
class Counterexample:
    """An X mask whose conjugate leaves the X-type class, with the witness entry."""

    mask_positions: tuple[int, ...]
    entry: tuple[int, int]
    value: complex

    def describe(self, k: int) -> str:
        qubits = ",".join(str(q) for q in self.mask_positions)
        r, c = self.entry
        return (
            f"conjugating X[{qubits}] gives off-diagonal X-basis entry "
            f"<{index_signs(r, k)}|.|{index_signs(c, k)}> = {self.value:.3g}"
        )


@dataclass
class BiasCertificate:
    """Permutation and phases when the gate preserves the bias, else a counterexample."""

    arity: int
    perm: np.ndarray | None = None
    phases: np.ndarray | None = None
    global_phase: float = 0.0
    counterexample: Counterexample | None = None

    @property
    def ok(self) -> bool:
        return self.perm is not None

    def reconstruct(self) -> np.ndarray:
        if not self.ok:
            raise ValueError("no certificate to reconstruct from")
        return _g.matrix_from_permutation(self.perm, self.phases, self.global_phase)


def _find_counterexample(m: np.ndarray, k: int, tol: float) -> Counterexample:
    """Definition-based search: some X mask conjugates outside the X-type class."""
    for bits in range(1, 2**k):
        positions = tuple(j for j in range(k) if (bits >> (k - 1 - j)) & 1)
        ops = [(_g.X if j in positions else _g.I2) for j in range(k)]
        xa = _g.kron(*ops)
        d = _g.xbasis_matrix(m @ xa @ m.conj().T)
        off = np.abs(d - np.diag(np.diag(d)))
        r, c = np.unravel_index(np.argmax(off), off.shape)
        if off[r, c] > tol:
            return Counterexample(positions, (int(r), int(c)), complex(d[r, c]))
    raise AssertionError("gate is bias-preserving; no counterexample exists")


def certify_bias_preserving(m: np.ndarray, tol: float = DEFAULT_TOL) -> BiasCertificate:
    """Extract (perm, phases) in the X basis, or a counterexample mask.

    Certificates are normalized so the phase of the first sign string is 0;
    the stripped global phase is kept separately so reconstruction is exact.
    """
    m = np.asarray(m, dtype=complex)
    _require_unitary(m)
    k = int(round(np.log2(m.shape[0])))
    tab = _g.permutation_xbasis_table(m, tol)
    if tab is None:
        return BiasCertificate(arity=k, counterexample=_find_counterexample(m, k, tol))
    perm, phases = tab
    global_phase = float(phases[0])
    phases = np.mod(phases - global_phase + np.pi, 2 * np.pi) - np.pi
    phases[0] = 0.0
    return BiasCertificate(arity=k, perm=perm, phases=phases, global_phase=global_phase)


@dataclass
class ControlledCheck:
    ok: bool
    reason: str


def check_controlled(axis: tuple[float, float, float], u: np.ndarray) -> ControlledCheck:
    """May c_P U sit with its control on the measured register?

    P = axis . (X, Y, Z).  Passes iff the axis is +-X and U is X-type, or
    the axis lies in the Y-Z plane and U is X-type and Hermitian, or U is
    the identity (trivial control).  Any other axis fails for U != I.
    """
    u = np.asarray(u, dtype=complex)
    _require_unitary(u)
    ax = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(ax) - 1.0) > 1e-9:
        raise ValueError("control axis must be a unit vector")
    dim = u.shape[0]
    if np.max(np.abs(u - np.eye(dim))) <= 1e-10:
        return ControlledCheck(True, "trivial payload (identity)")
    x, y, z = ax
    x_type = is_x_type(u)
    if abs(abs(x) - 1.0) <= 1e-9:
        if x_type:
            return ControlledCheck(True, "X-axis control with X-type payload")
        return ControlledCheck(False, "payload is not X-type")
    if abs(x) <= 1e-9:
        if not x_type:
            return ControlledCheck(False, "payload is not X-type")
        if np.max(np.abs(u - u.conj().T)) > 1e-10:
            return ControlledCheck(False, "Y-Z plane control needs a Hermitian payload")
        return ControlledCheck(True, "Y-Z plane control with Hermitian X-type payload")
    return ControlledCheck(False, "control axis must be X or lie in the Y-Z plane")


@dataclass
class PropagationResult:
    """Image of an X mask under conjugation by a gate, expressed in the X basis."""

    mask_positions: tuple[int, ...]
    x_type: bool
    table: np.ndarray | None
    pauli_mask: tuple[int, ...] | None
    witness: tuple[int, int, complex] | None = None

    @property
    def is_pauli(self) -> bool:
        return self.pauli_mask is not None


def propagate_error(
    gate: "LocalGate | np.ndarray",
    mask_positions: tuple[int, ...] | list[int],
    tol: float = 1e-9,
) -> PropagationResult:
    """Compute g X_mask g^dagger; report its X-basis table when it stays X-type.

    Mask entries are positions inside the gate support (0 = first support
    qubit).  ``pauli_mask`` is set when the image equals a plain X mask up
    to global phase.
    """
    m = _as_matrix(gate)
    k = int(round(np.log2(m.shape[0])))
    positions = tuple(sorted(int(p) for p in mask_positions))
    if any(not 0 <= p < k for p in positions):
        raise ValueError("mask position outside the gate support")
    ops = [(_g.X if j in positions else _g.I2) for j in range(k)]
    xa = _g.kron(*ops)
    d = _g.xbasis_matrix(m @ xa @ m.conj().T)
    off = np.abs(d - np.diag(np.diag(d)))
    r, c = np.unravel_index(np.argmax(off), off.shape)
    if off[r, c] > tol:
        return PropagationResult(
            positions, False, None, None, witness=(int(r), int(c), complex(d[r, c]))
        )
    table = np.diag(d).copy()
    bits = _g.match_pauli_pattern(table, tol)
    pauli = None
    if bits is not None:
        pauli = tuple(j for j in range(k) if (bits >> (k - 1 - j)) & 1)
    return PropagationResult(positions, True, table, pauli)
