"""Dense gate matrices and X-basis table extraction.

Conventions used across the package:

* Local matrices use the usual Kronecker ordering: support qubit 0 is the
  most significant bit of the row/column index.
* An X-basis sign string over k qubits is indexed the same way: the table
  index reads the string from support qubit 0 (most significant) to qubit
  k-1, with '+' -> 0 and '-' -> 1.  Index 0 is "++..+", the last index is
  "--..-" (lexicographic, '+' before '-').
* A gate diagonal in the product X basis is stored as its table of
  eigenvalues lambda(s); a gate that permutes the X basis is stored as
  (perm, phases) with gate|s> = exp(i*phases[s]) |perm[s]>.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

ATOL = 1e-12
PERM_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PLUS_PROJ = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
MINUS_PROJ = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

TOFFOLI = np.eye(8, dtype=complex)
TOFFOLI[6, 6] = TOFFOLI[7, 7] = 0
TOFFOLI[6, 7] = TOFFOLI[7, 6] = 1


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor most significant."""
    return reduce(np.kron, mats)


def hadamard_layer(k: int) -> np.ndarray:
    return kron(*([H] * k))


TOFFOLI_PRIME = hadamard_layer(3) @ TOFFOLI @ hadamard_layer(3)

# c_X X: apply X on the target when the control is in the -1 eigenstate |->.
CXX = kron(PLUS_PROJ, I2) + kron(MINUS_PROJ, X)


def x_rotation(theta: float) -> np.ndarray:
    """exp(i*theta*X) on one qubit."""
    return np.cos(theta) * I2 + 1j * np.sin(theta) * X


def xbasis_matrix(m: np.ndarray) -> np.ndarray:
    """Matrix elements of m between product X-basis states, <s'|m|s>."""
    k = _arity(m)
    hk = hadamard_layer(k)
    return hk @ m @ hk


def _arity(m: np.ndarray) -> int:
    dim = m.shape[0]
    k = int(round(np.log2(dim)))
    if m.shape != (dim, dim) or 2**k != dim:
        raise ValueError(f"matrix shape {m.shape} is not square power-of-two")
    return k


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    dim = m.shape[0]
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(dim))) <= tol)


def extract_generalized_permutation(
    d: np.ndarray, tol: float = PERM_TOL
) -> tuple[np.ndarray, np.ndarray] | None:
    """Read (perm, phases) off a generalized permutation matrix.

    Per row, the max-modulus entry must have modulus >= 1-tol and every
    other entry <= tol; columns must be hit exactly once.  Returns None
    when d is not of that shape.  perm[s] is the image index of input s,
    phases[s] the phase of the surviving entry.
    """
    dim = d.shape[0]
    perm = np.full(dim, -1, dtype=np.int64)
    phases = np.zeros(dim)
    seen_rows = np.zeros(dim, dtype=bool)
    for r in range(dim):
        c = int(np.argmax(np.abs(d[r])))
        val = d[r, c]
        if abs(abs(val) - 1.0) > tol:
            return None
        rest = np.abs(d[r])
        if rest[np.arange(dim) != c].size and np.max(rest[np.arange(dim) != c]) > tol:
            return None
        if perm[c] != -1:
            return None
        perm[c] = r
        phases[c] = float(np.angle(val))
        seen_rows[r] = True
    if not seen_rows.all():
        return None
    return perm, phases


def permutation_xbasis_table(m: np.ndarray, tol: float = PERM_TOL):
    """(perm, phases) of m acting on the product X basis, or None."""
    return extract_generalized_permutation(xbasis_matrix(m), tol)


def xdiag_eigenvalues(m: np.ndarray, tol: float = PERM_TOL) -> np.ndarray | None:
    """Eigenvalue table when m is diagonal in the product X basis, else None."""
    d = xbasis_matrix(m)
    off = d - np.diag(np.diag(d))
    if np.max(np.abs(off)) > tol:
        return None
    return np.diag(d).copy()


def matrix_from_xdiag(lam: np.ndarray) -> np.ndarray:
    k = int(round(np.log2(len(lam))))
    hk = hadamard_layer(k)
    return hk @ np.diag(np.asarray(lam, dtype=complex)) @ hk


def matrix_from_permutation(
    perm: np.ndarray, phases: np.ndarray, global_phase: float = 0.0
) -> np.ndarray:
    """Dense (Z-basis) matrix of the gate |s> -> e^{i phi_s} |perm(s)>."""
    dim = len(perm)
    d = np.zeros((dim, dim), dtype=complex)
    for s in range(dim):
        d[perm[s], s] = np.exp(1j * (phases[s] + global_phase))
    k = int(round(np.log2(dim)))
    hk = hadamard_layer(k)
    return hk @ d @ hk


def controlled_x(payload: np.ndarray) -> np.ndarray:
    """c_X U: payload applied when the control is |-> (eigenvalue -1 of X)."""
    dim = payload.shape[0]
    return kron(PLUS_PROJ, np.eye(dim, dtype=complex)) + kron(MINUS_PROJ, payload)


def controlled_z(payload: np.ndarray) -> np.ndarray:
    """c_Z U: payload applied when the control is |1> (eigenvalue -1 of Z)."""
    dim = payload.shape[0]
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return kron(p0, np.eye(dim, dtype=complex)) + kron(p1, payload)


def _named_table(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tab = permutation_xbasis_table(m)
    if tab is None:  # pragma: no cover - would be a build bug
        raise RuntimeError("named gate is not an X-basis permutation")
    return tab


# X-basis permutation tables for the named gates, generated from the dense
# matrices at import time (snapshot-tested rather than hand-coded).
NAMED_MATRICES: dict[str, np.ndarray] = {
    "cnot": CNOT,
    "toffoli_prime": TOFFOLI_PRIME,
    "cxx": CXX,
}

NAMED_TABLES: dict[str, tuple[np.ndarray, np.ndarray]] = {
    name: _named_table(m) for name, m in NAMED_MATRICES.items()
}

NAMED_ARITY: dict[str, int] = {"cnot": 2, "toffoli_prime": 3, "cxx": 2, "identity": 0}


def named_matrix(name: str, k: int | None = None) -> np.ndarray:
    if name == "identity":
        if k is None:
            raise ValueError("identity needs an explicit arity")
        return np.eye(2**k, dtype=complex)
    return NAMED_MATRICES[name].copy()


def pauli_mask_pattern(mask_bits: int, k: int) -> np.ndarray:
    """X-basis diagonal of X_alpha: (-1)**<alpha, s> with MSB-first indices."""
    s = np.arange(2**k)
    par = np.zeros(2**k, dtype=np.int64)
    for j in range(k):
        if (mask_bits >> (k - 1 - j)) & 1:
            par ^= (s >> (k - 1 - j)) & 1
    return np.where(par == 1, -1.0, 1.0).astype(complex)


def match_pauli_pattern(lam: np.ndarray, tol: float = 1e-9) -> int | None:
    """If lam == c * X-basis pattern of some X_alpha with |c|=1, return alpha bits."""
    k = int(round(np.log2(len(lam))))
    c = lam[0]
    if abs(abs(c) - 1.0) > tol:
        return None
    mask = 0
    for j in range(k):
        idx = 1 << (k - 1 - j)
        r = lam[idx] / c
        if abs(r - 1.0) <= tol:
            continue
        if abs(r + 1.0) <= tol:
            mask |= idx
        else:
            return None
    if np.max(np.abs(lam - c * pauli_mask_pattern(mask, k))) > tol:
        return None
    return mask
