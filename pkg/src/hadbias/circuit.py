"""Domain types for biased-noise circuits and their X-basis symbolic action.

A circuit is a register layout, a product-state preparation, an ordered
list of gate instances (each a local gate plus a bit-flip noise channel on
its support), and one measurement on the measured register.  Gates come in
five kinds:

* ``XDiag``     - diagonal in the product X basis, table of 2^k eigenvalues
* ``BiasPerm``  - permutation of the X basis with per-string phases
* ``Named``     - cnot, toffoli_prime, cxx or identity (frozen built-in tables)
* ``CtrlX``     - X-diagonal payload applied when the control is |->
* ``CtrlZ``     - Hermitian X-diagonal payload applied when the control is |1>

Factory helpers validate eagerly; raw dataclass construction stays
permissive so that circuits loaded from files can be checked afterwards by
:func:`validate_circuit`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from . import gates as _g

ATOL = 1e-12

NAMED_KINDS = ("cnot", "toffoli_prime", "cxx", "identity")


# ---------------------------------------------------------------------------
# sign strings


def sign_index(s: str) -> int:
    """Table index of a sign string, '+'->0 / '-'->1, first qubit most significant."""
    idx = 0
    for ch in s:
        if ch == "+":
            idx = idx << 1
        elif ch == "-":
            idx = (idx << 1) | 1
        else:
            raise ValueError(f"sign string may only contain '+' and '-', got {s!r}")
    return idx


def index_signs(idx: int, k: int) -> str:
    """Inverse of :func:`sign_index`."""
    if not 0 <= idx < 2**k:
        raise ValueError(f"index {idx} out of range for {k} qubits")
    return "".join("-" if (idx >> (k - 1 - j)) & 1 else "+" for j in range(k))


def all_sign_strings(k: int) -> list[str]:
    return [index_signs(i, k) for i in range(2**k)]


# ---------------------------------------------------------------------------
# masks and noise


@dataclass(frozen=True)
class XMask:
    """Product of Pauli X on a subset of qubits; composition is XOR."""

    qubits: frozenset[int]

    @classmethod
    def of(cls, *qubits: int) -> "XMask":
        return cls(frozenset(qubits))

    @classmethod
    def empty(cls) -> "XMask":
        return cls(frozenset())

    def __xor__(self, other: "XMask") -> "XMask":
        return XMask(self.qubits ^ other.qubits)

    def __contains__(self, q: int) -> bool:
        return q in self.qubits

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.qubits))


@dataclass(frozen=True)
class NoiseChannel:
    """Distribution over X masks applied after a gate, supported on its qubits."""

    terms: tuple[tuple[XMask, float], ...]

    @classmethod
    def trivial(cls, support: Sequence[int] = ()) -> "NoiseChannel":
        return cls(((XMask.empty(), 1.0),))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Iterable[int] | XMask, float]]) -> "NoiseChannel":
        out = []
        for mask, p in terms:
            if not isinstance(mask, XMask):
                mask = XMask(frozenset(mask))
            out.append((mask, float(p)))
        return cls(tuple(out))

    @classmethod
    def independent_flips(cls, support: Sequence[int], p: float) -> "NoiseChannel":
        """Each support qubit flips independently with probability p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("flip probability must be in [0,1]")
        terms = []
        k = len(support)
        for bits in range(2**k):
            qs = frozenset(support[j] for j in range(k) if (bits >> j) & 1)
            prob = p ** len(qs) * (1 - p) ** (k - len(qs))
            if prob > 0.0:
                terms.append((XMask(qs), prob))
        return cls(tuple(terms))

    @classmethod
    def single_mask(cls, qubits: Iterable[int], p: float) -> "NoiseChannel":
        """Apply X on the given qubits with probability p, nothing otherwise."""
        mask = XMask(frozenset(qubits))
        if not 0.0 <= p <= 1.0:
            raise ValueError("probability must be in [0,1]")
        if p == 1.0:
            return cls(((mask, 1.0),))
        return cls(((XMask.empty(), 1.0 - p), (mask, p)))

    def total_probability(self) -> float:
        return float(sum(p for _, p in self.terms))

    def marginal_flip_probability(self, qubit: int) -> float:
        """Probability that the sampled mask contains the given qubit."""
        return float(sum(p for mask, p in self.terms if qubit in mask))

    def is_trivial(self) -> bool:
        return all(not mask.qubits or p == 0.0 for mask, p in self.terms)

    def violations(self, support: Sequence[int]) -> list[str]:
        out = []
        if abs(self.total_probability() - 1.0) > ATOL:
            out.append("noise not normalized")
        sup = set(support)
        masks = [m.qubits for m, _ in self.terms]
        if len(set(masks)) != len(masks):
            out.append("duplicate noise masks")
        for mask, p in self.terms:
            if not 0.0 <= p <= 1.0:
                out.append("noise probability out of [0,1]")
            if not mask.qubits <= sup:
                out.append("noise mask outside gate support")
        return out


def sample_noise(nc: NoiseChannel, rng: np.random.Generator) -> XMask:
    """Draw a mask from the channel; deterministic for a given rng state."""
    u = rng.random()
    acc = 0.0
    for mask, p in nc.terms:
        acc += p
        if u < acc:
            return mask
    return nc.terms[-1][0]


# ---------------------------------------------------------------------------
# gate kinds


@dataclass(frozen=True)
class XDiag:
    """Table of 2^k unit-modulus eigenvalues, indexed by sign string."""

    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=complex))


@dataclass(frozen=True)
class BiasPerm:
    """Permutation of sign strings plus a real phase per input string."""

    perm: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "perm", np.asarray(self.perm, dtype=np.int64))
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float))


@dataclass(frozen=True)
class Named:
    name: str


@dataclass(frozen=True)
class CtrlX:
    """c_X U: X-diagonal payload on the non-control qubits."""

    payload: XDiag


@dataclass(frozen=True)
class CtrlZ:
    """Z-controlled Hermitian X-diagonal payload (eigenvalues +-1)."""

    payload: XDiag


GateKind = Union[XDiag, BiasPerm, Named, CtrlX, CtrlZ]


@dataclass(frozen=True)
class LocalGate:
    """A gate kind attached to an ordered support of at most 3 qubits."""

    support: tuple[int, ...]
    kind: GateKind

    @property
    def arity(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class GateInstance:
    gate: LocalGate
    noise: NoiseChannel = field(default_factory=NoiseChannel.trivial)


# ---------------------------------------------------------------------------
# factories (validate eagerly)


def _check_support(support: Sequence[int]) -> tuple[int, ...]:
    sup = tuple(int(q) for q in support)
    if not 1 <= len(sup) <= 3:
        raise ValueError(f"gate support must have 1..3 qubits, got {sup}")
    if len(set(sup)) != len(sup):
        raise ValueError(f"gate support has repeated qubits: {sup}")
    if any(q < 0 for q in sup):
        raise ValueError(f"negative qubit index in support {sup}")
    return sup


def xdiag_gate(support: Sequence[int], lam: Sequence[complex]) -> LocalGate:
    sup = _check_support(support)
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (2 ** len(sup),):
        raise ValueError("eigenvalue table size does not match support")
    if np.max(np.abs(np.abs(lam) - 1.0)) > ATOL:
        raise ValueError("XDiag eigenvalues must have unit modulus")
    return LocalGate(sup, XDiag(lam))


def xrot_gate(qubit: int, theta: float) -> LocalGate:
    """exp(i*theta*X) on one qubit: eigenvalues (e^{i theta}, e^{-i theta})."""
    return xdiag_gate((qubit,), [np.exp(1j * theta), np.exp(-1j * theta)])


def bias_perm_gate(
    support: Sequence[int], perm: Sequence[int], phases: Sequence[float]
) -> LocalGate:
    sup = _check_support(support)
    perm = np.asarray(perm, dtype=np.int64)
    phases = np.asarray(phases, dtype=float)
    dim = 2 ** len(sup)
    if perm.shape != (dim,) or phases.shape != (dim,):
        raise ValueError("permutation table size does not match support")
    if sorted(perm.tolist()) != list(range(dim)):
        raise ValueError("perm is not a bijection")
    return LocalGate(sup, BiasPerm(perm, phases))


def named_gate(name: str, support: Sequence[int]) -> LocalGate:
    sup = _check_support(support)
    if name not in NAMED_KINDS:
        raise ValueError(f"unknown named gate {name!r}")
    arity = _g.NAMED_ARITY[name]
    if arity and len(sup) != arity:
        raise ValueError(f"{name} acts on {arity} qubits, got support {sup}")
    return LocalGate(sup, Named(name))


def cnot(control: int, target: int) -> LocalGate:
    return named_gate("cnot", (control, target))


def toffoli_prime(c1: int, c2: int, target: int) -> LocalGate:
    return named_gate("toffoli_prime", (c1, c2, target))


def cxx(control: int, target: int) -> LocalGate:
    return named_gate("cxx", (control, target))


def identity_gate(*qubits: int) -> LocalGate:
    return named_gate("identity", qubits)


def ctrl_x_gate(control: int, targets: Sequence[int], lam: Sequence[complex]) -> LocalGate:
    sup = _check_support((control, *targets))
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (2 ** (len(sup) - 1),):
        raise ValueError("payload table size does not match targets")
    if np.max(np.abs(np.abs(lam) - 1.0)) > ATOL:
        raise ValueError("payload eigenvalues must have unit modulus")
    return LocalGate(sup, CtrlX(XDiag(lam)))


def ctrl_z_gate(control: int, targets: Sequence[int], lam: Sequence[complex]) -> LocalGate:
    sup = _check_support((control, *targets))
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (2 ** (len(sup) - 1),):
        raise ValueError("payload table size does not match targets")
    # a Hermitian unitary diagonal in the X basis has eigenvalues +-1
    if np.max(np.minimum(np.abs(lam - 1.0), np.abs(lam + 1.0))) > ATOL:
        raise ValueError("CtrlZ payload must be Hermitian (eigenvalues +-1)")
    return LocalGate(sup, CtrlZ(XDiag(lam)))


# ---------------------------------------------------------------------------
# preparation, measurement, circuit


@dataclass(frozen=True)
class RegisterLayout:
    """measured (always 1 qubit) -> parallel -> data, contiguous indices."""

    parallel: int
    data: int
    measured: int = 1

    @property
    def total(self) -> int:
        return self.measured + self.parallel + self.data

    @property
    def measured_qubit(self) -> int:
        return 0

    @property
    def parallel_qubits(self) -> tuple[int, ...]:
        return tuple(range(1, 1 + self.parallel))

    @property
    def data_qubits(self) -> tuple[int, ...]:
        return tuple(range(1 + self.parallel, self.total))

    def violations(self) -> list[str]:
        out = []
        if self.measured != 1:
            out.append("measured register must hold exactly 1 qubit")
        if self.parallel < 0:
            out.append("parallel register size must be >= 0")
        if self.data < 1:
            out.append("data register must hold at least 1 qubit")
        return out


@dataclass(frozen=True)
class PrepState:
    """Per-qubit Bloch angles (theta, phi) plus a per-qubit prep flip probability."""

    angles: tuple[tuple[float, float], ...]
    flip: float = 0.0

    @classmethod
    def zeros(cls, n: int, flip: float = 0.0) -> "PrepState":
        return cls(tuple((0.0, 0.0) for _ in range(n)), flip)

    @classmethod
    def plus_states(cls, n: int, flip: float = 0.0) -> "PrepState":
        return cls(tuple((np.pi / 2, 0.0) for _ in range(n)), flip)

    @property
    def n(self) -> int:
        return len(self.angles)

    def qubit_state(self, i: int) -> np.ndarray:
        theta, phi = self.angles[i]
        return np.array(
            [np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex
        )

    def violations(self) -> list[str]:
        out = []
        for theta, phi in self.angles:
            if not 0.0 <= theta <= np.pi + ATOL:
                out.append("prep theta outside [0, pi]")
            if not 0.0 <= phi < 2 * np.pi + ATOL:
                out.append("prep phi outside [0, 2pi)")
        if not 0.0 <= self.flip < 0.5:
            out.append("prep flip probability outside [0, 1/2)")
        return out


@dataclass(frozen=True)
class MeasurementSpec:
    qubit: int
    basis: str  # "Y" or "Z"
    flip: float = 0.0

    def violations(self) -> list[str]:
        out = []
        if self.basis not in ("Y", "Z"):
            out.append("measurement basis must be Y or Z")
        if not 0.0 <= self.flip < 0.5:
            out.append("measurement flip probability outside [0, 1/2)")
        return out


@dataclass(frozen=True)
class Circuit:
    layout: RegisterLayout
    prep: PrepState
    gatelist: tuple[GateInstance, ...]
    measure: MeasurementSpec

    @property
    def n_qubits(self) -> int:
        return self.layout.total


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _gate_violations(gate: LocalGate) -> list[str]:
    out = []
    sup = gate.support
    if not 1 <= len(sup) <= 3 or len(set(sup)) != len(sup):
        out.append(f"bad support {sup}")
        return out
    kind = gate.kind
    dim = 2 ** len(sup)
    if isinstance(kind, XDiag):
        if kind.lam.shape != (dim,):
            out.append("xdiag table size mismatch")
        elif np.max(np.abs(np.abs(kind.lam) - 1.0)) > ATOL:
            out.append("non-unit xdiag eigenvalue")
    elif isinstance(kind, BiasPerm):
        if kind.perm.shape != (dim,) or kind.phases.shape != (dim,):
            out.append("bias_perm table size mismatch")
        elif sorted(kind.perm.tolist()) != list(range(dim)):
            out.append("bias_perm is not a bijection")
    elif isinstance(kind, Named):
        if kind.name not in NAMED_KINDS:
            out.append(f"unknown named gate {kind.name!r}")
        else:
            arity = _g.NAMED_ARITY[kind.name]
            if arity and len(sup) != arity:
                out.append(f"{kind.name} arity mismatch")
    elif isinstance(kind, (CtrlX, CtrlZ)):
        lam = kind.payload.lam
        if lam.shape != (dim // 2,):
            out.append("controlled payload size mismatch")
        elif np.max(np.abs(np.abs(lam) - 1.0)) > ATOL:
            out.append("non-unit controlled payload eigenvalue")
        elif isinstance(kind, CtrlZ) and np.max(
            np.minimum(np.abs(lam - 1.0), np.abs(lam + 1.0))
        ) > ATOL:
            out.append("CtrlZ payload not Hermitian")
    else:
        out.append(f"unknown gate kind {type(kind).__name__}")
    return out


def validate_circuit(c: Circuit) -> ValidationReport:
    """Collect all structural violations; an empty report means valid."""
    out: list[str] = []
    out.extend(c.layout.violations())
    m = c.layout.total
    if c.prep.n != m:
        out.append(f"prep covers {c.prep.n} qubits, circuit has {m}")
    out.extend(c.prep.violations())
    out.extend(c.measure.violations())
    if c.measure.qubit != c.layout.measured_qubit:
        out.append("measurement is not on the measured register")
    for i, inst in enumerate(c.gatelist):
        for v in _gate_violations(inst.gate):
            out.append(f"gate {i}: {v}")
        if any(q >= m for q in inst.gate.support):
            out.append(f"gate {i}: support overflow")
        for v in inst.noise.violations(inst.gate.support):
            out.append(f"gate {i}: {v}")
    return ValidationReport(out)


# ---------------------------------------------------------------------------
# symbolic X-basis action


def _payload_index(s_idx: int, k: int) -> tuple[int, int]:
    """Split a k-qubit index into (control bit, payload index), control is MSB."""
    ctrl = (s_idx >> (k - 1)) & 1
    payload = s_idx & ((1 << (k - 1)) - 1)
    return ctrl, payload


def act_bias_gate(gate: LocalGate, s: str) -> tuple[str, float]:
    """Image sign string and phase of a bias-preserving gate: V|s> = e^{i phi}|s'>.

    Supports BiasPerm, Named, CtrlX and CtrlZ kinds (all act as
    permutations with phases on the X basis).  XDiag gates are rejected
    here; use :func:`eigenvalue_xdiag` instead.
    """
    k = gate.arity
    if len(s) != k:
        raise ValueError(f"sign string length {len(s)} does not match arity {k}")
    idx = sign_index(s)
    kind = gate.kind
    if isinstance(kind, BiasPerm):
        return index_signs(int(kind.perm[idx]), k), float(kind.phases[idx])
    if isinstance(kind, Named):
        if kind.name == "identity":
            return s, 0.0
        perm, phases = _g.NAMED_TABLES[kind.name]
        return index_signs(int(perm[idx]), k), float(phases[idx])
    if isinstance(kind, CtrlX):
        ctrl, pay = _payload_index(idx, k)
        if ctrl == 0:
            return s, 0.0
        return s, float(np.angle(kind.payload.lam[pay]))
    if isinstance(kind, CtrlZ):
        ctrl, pay = _payload_index(idx, k)
        lam = kind.payload.lam[pay]
        if abs(lam - 1.0) <= 1e-9:
            return s, 0.0
        if abs(lam + 1.0) <= 1e-9:
            # payload eigenvalue -1 flips the control's X-basis sign
            flipped = idx ^ (1 << (k - 1))
            return index_signs(flipped, k), 0.0
        raise ValueError("CtrlZ payload is not Hermitian: no permutation action")
    raise ValueError(f"gate kind {type(kind).__name__} has no permutation action")


def eigenvalue_xdiag(gate: LocalGate, s: str) -> complex:
    """Eigenvalue lambda(s) of an XDiag gate on the sign string s."""
    if not isinstance(gate.kind, XDiag):
        raise ValueError("eigenvalue_xdiag expects an XDiag gate")
    if len(s) != gate.arity:
        raise ValueError("sign string length does not match gate arity")
    return complex(gate.kind.lam[sign_index(s)])


def as_xdiag_table(gate: LocalGate) -> np.ndarray | None:
    """Eigenvalue table over the full support when the gate is X-diagonal.

    XDiag gates are diagonal by definition; CtrlX gates and the named cxx
    and identity gates are diagonal as well.  Returns None for anything
    else (cnot, toffoli_prime, BiasPerm with a nontrivial permutation,
    CtrlZ with a nontrivial payload are not X-diagonal in general).
    """
    kind = gate.kind
    k = gate.arity
    if isinstance(kind, XDiag):
        return kind.lam
    if isinstance(kind, CtrlX):
        pay = kind.payload.lam
        return np.concatenate([np.ones_like(pay), pay])
    if isinstance(kind, Named):
        if kind.name == "identity":
            return np.ones(2**k, dtype=complex)
        if kind.name == "cxx":
            return np.array([1, 1, 1, -1], dtype=complex)
        return None
    if isinstance(kind, BiasPerm):
        if np.array_equal(kind.perm, np.arange(2**k)):
            return np.exp(1j * kind.phases)
        return None
    if isinstance(kind, CtrlZ):
        if np.max(np.abs(kind.payload.lam - 1.0)) <= 1e-12:
            return np.ones(2**k, dtype=complex)
        return None
    return None


def permutation_table(gate: LocalGate) -> np.ndarray | None:
    """Full-support permutation table for the sampler, or None if not applicable.

    Phases are dropped on purpose: conjugating |s><s| cancels them, so the
    Theorem-2 sampler only needs the permutation.  X-diagonal gates map to
    the identity permutation.
    """
    k = gate.arity
    kind = gate.kind
    dim = 2**k
    if isinstance(kind, BiasPerm):
        return kind.perm
    if isinstance(kind, Named):
        if kind.name == "identity":
            return np.arange(dim, dtype=np.int64)
        return _g.NAMED_TABLES[kind.name][0]
    if isinstance(kind, (XDiag, CtrlX)):
        return np.arange(dim, dtype=np.int64)
    if isinstance(kind, CtrlZ):
        pay = kind.payload.lam
        if np.max(np.minimum(np.abs(pay - 1.0), np.abs(pay + 1.0))) > 1e-9:
            return None
        perm = np.arange(dim, dtype=np.int64)
        half = dim // 2
        for p in range(half):
            if abs(pay[p] + 1.0) <= 1e-9:
                perm[p] = p | half
                perm[p | half] = p
        return perm
    return None
