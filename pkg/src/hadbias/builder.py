"""Constructs noise-resilient Hadamard-test circuits.

Emission order: prepare the measured qubit in |0>, prepare the data
register, apply the B gates on data, entangle the measured qubit with the
parallelisation register (one c_X X followed by a balanced cNOT doubling
tree), apply the Z-controlled W gates with controls assigned round-robin
over the parallelisation qubits, mirror the entangler to disentangle,
apply the c_X V gates from the measured qubit, and measure in Y or Z.

The parallelisation register is only emitted when W gates are present.
When identity noise is enabled, an explicit identity gate is inserted on
the measured register at every wait slot: one per cNOT tree layer on each
side of the W block, plus one per round-robin W layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import (
    Circuit,
    CtrlX,
    CtrlZ,
    GateInstance,
    LocalGate,
    MeasurementSpec,
    Named,
    NoiseChannel,
    PrepState,
    RegisterLayout,
    XDiag,
    cxx,
    identity_gate,
    cnot,
    validate_circuit,
)


@dataclass(frozen=True)
class NoiseAssignment:
    """Per-family bit-flip probabilities attached to the emitted gates.

    Gates touching the measured register (the c_X V gates and the two
    c_X X gates) get independent per-qubit flips, so the marginal flip
    probability on the measured qubit equals the assigned value.  p_v may
    be a sequence with one entry per V gate.
    """

    p_prep: float = 0.0
    p_meas: float = 0.0
    p_v: float | tuple[float, ...] = 0.0
    p_cxx: float = 0.0
    p_data: float = 0.0

    def v_probability(self, i: int, n_v: int) -> float:
        if isinstance(self.p_v, (tuple, list)):
            if len(self.p_v) != n_v:
                raise ValueError("p_v sequence length must match the number of V gates")
            return float(self.p_v[i])
        return float(self.p_v)


@dataclass
class HadamardTestSpec:
    """Inputs of the builder; all gate supports are data-local (0..n-1)."""

    n: int
    prep: PrepState
    b_gates: list[LocalGate] = field(default_factory=list)
    v_gates: list[LocalGate] = field(default_factory=list)
    w_gates: list[LocalGate] = field(default_factory=list)
    parallel: int = 0
    noise: NoiseAssignment = field(default_factory=NoiseAssignment)
    basis: str = "Z"
    identity_noise: float | None = None

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("data register needs at least one qubit")
        if self.prep.n != self.n:
            raise ValueError("prep state does not cover the data register")
        if self.basis not in ("Y", "Z"):
            raise ValueError("measurement basis must be Y or Z")
        if self.w_gates and self.parallel < 1:
            raise ValueError("W gates require a parallelisation register (q_n >= 1)")
        for g in self.v_gates:
            if not isinstance(g.kind, XDiag):
                raise ValueError("V gates must be XDiag kind")
            if g.arity > 2:
                raise ValueError("V payloads may span at most 2 data qubits")
        for g in self.w_gates:
            if not isinstance(g.kind, XDiag):
                raise ValueError("W gates must be XDiag kind")
            if g.arity > 2:
                raise ValueError("W payloads may span at most 2 data qubits")
            lam = g.kind.lam
            if np.max(np.minimum(np.abs(lam - 1.0), np.abs(lam + 1.0))) > 1e-12:
                raise ValueError("W gates must be Hermitian (eigenvalues +-1)")
        for g in self.b_gates + self.v_gates + self.w_gates:
            if any(not 0 <= q < self.n for q in g.support):
                raise ValueError(f"gate support {g.support} outside the data register")
        if self.identity_noise is not None and not 0.0 <= self.identity_noise < 0.5:
            raise ValueError("identity noise probability must be in [0, 1/2)")


@dataclass
class BuildReport:
    l_n: int  # gates applied on the measured register, identities included
    n_n: int  # noisy-location count incl. prep and measurement, identities excluded
    n_identity: int  # identity wait slots on the measured register
    depth: int
    total_gates: int
    n_v: int
    n_w: int


def entangler_depth(q_n: int) -> int:
    """Layers to entangle measured/parallelisation: the c_X X plus the cNOT tree."""
    if q_n < 1:
        raise ValueError("q_n must be >= 1")
    return 1 + math.ceil(math.log2(q_n)) if q_n > 1 else 1


def _tree_layers(parallel_qubits: Sequence[int]) -> list[list[LocalGate]]:
    """Balanced doubling tree of cNOTs spreading qubit 1's value over the register."""
    have = [parallel_qubits[0]]
    remaining = list(parallel_qubits[1:])
    layers: list[list[LocalGate]] = []
    while remaining:
        layer = []
        for src in list(have):
            if not remaining:
                break
            dst = remaining.pop(0)
            layer.append(cnot(src, dst))
        have.extend(g.support[1] for g in layer)
        layers.append(layer)
    return layers


def _shift_gate(gate: LocalGate, offset: int) -> LocalGate:
    return LocalGate(tuple(q + offset for q in gate.support), gate.kind)


def build(spec: HadamardTestSpec) -> tuple[Circuit, BuildReport]:
    """Emit the circuit and its location counts."""
    spec.validate()
    q_n = spec.parallel
    layout = RegisterLayout(parallel=q_n, data=spec.n)
    offset = 1 + q_n

    angles = tuple((0.0, 0.0) for _ in range(offset)) + spec.prep.angles
    prep = PrepState(angles, spec.noise.p_prep)

    def data_noise(gate: LocalGate) -> NoiseChannel:
        if spec.noise.p_data > 0.0:
            return NoiseChannel.independent_flips(gate.support, spec.noise.p_data)
        return NoiseChannel.trivial(gate.support)

    def measured_noise(gate: LocalGate, p: float) -> NoiseChannel:
        if p > 0.0:
            return NoiseChannel.independent_flips(gate.support, p)
        return NoiseChannel.trivial(gate.support)

    instances: list[GateInstance] = []
    n_identity = 0

    def wait_slot() -> None:
        nonlocal n_identity
        if spec.identity_noise is not None:
            gate = identity_gate(0)
            instances.append(
                GateInstance(gate, NoiseChannel.single_mask({0}, spec.identity_noise))
            )
            n_identity += 1

    for gate in spec.b_gates:
        shifted = _shift_gate(gate, offset)
        instances.append(GateInstance(shifted, data_noise(shifted)))

    use_parallel = len(spec.w_gates) > 0
    if use_parallel:
        trees = _tree_layers(layout.parallel_qubits)
        first_cxx = cxx(0, 1)
        instances.append(GateInstance(first_cxx, measured_noise(first_cxx, spec.noise.p_cxx)))
        for layer in trees:
            for gate in layer:
                instances.append(GateInstance(gate, data_noise(gate)))
            wait_slot()
        n_w = len(spec.w_gates)
        for i, gate in enumerate(spec.w_gates):
            ctrl = layout.parallel_qubits[i % q_n]
            payload_support = tuple(q + offset for q in gate.support)
            w_gate = LocalGate((ctrl, *payload_support), CtrlZ(gate.kind))
            instances.append(GateInstance(w_gate, data_noise(w_gate)))
            if i % q_n == q_n - 1 or i == n_w - 1:
                wait_slot()
        for layer in reversed(trees):
            for gate in reversed(layer):
                instances.append(GateInstance(gate, data_noise(gate)))
            wait_slot()
        second_cxx = cxx(0, 1)
        instances.append(GateInstance(second_cxx, measured_noise(second_cxx, spec.noise.p_cxx)))

    n_v = len(spec.v_gates)
    for i, gate in enumerate(spec.v_gates):
        targets = tuple(q + offset for q in gate.support)
        v_gate = LocalGate((0, *targets), CtrlX(gate.kind))
        p = spec.noise.v_probability(i, n_v)
        instances.append(GateInstance(v_gate, measured_noise(v_gate, p)))

    measure = MeasurementSpec(qubit=0, basis=spec.basis, flip=spec.noise.p_meas)
    circuit = Circuit(layout, prep, tuple(instances), measure)

    report = validate_circuit(circuit)
    if not report.ok:  # pragma: no cover - builder emits valid circuits
        raise AssertionError(f"builder produced an invalid circuit: {report.violations}")
    return circuit, count_locations(circuit)


def count_locations(c: Circuit) -> BuildReport:
    """Recount measured-register locations and depth by scanning the circuit."""
    measured = c.layout.measured_qubit
    l_n = 0
    non_identity = 0
    n_identity = 0
    n_v = 0
    n_w = 0
    next_free: dict[int, int] = {}
    depth = 0
    for inst in c.gatelist:
        layer = 1 + max((next_free.get(q, 0) for q in inst.gate.support), default=0)
        for q in inst.gate.support:
            next_free[q] = layer
        depth = max(depth, layer)
        kind = inst.gate.kind
        if isinstance(kind, CtrlX):
            n_v += 1
        if isinstance(kind, CtrlZ):
            n_w += 1
        if measured in inst.gate.support:
            l_n += 1
            if isinstance(kind, Named) and kind.name == "identity":
                n_identity += 1
            else:
                non_identity += 1
    return BuildReport(
        l_n=l_n,
        n_n=non_identity + 2,
        n_identity=n_identity,
        depth=depth,
        total_gates=len(c.gatelist),
        n_v=n_v,
        n_w=n_w,
    )
