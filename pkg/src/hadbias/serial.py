"""Circuit JSON file format.

Top-level keys: ``registers`` {measured, parallel, data}, ``prep``
(per-qubit Bloch angles), ``prep_flip``, ``gates``, ``measure``.  Gate
entries carry ``kind``, ``qubits``, ``noise`` and a kind-specific payload:
``lambda`` as a list of [re, im] pairs in sign-string order ('+' before
'-' lexicographic, first support qubit most significant), ``perm`` and
``phases`` for bias permutations, or ``angle`` as an accepted shorthand
for the one-qubit table of exp(i*angle*X).  Writers always emit the
canonical ``lambda`` form, so write -> read round-trips exactly.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .circuit import (
    BiasPerm,
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
    XMask,
    NAMED_KINDS,
)


def _complex_list(lam: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in lam]


def _parse_lambda(entry: dict[str, Any], n_targets: int) -> np.ndarray:
    if "lambda" in entry:
        return np.array([complex(re, im) for re, im in entry["lambda"]])
    if "angle" in entry:
        if n_targets != 1:
            raise ValueError("'angle' shorthand only applies to 1-qubit payloads")
        theta = float(entry["angle"])
        return np.array([np.exp(1j * theta), np.exp(-1j * theta)])
    raise ValueError(f"gate entry needs 'lambda' or 'angle': {entry}")


def gate_to_jsonable(inst: GateInstance) -> dict[str, Any]:
    gate = inst.gate
    kind = gate.kind
    entry: dict[str, Any] = {"qubits": list(gate.support)}
    if isinstance(kind, XDiag):
        entry["kind"] = "xdiag"
        entry["lambda"] = _complex_list(kind.lam)
    elif isinstance(kind, BiasPerm):
        entry["kind"] = "bias_perm"
        entry["perm"] = [int(v) for v in kind.perm]
        entry["phases"] = [float(v) for v in kind.phases]
    elif isinstance(kind, Named):
        entry["kind"] = kind.name
    elif isinstance(kind, CtrlX):
        entry["kind"] = "ctrl_x"
        entry["lambda"] = _complex_list(kind.payload.lam)
    elif isinstance(kind, CtrlZ):
        entry["kind"] = "ctrl_z"
        entry["lambda"] = _complex_list(kind.payload.lam)
    else:
        raise ValueError(f"cannot serialize gate kind {type(kind).__name__}")
    entry["noise"] = [
        {"mask": list(mask.sorted()), "p": float(p)} for mask, p in inst.noise.terms
    ]
    return entry


def gate_from_jsonable(entry: dict[str, Any]) -> GateInstance:
    kind_name = entry["kind"]
    support = tuple(int(q) for q in entry["qubits"])
    if kind_name == "xdiag":
        gate = LocalGate(support, XDiag(_parse_lambda(entry, len(support))))
    elif kind_name == "bias_perm":
        gate = LocalGate(
            support,
            BiasPerm(np.array(entry["perm"], dtype=np.int64), np.array(entry["phases"], dtype=float)),
        )
    elif kind_name in NAMED_KINDS:
        gate = LocalGate(support, Named(kind_name))
    elif kind_name == "ctrl_x":
        gate = LocalGate(support, CtrlX(XDiag(_parse_lambda(entry, len(support) - 1))))
    elif kind_name == "ctrl_z":
        gate = LocalGate(support, CtrlZ(XDiag(_parse_lambda(entry, len(support) - 1))))
    else:
        raise ValueError(f"unknown gate kind {kind_name!r}")
    noise_terms = entry.get("noise")
    if noise_terms is None:
        noise = NoiseChannel.trivial(support)
    else:
        noise = NoiseChannel(
            tuple((XMask(frozenset(t["mask"])), float(t["p"])) for t in noise_terms)
        )
    return GateInstance(gate, noise)


def circuit_to_jsonable(c: Circuit) -> dict[str, Any]:
    return {
        "registers": {
            "measured": c.layout.measured,
            "parallel": c.layout.parallel,
            "data": c.layout.data,
        },
        "prep": [
            {"qubit": q, "theta": float(theta), "phi": float(phi)}
            for q, (theta, phi) in enumerate(c.prep.angles)
        ],
        "prep_flip": float(c.prep.flip),
        "gates": [gate_to_jsonable(inst) for inst in c.gatelist],
        "measure": {
            "qubit": int(c.measure.qubit),
            "basis": c.measure.basis,
            "flip": float(c.measure.flip),
        },
    }


def circuit_from_jsonable(data: dict[str, Any]) -> Circuit:
    regs = data["registers"]
    layout = RegisterLayout(
        parallel=int(regs["parallel"]),
        data=int(regs["data"]),
        measured=int(regs.get("measured", 1)),
    )
    entries = sorted(data["prep"], key=lambda e: int(e["qubit"]))
    angles = tuple((float(e["theta"]), float(e["phi"])) for e in entries)
    prep = PrepState(angles, float(data.get("prep_flip", 0.0)))
    gatelist = tuple(gate_from_jsonable(e) for e in data["gates"])
    meas = data["measure"]
    measure = MeasurementSpec(
        qubit=int(meas["qubit"]),
        basis=str(meas["basis"]),
        flip=float(meas.get("flip", 0.0)),
    )
    return Circuit(layout, prep, gatelist, measure)


def dumps_circuit(c: Circuit) -> str:
    return json.dumps(circuit_to_jsonable(c), indent=2, sort_keys=True)


def loads_circuit(text: str) -> Circuit:
    return circuit_from_jsonable(json.loads(text))


def save_circuit(c: Circuit, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_circuit(c))
        fh.write("\n")


def load_circuit(path: str) -> Circuit:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_circuit(fh.read())
