"""Random instance generators shared by the unit and acceptance tests."""

from __future__ import annotations

import dataclasses
from itertools import chain, combinations

import numpy as np

import hadbias as hb
from hadbias.circuit import GateInstance, Named, NoiseChannel, XMask


def pick_support(rng: np.random.Generator, n: int, max_k: int = 2) -> tuple[int, ...]:
    k = int(rng.integers(1, min(max_k, n) + 1))
    return tuple(int(q) for q in rng.choice(n, size=k, replace=False))


def random_prep(rng: np.random.Generator, n: int, flip: float = 0.0) -> hb.PrepState:
    angles = tuple(
        (float(rng.uniform(0.0, np.pi)), float(rng.uniform(0.0, 2 * np.pi)))
        for _ in range(n)
    )
    return hb.PrepState(angles, flip)


def random_xdiag(rng: np.random.Generator, support, spread: float = np.pi) -> hb.LocalGate:
    lam = np.exp(1j * rng.uniform(-spread, spread, 2 ** len(support)))
    return hb.xdiag_gate(support, lam)


def random_hermitian_xdiag(rng: np.random.Generator, support) -> hb.LocalGate:
    lam = rng.choice([1.0, -1.0], size=2 ** len(support))
    if np.all(lam == 1.0):
        lam[int(rng.integers(len(lam)))] = -1.0
    return hb.xdiag_gate(support, lam)


def random_biasperm(rng: np.random.Generator, support) -> hb.LocalGate:
    dim = 2 ** len(support)
    return hb.bias_perm_gate(support, rng.permutation(dim), rng.uniform(-np.pi, np.pi, dim))


def random_bias_gate(rng: np.random.Generator, n: int) -> hb.LocalGate:
    """A random bias-preserving gate on a random support inside 0..n-1."""
    choices = ["biasperm", "xdiag"]
    if n >= 2:
        choices += ["cnot", "cxx"]
    if n >= 3:
        choices.append("toffoli_prime")
    kind = rng.choice(choices)
    if kind == "cnot":
        a, b = rng.choice(n, size=2, replace=False)
        return hb.cnot(int(a), int(b))
    if kind == "cxx":
        a, b = rng.choice(n, size=2, replace=False)
        return hb.cxx(int(a), int(b))
    if kind == "toffoli_prime":
        a, b, c = rng.choice(n, size=3, replace=False)
        return hb.toffoli_prime(int(a), int(b), int(c))
    support = pick_support(rng, n, max_k=2)
    if kind == "biasperm":
        return random_biasperm(rng, support)
    return random_xdiag(rng, support)


def _subsets(support):
    return [
        frozenset(s)
        for s in chain.from_iterable(
            combinations(support, r) for r in range(len(support) + 1)
        )
    ]


def random_channel(
    rng: np.random.Generator,
    support,
    pivot_probability: float = 0.0,
    pivot: int | None = None,
) -> NoiseChannel:
    """Random mask distribution; masks containing `pivot` get exactly that much weight."""
    subsets = _subsets(support)
    if pivot is not None and pivot in support and pivot_probability > 0.0:
        with_pivot = [s for s in subsets if pivot in s]
        without = [s for s in subsets if pivot not in s]
        w1 = rng.random(len(with_pivot))
        w1 = pivot_probability * w1 / w1.sum()
        w0 = rng.random(len(without))
        w0 = (1.0 - pivot_probability) * w0 / w0.sum()
        terms = list(zip(with_pivot, w1)) + list(zip(without, w0))
    else:
        w = rng.random(len(subsets))
        w = w / w.sum()
        terms = list(zip(subsets, w))
    return NoiseChannel(tuple((XMask(s), float(p)) for s, p in terms))


def compose_channels(a: NoiseChannel, b: NoiseChannel) -> NoiseChannel:
    """Sequential bit-flip channels compose by XOR-convolving their masks."""
    acc: dict[frozenset, float] = {}
    for ma, pa in a.terms:
        for mb, pb in b.terms:
            key = ma.qubits ^ mb.qubits
            acc[key] = acc.get(key, 0.0) + pa * pb
    return NoiseChannel(tuple((XMask(k), p) for k, p in acc.items()))


def random_theorem1_spec(
    rng: np.random.Generator,
    n_max: int = 5,
    q_max: int = 3,
    nv_max: int = 4,
    nw_max: int = 6,
    p_max: float = 0.3,
    with_identity_noise: bool = False,
) -> hb.HadamardTestSpec:
    n = int(rng.integers(1, n_max + 1))
    n_v = int(rng.integers(1, nv_max + 1))
    n_w = int(rng.integers(0, nw_max + 1))
    q = int(rng.integers(1, q_max + 1)) if n_w else 0
    noise = hb.NoiseAssignment(
        p_prep=float(rng.uniform(0, p_max)),
        p_meas=float(rng.uniform(0, p_max)),
        p_v=tuple(float(p) for p in rng.uniform(0, p_max, n_v)),
        p_cxx=float(rng.uniform(0, p_max)),
        p_data=float(rng.uniform(0, p_max)),
    )
    identity_noise = float(rng.uniform(0, p_max)) if with_identity_noise and n_w else None
    return hb.HadamardTestSpec(
        n=n,
        prep=random_prep(rng, n),
        b_gates=[random_bias_gate(rng, n) for _ in range(int(rng.integers(0, 5)))],
        v_gates=[random_xdiag(rng, pick_support(rng, n, 2)) for _ in range(n_v)],
        w_gates=[random_hermitian_xdiag(rng, pick_support(rng, n, 2)) for _ in range(n_w)],
        parallel=q,
        noise=noise,
        basis="Z",
        identity_noise=identity_noise,
    )


def _is_identity_instance(inst: GateInstance) -> bool:
    return isinstance(inst.gate.kind, Named) and inst.gate.kind.name == "identity"


def randomize_measured_channels(
    c: hb.Circuit, rng: np.random.Generator, p_max: float = 0.3
) -> hb.Circuit:
    """Replace measured-register gate channels with random correlated ones."""
    new = []
    for inst in c.gatelist:
        if 0 in inst.gate.support and not _is_identity_instance(inst):
            q = float(rng.uniform(0.0, p_max))
            new.append(
                GateInstance(inst.gate, random_channel(rng, inst.gate.support, q, pivot=0))
            )
        else:
            new.append(inst)
    return dataclasses.replace(c, gatelist=tuple(new))


def add_data_register_noise(
    c: hb.Circuit, rng: np.random.Generator, p_max: float = 0.4
) -> hb.Circuit:
    """Compose extra random bit-flip noise onto every gate avoiding the measured qubit."""
    new = []
    for inst in c.gatelist:
        if 0 in inst.gate.support:
            new.append(inst)
            continue
        extra = random_channel(rng, inst.gate.support)
        # keep every per-qubit marginal below p_max
        worst = max(
            (extra.marginal_flip_probability(q) for q in inst.gate.support), default=0.0
        )
        if worst > p_max:
            scale = p_max / worst
            terms = [
                (mask, p * scale) if mask.qubits else (mask, p)
                for mask, p in extra.terms
            ]
            slack = 1.0 - sum(p for _, p in terms)
            terms = [
                (mask, p + slack) if not mask.qubits else (mask, p) for mask, p in terms
            ]
            extra = NoiseChannel(tuple(terms))
        new.append(GateInstance(inst.gate, compose_channels(inst.noise, extra)))
    return dataclasses.replace(c, gatelist=tuple(new))


def measured_state_with_flip(c: hb.Circuit) -> np.ndarray:
    """Dense reduced measured state with the outcome-flip channel folded in."""
    from hadbias.dense import apply_bitflip_dm, evolve_density, reduce_qubit

    red = reduce_qubit(evolve_density(c), c.layout.measured_qubit)
    return apply_bitflip_dm(red, 0, c.measure.flip, 1)
