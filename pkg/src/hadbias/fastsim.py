"""Polynomial-time classical estimator of <psi|B+ U B|psi> for restricted circuits.

The estimator works entirely on X-basis sign strings: the input product
state is dephased qubit-by-qubit into a product distribution over sign
strings, each sample is pushed through the bias-preserving gates of B as a
permutation (phases cancel), and the eigenvalues of the X-diagonal gates
of U are multiplied up.  The sample mean is an unbiased estimator of the
overlap, with a Hoeffding guarantee per real/imaginary part.

Sampling is chunked; every chunk draws from its own RNG substream derived
from (seed, chunk index), so results are bit-reproducible for a fixed
(seed, N) no matter how work is scheduled, and identical between the numba
and numpy backends.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .circuit import LocalGate, PrepState, as_xdiag_table, permutation_table


@dataclass(frozen=True)
class DephasedInput:
    """Per data qubit: probability of |+> after dephasing in the X basis."""

    p_plus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_plus", np.asarray(self.p_plus, dtype=float))

    @property
    def n(self) -> int:
        return len(self.p_plus)


def dephase_prep(prep: PrepState) -> DephasedInput:
    """p_i(+) = |<+|phi_i>|^2 = (1 + sin(theta) cos(phi))/2.

    The prep bit-flip probability is deliberately ignored: X commutes with
    dephasing in the X basis, so prep flips do not move any weight between
    |+> and |->.
    """
    thetas = np.array([a[0] for a in prep.angles])
    phis = np.array([a[1] for a in prep.angles])
    return DephasedInput(0.5 * (1.0 + np.sin(thetas) * np.cos(phis)))


def hoeffding_shots(eps: float, delta: float) -> int:
    """Shots for eps-accuracy with probability 1-delta, variables in [-1, 1]."""
    if not 0 < eps <= 2:
        raise ValueError("eps must be in (0, 2]")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    return max(1, math.ceil(2.0 * math.log(2.0 / delta) / eps**2))


@dataclass(frozen=True)
class EstimationPlan:
    eps: float
    delta: float
    n_shots: int
    seed: int = 12345

    def __post_init__(self):
        if not 0 < self.eps <= 2:
            raise ValueError("eps must be in (0, 2]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.n_shots < hoeffding_shots(self.eps, self.delta):
            raise ValueError(
                f"n_shots={self.n_shots} below the Hoeffding requirement "
                f"{hoeffding_shots(self.eps, self.delta)}"
            )

    @classmethod
    def from_accuracy(cls, eps: float, delta: float, seed: int = 12345) -> "EstimationPlan":
        return cls(eps, delta, hoeffding_shots(eps, delta), seed)


@dataclass
class EstimateResult:
    mean: complex
    stderr_re: float
    stderr_im: float
    n_shots: int
    seconds: float


@dataclass
class _Program:
    """Gate tables flattened into kernel-ready arrays."""

    n: int
    p_wi: np.ndarray
    p_bi: np.ndarray
    p_k: np.ndarray
    p_tab: np.ndarray
    e_wi: np.ndarray
    e_bi: np.ndarray
    e_k: np.ndarray
    e_tab: np.ndarray


def _coords(support: Sequence[int]) -> tuple[list[int], list[int]]:
    wi = [q >> 6 for q in support]
    bi = [q & 63 for q in support]
    return wi, bi


def compile_program(
    b_gates: Sequence[LocalGate], u_gates: Sequence[LocalGate], n: int
) -> _Program:
    """Flatten B into permutation tables and U into eigenvalue tables.

    X-diagonal gates inside B act as the identity permutation on sign
    strings and are dropped (their phases cancel when conjugating |s><s|).
    U gates must be X-diagonal: XDiag tables, c_X payloads, cxx and
    identity all qualify.
    """
    p_rows: list[tuple[list[int], list[int], int, np.ndarray]] = []
    for gate in b_gates:
        if any(q >= n or q < 0 for q in gate.support):
            raise ValueError(f"B gate support {gate.support} outside 0..{n - 1}")
        perm = permutation_table(gate)
        if perm is None:
            raise ValueError(
                f"B gate of kind {type(gate.kind).__name__} is not bias-preserving"
            )
        if np.array_equal(perm, np.arange(len(perm))):
            continue  # X-diagonal or identity: no effect on sign strings
        wi, bi = _coords(gate.support)
        p_rows.append((wi, bi, gate.arity, perm))

    e_rows: list[tuple[list[int], list[int], int, np.ndarray]] = []
    for gate in u_gates:
        if any(q >= n or q < 0 for q in gate.support):
            raise ValueError(f"U gate support {gate.support} outside 0..{n - 1}")
        lam = as_xdiag_table(gate)
        if lam is None:
            raise ValueError(
                f"U gate of kind {type(gate.kind).__name__} is not X-diagonal"
            )
        if np.max(np.abs(lam - 1.0)) <= 1e-15:
            continue  # exact identity contributes nothing
        wi, bi = _coords(gate.support)
        e_rows.append((wi, bi, gate.arity, lam.astype(np.complex128)))

    def _pad(rows, table_dtype):
        count = len(rows)
        wi = np.zeros((count, 3), dtype=np.int64)
        bi = np.zeros((count, 3), dtype=np.uint64)
        ks = np.zeros(count, dtype=np.int64)
        tab = np.zeros((count, 8), dtype=table_dtype)
        for i, (w, b, k, t) in enumerate(rows):
            wi[i, : len(w)] = w
            bi[i, : len(b)] = b
            ks[i] = k
            tab[i, : len(t)] = t
        return wi, bi, ks, tab

    p_wi, p_bi, p_k, p_tab = _pad(p_rows, np.int64)
    e_wi, e_bi, e_k, e_tab = _pad(e_rows, np.complex128)
    return _Program(n, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab)


def _run_program(prog: _Program, words: np.ndarray, backend: str | None) -> np.ndarray:
    return _kernels.run_batch(
        words,
        prog.p_wi,
        prog.p_bi,
        prog.p_k,
        prog.p_tab,
        prog.e_wi,
        prog.e_bi,
        prog.e_k,
        prog.e_tab,
        backend=backend,
    )


def _chunk_size(n: int, n_shots: int) -> int:
    words_per_shot = _kernels.n_words(n)
    cap = max(64, (1 << 26) // (8 * words_per_shot))  # ~64 MB of packed words
    return int(min(8192, cap, n_shots))


_QUBIT_BLOCK = 4096  # bits sampled per rng.random call, multiple of 64


def _sample_chunk(rng: np.random.Generator, shots: int, p_minus: np.ndarray) -> np.ndarray:
    """Packed sign strings for one chunk; bit 1 means '-'."""
    n = len(p_minus)
    words = np.zeros((shots, _kernels.n_words(n)), dtype=np.uint64)
    for q0 in range(0, n, _QUBIT_BLOCK):
        hi = min(q0 + _QUBIT_BLOCK, n)
        bits = rng.random((shots, hi - q0)) < p_minus[q0:hi]
        packed = _kernels.pack_bits(bits)
        words[:, q0 >> 6 : (q0 >> 6) + packed.shape[1]] = packed
    return words


def estimate_overlap(
    b_gates: Sequence[LocalGate],
    u_gates: Sequence[LocalGate],
    prep: PrepState,
    plan: EstimationPlan,
    backend: str | None = None,
) -> EstimateResult:
    """Monte Carlo estimate of <psi|B+ U B|psi> over plan.n_shots samples."""
    t0 = time.perf_counter()
    dephased = dephase_prep(prep)
    n = dephased.n
    prog = compile_program(b_gates, u_gates, n)
    p_minus = 1.0 - dephased.p_plus

    chunk = _chunk_size(n, plan.n_shots)
    sums: list[complex] = []
    sq_re: list[float] = []
    sq_im: list[float] = []
    done = 0
    chunk_idx = 0
    while done < plan.n_shots:
        take = min(chunk, plan.n_shots - done)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=plan.seed, spawn_key=(chunk_idx,))
        )
        words = _sample_chunk(rng, take, p_minus)
        vals = _run_program(prog, words, backend)
        sums.append(complex(np.sum(vals)))
        sq_re.append(float(np.sum(vals.real**2)))
        sq_im.append(float(np.sum(vals.imag**2)))
        done += take
        chunk_idx += 1

    total = complex(np.sum(np.array(sums)))
    mean = total / plan.n_shots
    var_re = max(0.0, float(np.sum(sq_re)) / plan.n_shots - mean.real**2)
    var_im = max(0.0, float(np.sum(sq_im)) / plan.n_shots - mean.imag**2)
    stderr_re = math.sqrt(var_re / plan.n_shots)
    stderr_im = math.sqrt(var_im / plan.n_shots)
    return EstimateResult(mean, stderr_re, stderr_im, plan.n_shots, time.perf_counter() - t0)


def exact_sum_small(
    b_gates: Sequence[LocalGate],
    u_gates: Sequence[LocalGate],
    prep: PrepState,
    backend: str | None = None,
) -> complex:
    """Full enumeration of sum_s p_s lambda_U(sigma_B(s)) for n <= 20 qubits."""
    dephased = dephase_prep(prep)
    n = dephased.n
    if n > 20:
        raise ValueError("exact_sum_small caps the data register at 20 qubits")
    prog = compile_program(b_gates, u_gates, n)

    size = 1 << n
    strings = np.arange(size, dtype=np.uint64)
    bits = np.zeros((size, n), dtype=np.uint8)
    for q in range(n):
        bits[:, q] = (strings >> np.uint64(n - 1 - q)) & np.uint64(1)
    words = _kernels.pack_bits(bits)
    vals = _run_program(prog, words, backend)

    probs = np.ones(1)
    for q in range(n):
        probs = np.kron(probs, [dephased.p_plus[q], 1.0 - dephased.p_plus[q]])
    return complex(np.dot(probs, vals))
