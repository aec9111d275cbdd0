"""Closed-form noise bookkeeping: attenuation, sample counts, overhead schedules.

The attenuation alpha of a noise-resilient Hadamard test multiplies one
factor (1 - 2 p_i) per noisy location on the measured register: state
preparation, measurement, every controlled gate whose control sits there,
and explicit identity (waiting) gates.  p_i for a multi-qubit gate is the
total probability of the noise masks that contain the measured qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, CtrlX, GateInstance, Named

_MEASURED = 0


@dataclass
class AttenuationReport:
    alpha: float
    factors: list[tuple[str, float, float]]  # (location label, p_i, 1 - 2 p_i)
    n_noisy: int  # noisy measured-register locations, prep/meas included
    n_identity: int  # noisy identity locations on the measured register

    def factor_product(self) -> float:
        out = 1.0
        for _, _, f in self.factors:
            out *= f
        return out


def _measured_gate_label(i: int, inst: GateInstance) -> str:
    kind = inst.gate.kind
    if isinstance(kind, Named):
        return f"gate {i} ({kind.name})"
    return f"gate {i} (ctrl_x)"


def attenuation(c: Circuit) -> AttenuationReport:
    """alpha = (1-2 p_prep)(1-2 p_meas) * prod over measured-register locations.

    Requires the circuit to have Theorem-1 shape on the measured register:
    only c_X-controlled gates (CtrlX kind or the named cxx) with the
    measured qubit as control, and identity gates, may touch it.  Raises
    when any relevant p_i reaches 1/2.
    """
    factors: list[tuple[str, float, float]] = []
    n_noisy = 0
    n_identity = 0

    def add(label: str, p: float, noisy_counts: bool) -> None:
        nonlocal n_noisy, n_identity
        if p >= 0.5:
            raise ValueError(f"{label}: bit-flip probability {p} >= 1/2")
        factors.append((label, p, 1.0 - 2.0 * p))
        if p > 0.0:
            if noisy_counts:
                n_noisy += 1
            else:
                n_identity += 1

    add("prep", c.prep.flip, True)
    for i, inst in enumerate(c.gatelist):
        if _MEASURED not in inst.gate.support:
            continue
        kind = inst.gate.kind
        is_identity = isinstance(kind, Named) and kind.name == "identity"
        is_cx = isinstance(kind, CtrlX) or (
            isinstance(kind, Named) and kind.name == "cxx"
        )
        if is_cx and inst.gate.support[0] != _MEASURED:
            raise ValueError(
                f"gate {i}: not Theorem-1 shaped (measured register must be the control)"
            )
        if not (is_identity or is_cx):
            raise ValueError(
                f"gate {i}: not Theorem-1 shaped (kind {type(kind).__name__} "
                "may not touch the measured register)"
            )
        p_i = inst.noise.marginal_flip_probability(_MEASURED)
        if is_identity:
            add(f"gate {i} (identity)", p_i, False)
        else:
            add(_measured_gate_label(i, inst), p_i, True)
    add("measurement", c.measure.flip, True)

    alpha = 1.0
    for _, _, f in factors:
        alpha *= f
    return AttenuationReport(alpha, factors, n_noisy, n_identity)


def sample_complexity(eps: float, delta: float, alpha: float = 1.0) -> int:
    """ceil(2 ln(2/delta) / (alpha*eps)^2), the attenuated Hoeffding count."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return max(1, math.ceil(2.0 * math.log(2.0 / delta) / (alpha * eps) ** 2))


# ---------------------------------------------------------------------------
# scale-dependent overhead schedules


@dataclass(frozen=True)
class ConstantP:
    p: float

    def __call__(self, n: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(n, dtype=float), self.p)

    def label(self) -> str:
        return f"p={self.p}"


@dataclass(frozen=True)
class DeltaPower:
    """p_n = (1 - Delta_n)/2 with Delta_n = A / n^k."""

    a: float
    k: float

    def __call__(self, n: np.ndarray) -> np.ndarray:
        delta_n = self.a / np.asarray(n, dtype=float) ** self.k
        return (1.0 - delta_n) / 2.0

    def label(self) -> str:
        return f"Delta={self.a}/n^{self.k}"


@dataclass(frozen=True)
class SqrtLogDelta:
    """p_n = (1 - Delta_n)/2 with Delta_n = exp(-sqrt(log n))."""

    def __call__(self, n: np.ndarray) -> np.ndarray:
        delta_n = np.exp(-np.sqrt(np.log(np.asarray(n, dtype=float))))
        return (1.0 - delta_n) / 2.0

    def label(self) -> str:
        return "Delta=exp(-sqrt(log n))"


@dataclass(frozen=True)
class ConstantNV:
    value: int

    def __call__(self, n: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(n, dtype=float), float(self.value))

    def label(self) -> str:
        return f"N_V={self.value}"


@dataclass(frozen=True)
class SqrtLogNV:
    """N_V = sqrt(log n), the schedule that pairs with SqrtLogDelta."""

    def __call__(self, n: np.ndarray) -> np.ndarray:
        return np.sqrt(np.log(np.asarray(n, dtype=float)))

    def label(self) -> str:
        return "N_V=sqrt(log n)"


@dataclass
class OverheadSchedule:
    n: np.ndarray
    p_n: np.ndarray
    n_v: np.ndarray
    alpha: np.ndarray
    c_n: np.ndarray
    slope: float
    extra_locations: int


def overhead_schedule(
    pn_rule,
    nv_rule,
    n_list: Sequence[int],
    eps: float,
    delta: float,
    extra_locations: int = 4,
) -> OverheadSchedule:
    """Repetition counts C_n = ceil(2 ln(2/delta)/(alpha_n eps)^2) along a schedule.

    alpha_n = (1 - 2 p_n)^(N_V(n) + extra_locations); the default 4 extra
    locations are prep, measurement and the two c_X X gates of the
    parallelisation register.  The growth exponent is the least-squares
    slope of log C_n against log n over the upper half of the n range.
    """
    ns = np.asarray(sorted(n_list), dtype=float)
    if len(ns) < 2:
        raise ValueError("need at least two n values")
    p_n = pn_rule(ns)
    if np.any(p_n >= 0.5) or np.any(p_n < 0.0):
        raise ValueError("schedule produces p_n outside [0, 1/2)")
    n_v = nv_rule(ns)
    alpha = (1.0 - 2.0 * p_n) ** (n_v + extra_locations)
    c_n = np.ceil(2.0 * np.log(2.0 / delta) / (alpha * eps) ** 2)
    half = len(ns) // 2
    slope = float(np.polyfit(np.log(ns[half:]), np.log(c_n[half:]), 1)[0])
    return OverheadSchedule(ns, p_n, n_v, alpha, c_n, slope, extra_locations)


# ---------------------------------------------------------------------------
# noisy direct measurement of X^(x)n


@dataclass
class MeasurementScalingReport:
    n: int
    p_meas: float
    gap: float
    p_correct: float


def direct_measure_scaling(n: int, p_meas: float) -> MeasurementScalingReport:
    """p_correct = (1 + (1-2p)^n)/2: an even number of single-qubit flips."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p_meas < 0.5:
        raise ValueError("p_meas must be in [0, 1/2)")
    gap = (1.0 - 2.0 * p_meas) ** n
    return MeasurementScalingReport(n, p_meas, gap, 0.5 * (1.0 + gap))


def direct_measure_brute_force(n: int, p_meas: float) -> float:
    """Binomial-sum oracle for p_correct, usable for n <= 20."""
    if n > 20:
        raise ValueError("brute-force oracle capped at n = 20")
    return float(
        sum(
            math.comb(n, i) * p_meas**i * (1.0 - p_meas) ** (n - i)
            for i in range(0, n + 1, 2)
        )
    )
