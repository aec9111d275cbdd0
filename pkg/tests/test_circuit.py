"""Domain types: sign strings, masks, channels, gate actions, validation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

import hadbias as hb
from hadbias import gates as g
from hadbias.circuit import (
    CtrlZ,
    GateInstance,
    LocalGate,
    NoiseChannel,
    XDiag,
    XMask,
    sample_noise,
)

from helpers import random_biasperm, random_channel


# ---------------------------------------------------------------------------
# sign strings


@given(st.integers(min_value=1, max_value=3), st.data())
def test_sign_index_round_trip(k, data):
    idx = data.draw(st.integers(min_value=0, max_value=2**k - 1))
    s = hb.index_signs(idx, k)
    assert len(s) == k
    assert hb.sign_index(s) == idx


def test_sign_index_order_is_lexicographic():
    assert hb.all_sign_strings(2) == ["++", "+-", "-+", "--"]
    assert hb.sign_index("++") == 0
    assert hb.sign_index("--") == 3


def test_sign_index_rejects_other_chars():
    with pytest.raises(ValueError):
        hb.sign_index("+0")


# ---------------------------------------------------------------------------
# masks form a Z2 group under composition

subsets = st.frozensets(st.integers(min_value=0, max_value=5), max_size=4)


@given(subsets, subsets, subsets)
def test_xmask_group_properties(a, b, c):
    ma, mb, mc = XMask(a), XMask(b), XMask(c)
    assert (ma ^ mb) ^ mc == ma ^ (mb ^ mc)
    assert ma ^ mb == mb ^ ma
    assert ma ^ ma == XMask.empty()
    assert ma ^ XMask.empty() == ma


# ---------------------------------------------------------------------------
# noise channels


def test_channel_normalization_violation():
    ch = NoiseChannel.from_terms([((), 0.6), ((0,), 0.5)])
    assert "noise not normalized" in ch.violations((0,))


def test_channel_mask_outside_support():
    ch = NoiseChannel.from_terms([((), 0.5), ((2,), 0.5)])
    assert any("outside" in v for v in ch.violations((0, 1)))


def test_independent_flips_marginals():
    ch = NoiseChannel.independent_flips((0, 1), 0.2)
    assert abs(ch.total_probability() - 1.0) < 1e-12
    assert abs(ch.marginal_flip_probability(0) - 0.2) < 1e-12
    assert abs(ch.marginal_flip_probability(1) - 0.2) < 1e-12


def test_sample_noise_trivial_and_correlated():
    rng = np.random.default_rng(0)
    assert sample_noise(NoiseChannel.trivial(), rng) == XMask.empty()
    pair = NoiseChannel.from_terms([((0, 1), 1.0)])
    assert sample_noise(pair, rng) == XMask.of(0, 1)


def test_sample_noise_frequency():
    ch = NoiseChannel.from_terms([((), 0.9), ((0,), 0.1)])
    rng = np.random.default_rng(42)
    hits = sum(bool(sample_noise(ch, rng).qubits) for _ in range(100_000))
    assert abs(hits / 100_000 - 0.1) < 0.01


# ---------------------------------------------------------------------------
# gate actions in the X basis


def test_act_identity():
    s, phase = hb.act_bias_gate(hb.identity_gate(0, 1), "+-")
    assert (s, phase) == ("+-", 0.0)


def _dense_permutation(m):
    """Independent extraction of the X-basis permutation from a dense matrix."""
    k = int(np.log2(m.shape[0]))
    hk = g.hadamard_layer(k)
    d = hk @ m @ hk
    perm = {}
    for col in range(2**k):
        row = int(np.argmax(np.abs(d[:, col])))
        assert abs(abs(d[row, col]) - 1) < 1e-9
        perm[col] = (row, float(np.angle(d[row, col])))
    return perm


@pytest.mark.parametrize(
    "gate,matrix",
    [
        (hb.cnot(0, 1), g.CNOT),
        (hb.cxx(0, 1), g.CXX),
        (hb.toffoli_prime(0, 1, 2), g.TOFFOLI_PRIME),
    ],
)
def test_named_gate_tables_match_dense_conjugation(gate, matrix):
    k = gate.arity
    oracle = _dense_permutation(matrix)
    for idx in range(2**k):
        s = hb.index_signs(idx, k)
        out, phase = hb.act_bias_gate(gate, s)
        row, expected_phase = oracle[idx]
        assert hb.sign_index(out) == row
        assert np.isclose(np.exp(1j * phase), np.exp(1j * expected_phase), atol=1e-9)


def test_cnot_expected_table():
    table = {s: hb.act_bias_gate(hb.cnot(0, 1), s)[0] for s in hb.all_sign_strings(2)}
    # in the X basis the roles swap: the control flips when the target is '-'
    assert table == {"++": "++", "+-": "--", "-+": "-+", "--": "+-"}


def test_cxx_is_diagonal_with_sign():
    for s in hb.all_sign_strings(2):
        out, phase = hb.act_bias_gate(hb.cxx(0, 1), s)
        assert out == s
    assert hb.act_bias_gate(hb.cxx(0, 1), "-+") == ("-+", 0.0)
    _, phase = hb.act_bias_gate(hb.cxx(0, 1), "--")
    assert np.isclose(np.exp(1j * phase), -1.0)


def test_act_bias_gate_bijection_for_all_kinds():
    rng = np.random.default_rng(7)
    gates = [
        hb.cnot(0, 1),
        hb.toffoli_prime(0, 1, 2),
        hb.cxx(0, 1),
        random_biasperm(rng, (0, 1, 2)),
        hb.ctrl_x_gate(0, (1,), np.exp(1j * rng.uniform(-1, 1, 2))),
        hb.ctrl_z_gate(0, (1,), [1.0, -1.0]),
        hb.identity_gate(2),
    ]
    for gate in gates:
        k = gate.arity
        images = {hb.act_bias_gate(gate, s)[0] for s in hb.all_sign_strings(k)}
        assert len(images) == 2**k


def test_act_bias_gate_rejects_xdiag():
    with pytest.raises(ValueError):
        hb.act_bias_gate(hb.xrot_gate(0, 0.3), "+")


def test_ctrl_z_action_flips_control():
    gate = hb.ctrl_z_gate(0, (1,), [1.0, -1.0])
    assert hb.act_bias_gate(gate, "++") == ("++", 0.0)
    out, phase = hb.act_bias_gate(gate, "+-")  # payload eigenvalue -1
    assert out == "--" and phase == 0.0


def test_eigenvalue_xdiag():
    theta = np.pi / 3
    gate = hb.xrot_gate(0, theta)
    assert np.isclose(hb.eigenvalue_xdiag(gate, "+"), np.exp(1j * theta))
    assert np.isclose(hb.eigenvalue_xdiag(gate, "-"), np.exp(-1j * theta))
    ident = hb.xdiag_gate((0,), [1, 1])
    assert hb.eigenvalue_xdiag(ident, "-") == 1
    xgate = hb.xdiag_gate((0,), [1, -1])
    assert hb.eigenvalue_xdiag(xgate, "+") == 1
    assert hb.eigenvalue_xdiag(xgate, "-") == -1
    with pytest.raises(ValueError):
        hb.eigenvalue_xdiag(hb.cnot(0, 1), "++")


def test_biasperm_conjugation_stays_xtype():
    # mirror of the bias-preserving definition: g X_a g+ is X-basis diagonal
    from hadbias.biascheck import propagate_error

    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(1, 4))
        gate = random_biasperm(rng, tuple(range(k)))
        for bits in range(1, 2**k):
            mask = tuple(j for j in range(k) if (bits >> j) & 1)
            assert propagate_error(gate, mask).x_type


# ---------------------------------------------------------------------------
# validation


def _simple_circuit(gatelist):
    return hb.Circuit(
        hb.RegisterLayout(parallel=0, data=1),
        hb.PrepState.zeros(2),
        gatelist,
        hb.MeasurementSpec(0, "Z"),
    )


def test_validate_ctrlz_hermiticity_violation():
    bad = LocalGate((0, 1), CtrlZ(XDiag(np.array([1j, -1j]))))
    report = hb.validate_circuit(_simple_circuit((GateInstance(bad),)))
    assert any("CtrlZ payload not Hermitian" in v for v in report.violations)


def test_validate_noise_normalization_violation():
    inst = GateInstance(
        hb.cnot(0, 1), NoiseChannel.from_terms([((), 0.6), ((0,), 0.5)])
    )
    report = hb.validate_circuit(_simple_circuit((inst,)))
    assert any("noise not normalized" in v for v in report.violations)


def test_validate_well_formed_circuit_is_clean():
    inst = GateInstance(hb.cnot(0, 1), NoiseChannel.independent_flips((0, 1), 0.1))
    report = hb.validate_circuit(_simple_circuit((inst,)))
    assert report.ok and report.violations == []


def test_validate_support_overflow():
    inst = GateInstance(hb.cnot(0, 5))
    report = hb.validate_circuit(_simple_circuit((inst,)))
    assert any("support overflow" in v for v in report.violations)


def test_factories_reject_bad_input():
    with pytest.raises(ValueError):
        hb.xdiag_gate((0,), [1.0, 0.5])  # not unit modulus
    with pytest.raises(ValueError):
        hb.ctrl_z_gate(0, (1,), [1j, -1j])  # not Hermitian
    with pytest.raises(ValueError):
        hb.bias_perm_gate((0,), [0, 0], [0.0, 0.0])  # not a bijection
    with pytest.raises(ValueError):
        hb.named_gate("cnot", (0, 1, 2))  # arity mismatch
    with pytest.raises(ValueError):
        hb.named_gate("hadamard", (0,))  # not a named gate


def test_random_channel_marginals():
    rng = np.random.default_rng(5)
    ch = random_channel(rng, (0, 1, 2), 0.25, pivot=0)
    assert abs(ch.total_probability() - 1.0) < 1e-12
    assert abs(ch.marginal_flip_probability(0) - 0.25) < 1e-12
