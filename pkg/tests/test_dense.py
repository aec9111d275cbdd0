"""Dense oracle: pure/density evolution, partial trace, overlap, form fitting."""

import numpy as np
import pytest

import hadbias as hb
from hadbias import gates as g
from hadbias.circuit import GateInstance, NoiseChannel
from hadbias.dense import (
    apply_bitflip_dm,
    bloch_components,
    circuit_operator,
    density_from_bloch,
    evolve_density,
    evolve_pure,
    exact_overlap,
    fit_reduced_form,
    prep_statevector,
    reduce_qubit,
    trace_distance,
)

from helpers import random_bias_gate, random_prep, random_xdiag


def _circuit(layout, prep, instances, basis="Z", flip=0.0):
    return hb.Circuit(layout, prep, tuple(instances), hb.MeasurementSpec(0, basis, flip))


def test_evolve_pure_x_flip():
    c = _circuit(
        hb.RegisterLayout(parallel=0, data=1, measured=1),
        hb.PrepState.zeros(2),
        [GateInstance(hb.xdiag_gate((1,), [1, -1]))],
    )
    psi = evolve_pure(c)
    assert np.allclose(psi, [0, 1, 0, 0])


def test_evolve_pure_bell():
    c = _circuit(
        hb.RegisterLayout(parallel=0, data=1),
        hb.PrepState(((np.pi / 2, 0.0), (0.0, 0.0))),
        [GateInstance(hb.cnot(0, 1))],
    )
    psi = evolve_pure(c)
    assert np.allclose(psi, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_evolve_pure_hadamard_test_bloch():
    theta = np.pi / 3
    spec = hb.HadamardTestSpec(
        n=2, prep=hb.PrepState.zeros(2), v_gates=[hb.xrot_gate(0, theta)]
    )
    c, _ = hb.build(spec)
    psi = evolve_pure(c)
    rho = np.outer(psi, psi.conj())
    _, y, z = bloch_components(reduce_qubit(rho, 0))
    assert abs(z - np.cos(theta)) < 1e-12
    assert abs(y) < 1e-12


def test_evolve_density_kraus_sum():
    c = _circuit(
        hb.RegisterLayout(parallel=0, data=1),
        hb.PrepState.zeros(2),
        [
            GateInstance(
                hb.identity_gate(0),
                NoiseChannel.from_terms([((), 0.9), ((0,), 0.1)]),
            )
        ],
    )
    rho = evolve_density(c)
    red = reduce_qubit(rho, 0)
    assert np.allclose(red, np.diag([0.9, 0.1]))


def test_evolve_density_matches_pure_when_noiseless():
    rng = np.random.default_rng(8)
    spec = hb.HadamardTestSpec(
        n=3,
        prep=random_prep(rng, 3),
        b_gates=[random_bias_gate(rng, 3) for _ in range(3)],
        v_gates=[random_xdiag(rng, (0, 2))],
    )
    c, _ = hb.build(spec)
    psi = evolve_pure(c)
    rho = evolve_density(c, check_state=True)
    assert np.max(np.abs(rho - np.outer(psi, psi.conj()))) < 1e-12


def test_single_cx_gate_noise_gives_attenuation_factor():
    spec = hb.HadamardTestSpec(
        n=1,
        prep=hb.PrepState.zeros(1),
        v_gates=[hb.xrot_gate(0, np.pi / 3)],
        noise=hb.NoiseAssignment(p_v=0.1),
    )
    c, _ = hb.build(spec)
    red = reduce_qubit(evolve_density(c), 0)
    y, z = hb.overlap_to_yz(exact_overlap(hb.PrepState.zeros(1), [], [hb.xrot_gate(0, np.pi / 3)]))
    target = density_from_bloch(0.0, 0.8 * y, 0.8 * z)
    assert trace_distance(red, target) < 1e-12


def test_reduce_qubit_bell_and_product():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    assert np.allclose(reduce_qubit(rho, 0), np.eye(2) / 2)
    assert np.allclose(reduce_qubit(rho, 1), np.eye(2) / 2)

    a = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]])
    b = np.array([[0.4, 0.0], [0.0, 0.6]])
    assert np.allclose(reduce_qubit(np.kron(a, b), 0), a)
    assert np.allclose(reduce_qubit(np.kron(a, b), 1), b)


def test_exact_overlap_examples():
    zero = hb.PrepState.zeros(1)
    assert abs(exact_overlap(zero, [], [hb.xdiag_gate((0,), [1, -1])])) < 1e-12

    theta = np.pi / 3
    ov = exact_overlap(zero, [], [hb.xrot_gate(0, theta)])
    assert abs(abs(ov) - 0.5) < 1e-12
    assert abs(ov - np.cos(theta)) < 1e-12

    for n in (2, 4):
        prep = hb.PrepState(((np.pi / 2, 0.0),) + ((0.0, 0.0),) * (n - 1))
        b_gates = [hb.cnot(0, i) for i in range(1, n)]
        u_gates = [hb.xdiag_gate((i,), [1, -1]) for i in range(n)]
        assert abs(exact_overlap(prep, b_gates, u_gates) - 1.0) < 1e-10


def test_fit_reduced_form_examples():
    r = density_from_bloch(0.0, 0.8 * 0.6, 0.8 * 0.8)
    fit = fit_reduced_form(r, 0.6, 0.8)
    assert abs(fit.alpha - 0.8) < 1e-12 and fit.residual < 1e-12

    fit0 = fit_reduced_form(np.eye(2, dtype=complex) / 2, 0.6, 0.8)
    assert abs(fit0.alpha) < 1e-12 and fit0.residual < 1e-12

    r_x = density_from_bloch(0.1, 0.8 * 0.6, 0.8 * 0.8)
    fit_x = fit_reduced_form(r_x, 0.6, 0.8)
    assert abs(fit_x.alpha - 0.8) < 1e-12
    assert abs(fit_x.residual - 0.1 * np.sqrt(2) / 2) < 1e-12

    with pytest.raises(ValueError):
        fit_reduced_form(np.eye(2, dtype=complex) / 2, 0.0, 0.0)


def test_measurement_flip_channel_helper():
    rho = density_from_bloch(0.0, 0.2, 0.6)
    flipped = apply_bitflip_dm(rho, 0, 0.1, 1)
    _, y, z = bloch_components(flipped)
    assert abs(y - 0.8 * 0.2) < 1e-12 and abs(z - 0.8 * 0.6) < 1e-12


def test_dephased_product_trace_equals_theorem2_sum():
    # Tr(B+ U B rho_1 x ... x rho_n) over dephased inputs reproduces the
    # sign-string sum, n <= 6, because B+UB is X-basis diagonal
    rng = np.random.default_rng(21)
    for _ in range(5):
        n = int(rng.integers(2, 5))
        prep = random_prep(rng, n)
        b_gates = [random_bias_gate(rng, n) for _ in range(3)]
        u_gates = [random_xdiag(rng, (int(q),)) for q in rng.choice(n, 2, replace=False)]

        bu = circuit_operator(b_gates, n)
        uu = circuit_operator(u_gates, n)
        op = bu.conj().T @ uu @ bu
        dephased = hb.dephase_prep(prep)
        rho = np.ones((1, 1), dtype=complex)
        plus = np.array([[0.5, 0.5], [0.5, 0.5]])
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        for i in range(n):
            rho = np.kron(rho, dephased.p_plus[i] * plus + (1 - dephased.p_plus[i]) * minus)
        lhs = complex(np.trace(op @ rho))
        rhs = hb.exact_sum_small(b_gates, u_gates, prep)
        assert abs(lhs - rhs) < 1e-10


def test_prep_statevector_plus_state():
    psi = prep_statevector(hb.PrepState.plus_states(2))
    assert np.allclose(psi, np.full(4, 0.5))


def test_size_caps():
    big = hb.PrepState.zeros(25)
    with pytest.raises(ValueError):
        prep_statevector(big)
    c = _circuit(
        hb.RegisterLayout(parallel=0, data=10),
        hb.PrepState.zeros(11),
        [],
    )
    with pytest.raises(ValueError):
        evolve_density(c)
