"""Master-equation solver: Fock tools, RK4 evolution, channel extraction."""

from __future__ import annotations

import math

import numpy as np
import pytest

from resgate import (
    CavityPrep,
    CompositeState,
    FockSpace,
    StepPolicy,
    analytic_gate_channel,
    average_gate_fidelity,
    build_hamiltonian,
    choose_n_ph,
    evolve_rk4,
    extract_channel,
    ideal_gate_unitary,
    lindblad_rhs,
    polaron_residual,
    thermal_average_channel,
    trajectory_rows,
)
from resgate.errors import DomainError

from conftest import make_params


def test_fock_operators_truncated_commutator():
    f = FockSpace(8)
    a = f.annihilation()
    comm = a @ a.conj().T - a.conj().T @ a
    # [a, a^dag] = 1 except in the guard corner
    expect = np.eye(8)
    expect[-1, -1] = -(8 - 1)
    assert np.allclose(comm, expect, atol=1e-13)
    assert np.allclose(f.number_op(), a.conj().T @ a, atol=1e-13)


def test_fock_coherent_state_statistics():
    f = FockSpace(20)
    beta = 0.9 - 0.4j
    rho = f.coherent_rho(beta)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    n_mean = np.trace(f.number_op() @ rho).real
    assert n_mean == pytest.approx(abs(beta) ** 2, rel=1e-6)
    a_mean = np.trace(f.annihilation() @ rho)
    assert a_mean == pytest.approx(beta, abs=1e-6)
    vac = f.vacuum_rho()
    assert vac[0, 0] == 1.0
    assert np.trace(vac) == 1.0


def test_step_policy_clamps():
    pol = StepPolicy(dt_ns=0.02, min_steps=200, max_steps=10000)
    steps, dt = pol.resolve(1.0)  # would be 50 raw steps
    assert steps == 200
    assert dt == pytest.approx(0.005)
    steps, dt = pol.resolve(1000.0)  # would be 50000 raw steps
    assert steps == 10000
    assert dt == pytest.approx(0.1)
    steps, dt = pol.resolve(10.0)
    assert steps == 500
    assert dt == pytest.approx(0.02)
    with pytest.raises(DomainError):
        pol.resolve(0.0)


def test_hamiltonian_structure():
    p = make_params(0.35, 1e-3, n=2)
    h = build_hamiltonian(p, n_ph=5)
    assert h.shape == (20, 20)
    assert np.allclose(h, h.conj().T, atol=1e-14)
    # the drive conserves qubit populations: H commutes with both sigma_z's
    eye_f = np.eye(5)
    z = np.diag([1.0, -1.0])
    z1 = np.kron(np.kron(z, np.eye(2)), eye_f)
    z2 = np.kron(np.kron(np.eye(2), z), eye_f)
    assert np.max(np.abs(h @ z1 - z1 @ h)) < 1e-14
    assert np.max(np.abs(h @ z2 - z2 @ h)) < 1e-14


def test_cavity_decay_rates():
    # nearly decoupled qubits: photon number decays at 2*kappa, trace stays 1
    p = make_params(1e-8, 0.0, n=2)
    kappa = 0.3
    f = FockSpace(10)
    qubit = np.zeros((4, 4), dtype=complex)
    qubit[0, 0] = 1.0
    rho0 = CompositeState.from_parts(qubit, f.coherent_rho(1.2))
    h = build_hamiltonian(p, n_ph=10)
    final, diag = evolve_rk4(rho0, h, kappa, 0.0, 0.0, 3.0)
    assert not diag.failed
    assert final.trace == pytest.approx(1.0, abs=1e-12)
    # d<n>/dt = -2 kappa <n> holds exactly, also on the truncated space;
    # start from the state's own (truncation-renormalized) photon number
    assert final.mean_photon == pytest.approx(
        rho0.mean_photon * math.exp(-2.0 * kappa * 3.0), rel=1e-8
    )


def test_qubit_dephasing_rate_convention():
    # gamma enters as gamma/2 D[sigma_z], so a coherence decays at exactly
    # gamma — the rate is 1/T2, not 2/T2
    p = make_params(1e-8, 0.0, n=2)
    h = build_hamiltonian(p, n_ph=3)
    f = FockSpace(3)
    plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    ground = np.array([[1, 0], [0, 0]], dtype=complex)
    rho0 = CompositeState.from_parts(np.kron(plus, ground), f.vacuum_rho())
    gamma_1 = 0.2
    final, diag = evolve_rk4(rho0, h, 0.0, gamma_1, 0.0, 2.0)
    coh = final.qubit_rho()[0, 2]
    assert abs(coh) == pytest.approx(0.5 * math.exp(-gamma_1 * 2.0), rel=1e-9)
    # dephasing never moves populations
    assert final.qubit_rho()[0, 0].real == pytest.approx(0.5, abs=1e-10)
    assert not diag.failed


def test_rk4_self_convergence_order():
    p = make_params(0.7, 5e-3, n=2)
    f = FockSpace(4)
    qubit = np.full((4, 4), 0.25, dtype=complex)
    rho0 = CompositeState.from_parts(qubit, f.vacuum_rho())
    h = build_hamiltonian(p, n_ph=4)

    def run(dt):
        pol = StepPolicy(dt_ns=dt, min_steps=1, max_steps=10**6)
        final, _ = evolve_rk4(rho0, h, 5e-3, 2e-3, 2e-3, 4.0, pol)
        return final.matrix

    ref = run(0.005)
    err_coarse = np.max(np.abs(run(0.08) - ref))
    err_fine = np.max(np.abs(run(0.04) - ref))
    ratio = err_coarse / err_fine
    assert 12.0 < ratio < 20.0


def test_lindblad_rhs_traceless():
    p = make_params(0.35, 1e-3, n=2)
    h = build_hamiltonian(p, n_ph=4)
    rng = np.random.default_rng(5)
    m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    d = lindblad_rhs(rho, h, 1e-3, 2e-4, 3e-4)
    assert abs(np.trace(d)) < 1e-14
    assert np.allclose(d, d.conj().T, atol=1e-13)


def test_choose_n_ph_behaviour():
    assert choose_n_ph(0.0) == 6
    assert choose_n_ph(1.0 / math.sqrt(2.0)) == 8
    assert choose_n_ph(0.05) == 6  # floor dominates for tiny amplitudes
    sizes = [choose_n_ph(a) for a in (0.3, 0.8, 1.5, 2.5)]
    assert sizes == sorted(sizes)
    assert choose_n_ph(1.5, n_ph_floor=20) == 20


def test_extract_channel_matches_analytic_sample():
    p = make_params(0.7, 5e-3, n=2)
    gamma = 1.5473e-3 * 1e9  # 1/s
    chan, diag = extract_channel(p, gamma, gamma, n_ph=7)
    assert not diag.failed
    assert diag.reconstruction_residual < 1e-6
    chan.validate()
    target = ideal_gate_unitary(math.pi / 4.0)
    f_num = average_gate_fidelity(chan, target, validate=False).f_avg
    f_ana = average_gate_fidelity(
        analytic_gate_channel(p, gamma, gamma), target
    ).f_avg
    assert abs(f_num - f_ana) < 1e-3


def test_extract_channel_flags_tight_guard():
    p = make_params(0.7, 5e-3, n=2)
    _, diag = extract_channel(p, 0.0, 0.0, n_ph=7, top_level_threshold=1e-12)
    assert diag.failed
    assert any("guard" in r or "population" in r for r in diag.failure_reasons)


def test_trajectory_rows_shape_and_content():
    p = make_params(0.7, 1e-3, n=2)
    rows = trajectory_rows(p, 0.0, 0.0, n_ph=6, stride=8)
    assert rows[0]["t_ns"] == 0.0
    assert rows[-1]["t_ns"] == pytest.approx(p.t_g_ns, rel=1e-12)
    for key in ("trace", "purity", "mean_photon", "top_level_pop", "polaron_residual"):
        assert key in rows[0]
    assert rows[0]["mean_photon"] == pytest.approx(0.0, abs=1e-14)
    assert all(r["trace"] == pytest.approx(1.0, abs=1e-9) for r in rows)
    # mid-gate the cavity is displaced, at the end it has returned
    mid = max(r["mean_photon"] for r in rows)
    assert mid > 0.1
    assert rows[-1]["mean_photon"] < 1e-3
    with pytest.raises(DomainError):
        trajectory_rows(p, 0.0, 0.0, initial_cavity=CavityPrep.thermal(0.1), n_ph=6)


def test_polaron_residual_small_on_schedule():
    p = make_params(0.7, 1.021e-3, n=2)
    ts = np.linspace(0.0, p.t_g_ns, 9)
    res = polaron_residual(p, ts, n_ph=8)
    assert res < 1e-5


def test_thermal_channel_deterministic_and_continuous():
    p = make_params(0.7, 1e-3, n=2)
    a = thermal_average_channel(p, 0.05, 3, 11, n_ph=6)[0].superop_matrix()
    b = thermal_average_channel(p, 0.05, 3, 11, n_ph=6)[0].superop_matrix()
    assert np.array_equal(a, b)
    c = thermal_average_channel(p, 0.05, 3, 12, n_ph=6)[0].superop_matrix()
    assert not np.array_equal(a, c)  # the seed really enters
    # n_bar = 0 short-circuits to the vacuum extraction, bit for bit
    vac = extract_channel(p, 0.0, 0.0, n_ph=6)[0].superop_matrix()
    zero = thermal_average_channel(p, 0.0, 3, 11, n_ph=6)[0].superop_matrix()
    assert np.array_equal(vac, zero)


def test_composite_state_partial_traces():
    f = FockSpace(5)
    qubit = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    cav = f.coherent_rho(0.6)
    st = CompositeState.from_parts(qubit, cav)
    assert np.allclose(st.qubit_rho(), qubit, atol=1e-14)
    assert np.allclose(st.cavity_rho(), cav, atol=1e-14)
    assert st.mean_photon == pytest.approx(np.trace(f.number_op() @ cav).real, abs=1e-13)
    assert st.purity == pytest.approx(
        float(np.trace(qubit @ qubit).real * np.trace(cav @ cav).real), rel=1e-12
    )


def test_cavity_prep_validation():
    with pytest.raises(DomainError):
        CavityPrep.thermal(-0.1)
    with pytest.raises(DomainError):
        CavityPrep(kind="squeezed")
    with pytest.raises(DomainError):
        CavityPrep.thermal(0.1, samples=0)
