"""Numeric master-equation oracle for the resonator-mediated gate.

Integrates the full (two qubits) x (truncated Fock space) density matrix

    drho/dt = -i [H, rho] + 2 kappa D[a] rho
              + (gamma_1/2) D[Z1] rho + (gamma_2/2) D[Z2] rho,
    H = Delta a^dag a + (g1/2)(a + a^dag) Z1 + (g2/2)(a + a^dag) Z2,

with D[c] rho = c rho c^dag - {c^dag c, rho}/2, using fixed-step classical
RK4 with re-Hermitization after every step. The Hamiltonian is written in
the frame rotating at the drive frequency, so nothing oscillates faster
than Delta and the default 20 ps step resolves everything comfortably.
With the (gamma/2) D[Z] convention a single-qubit coherence decays at
exactly gamma (the 1/T2 rate).

Unit boundaries: the high-level entry points (build_hamiltonian,
extract_channel, polaron_residual, thermal_average_channel) take SI-valued
DerivedGateParams and dephasing rates in 1/s; the low-level pieces
(lindblad_rhs, evolve_rk4) work in the internal system rad/ns, 1/ns, ns.

Basis ordering is qubit_1 (x) qubit_2 (x) Fock, i.e. the Fock index runs
fastest. The effective two-qubit channel is reconstructed tomographically:
evolve the 16 products of {|0>, |1>, |+>, |+i>}, trace out the cavity, and
solve the 16x16 linear system; a 17th probe state measures how linear the
truncated evolution actually was.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .channel import TwoQubitChannel, drive_frame_displacement, ideal_gate_unitary
from .device import DerivedGateParams
from .errors import DomainError
from .fidelity import PRODUCT_STATES, fit_local_z

DEFAULT_N_PH = 6  # levels 0..5: one guard level above the 4-photon working range
DEFAULT_TOP_LEVEL_THRESHOLD = 1e-4
DEFAULT_TRACE_DRIFT_TOL = 1e-6
RECONSTRUCTION_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class FockSpace:
    """Truncated oscillator space with levels 0..n_levels-1."""

    n_levels: int

    def __post_init__(self):
        if not (isinstance(self.n_levels, int) and self.n_levels >= 2):
            raise DomainError(f"need at least 2 Fock levels, got {self.n_levels!r}")

    def annihilation(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.n_levels, dtype=float)), k=1).astype(complex)

    def number_op(self) -> np.ndarray:
        return np.diag(np.arange(self.n_levels, dtype=float)).astype(complex)

    def vacuum_rho(self) -> np.ndarray:
        rho = np.zeros((self.n_levels, self.n_levels), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def coherent_rho(self, beta: complex) -> np.ndarray:
        """|beta><beta| truncated to the space and renormalized."""
        n = np.arange(self.n_levels)
        log_fact = np.cumsum(np.log(np.maximum(n, 1)))
        amps = np.exp(-0.5 * abs(beta) ** 2 + n * np.log(complex(beta)) - 0.5 * log_fact) \
            if beta != 0 else np.eye(self.n_levels, 1, dtype=complex).ravel()
        amps = np.asarray(amps, dtype=complex)
        amps /= math.sqrt(float(np.vdot(amps, amps).real))
        return np.outer(amps, amps.conj())


@dataclass(frozen=True)
class StepPolicy:
    """Fixed-step rule: dt_ns unless that lands outside [min_steps, max_steps]."""

    dt_ns: float = 0.020
    min_steps: int = 200
    max_steps: int = 10000

    def resolve(self, t_total_ns: float) -> tuple[int, float]:
        """(step count, actual dt) for a run of t_total_ns."""
        if t_total_ns <= 0:
            raise DomainError(f"total time must be positive, got {t_total_ns}")
        steps = int(round(t_total_ns / self.dt_ns))
        steps = min(max(steps, self.min_steps), self.max_steps)
        return steps, t_total_ns / steps


@dataclass(frozen=True)
class SimDiagnostics:
    """Run health: populations, trace behavior, and failure flags."""

    max_top_level_pop: float
    trace_drift: float
    steps: int
    dt_ns: float
    final_polaron_residual: float | None = None
    reconstruction_residual: float | None = None
    top_level_threshold: float = DEFAULT_TOP_LEVEL_THRESHOLD
    failed: bool = False
    failure_reasons: tuple[str, ...] = ()

    def merged_with(self, other: "SimDiagnostics") -> "SimDiagnostics":
        """Worst-case combination (used when aggregating Monte-Carlo samples)."""
        def _opt_max(a, b):
            if a is None:
                return b
            if b is None:
                return a
            return max(a, b)
        return SimDiagnostics(
            max_top_level_pop=max(self.max_top_level_pop, other.max_top_level_pop),
            trace_drift=max(self.trace_drift, other.trace_drift),
            steps=max(self.steps, other.steps),
            dt_ns=max(self.dt_ns, other.dt_ns),
            final_polaron_residual=_opt_max(
                self.final_polaron_residual, other.final_polaron_residual
            ),
            reconstruction_residual=_opt_max(
                self.reconstruction_residual, other.reconstruction_residual
            ),
            top_level_threshold=min(self.top_level_threshold, other.top_level_threshold),
            failed=self.failed or other.failed,
            failure_reasons=self.failure_reasons + other.failure_reasons,
        )

    def to_json_dict(self) -> dict:
        return {
            "max_top_level_pop": self.max_top_level_pop,
            "trace_drift": self.trace_drift,
            "steps": self.steps,
            "dt_ns": self.dt_ns,
            "final_polaron_residual": self.final_polaron_residual,
            "reconstruction_residual": self.reconstruction_residual,
            "top_level_threshold": self.top_level_threshold,
            "failed": self.failed,
            "failure_reasons": list(self.failure_reasons),
        }


@dataclass(frozen=True)
class CompositeState:
    """Density matrix on qubit_1 (x) qubit_2 (x) Fock (Fock index fastest)."""

    matrix: np.ndarray
    n_ph: int

    def __post_init__(self):
        d = 4 * self.n_ph
        if np.asarray(self.matrix).shape != (d, d):
            raise DomainError(
                f"state shape {np.asarray(self.matrix).shape} does not match 4*{self.n_ph}"
            )

    @classmethod
    def from_parts(cls, qubit_rho: np.ndarray, cavity_rho: np.ndarray) -> "CompositeState":
        cavity_rho = np.asarray(cavity_rho, dtype=complex)
        return cls(
            matrix=np.kron(np.asarray(qubit_rho, dtype=complex), cavity_rho),
            n_ph=cavity_rho.shape[0],
        )

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    @property
    def mean_photon(self) -> float:
        diag = np.einsum("ii->i", self.matrix).real.reshape(4, self.n_ph)
        return float((diag * np.arange(self.n_ph)).sum())

    @property
    def top_level_pop(self) -> float:
        diag = np.einsum("ii->i", self.matrix).real.reshape(4, self.n_ph)
        return float(diag[:, -1].sum())

    def qubit_rho(self) -> np.ndarray:
        r = self.matrix.reshape(4, self.n_ph, 4, self.n_ph)
        return np.einsum("ikjk->ij", r)

    def cavity_rho(self) -> np.ndarray:
        r = self.matrix.reshape(4, self.n_ph, 4, self.n_ph)
        return np.einsum("inim->nm", r)

    def validate(
        self, herm_tol: float = 1e-10, trace_tol: float = 1e-8, eig_tol: float = 1e-7
    ) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise DomainError("composite state is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > trace_tol:
            raise DomainError("composite state trace differs from 1 beyond tolerance")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] < -eig_tol:
            raise DomainError("composite state has a negative eigenvalue beyond tolerance")


def _full_ops(n_ph: int) -> dict:
    """Operators lifted to the composite space (qubit_1 x qubit_2 x Fock)."""
    fock = FockSpace(n_ph)
    a = fock.annihilation()
    i_f = np.eye(n_ph, dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    i2 = np.eye(2, dtype=complex)
    return {
        "a": np.kron(np.eye(4, dtype=complex), a),
        "n": np.kron(np.eye(4, dtype=complex), a.conj().T @ a),
        "x_f": np.kron(np.eye(4, dtype=complex), a + a.conj().T),
        "z1": np.kron(np.kron(z, i2), i_f),
        "z2": np.kron(np.kron(i2, z), i_f),
    }


def build_hamiltonian(params: DerivedGateParams, n_ph: int = DEFAULT_N_PH) -> np.ndarray:
    """Drive-frame Hamiltonian in rad/ns on the composite space.

    H = Delta a^dag a + (g1/2)(a + a^dag) Z1 + (g2/2)(a + a^dag) Z2.
    Commutes with Z1 and Z2 (the gate is diagonal in the qubit basis);
    Hermitian by construction.
    """
    ops = _full_ops(n_ph)
    return (
        params.delta_rad_ns * ops["n"]
        + 0.5 * params.g1_rad_ns * ops["x_f"] @ ops["z1"]
        + 0.5 * params.g2_rad_ns * ops["x_f"] @ ops["z2"]
    )


def lindblad_rhs(
    rho: np.ndarray, h: np.ndarray, kappa: float, gamma_1: float, gamma_2: float
) -> np.ndarray:
    """Master-equation right-hand side (internal units: rad/ns, 1/ns).

    Works on a single (D, D) matrix or a batch (B, D, D). The derivative is
    exactly traceless: photon loss enters as 2*kappa D[a], qubit dephasing as
    (gamma/2) D[Z] so coherences decay at gamma itself.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[-1]
    ops = _full_ops(d // 4)
    return _rhs(rho, h, ops, kappa, gamma_1, gamma_2)


def _rhs(rho, h, ops, kappa, gamma_1, gamma_2):
    out = -1j * (h @ rho - rho @ h)
    if kappa != 0.0:
        a, ad_a = ops["a"], ops["n"]
        out += 2.0 * kappa * (
            a @ rho @ a.conj().T - 0.5 * (ad_a @ rho + rho @ ad_a)
        )
    if gamma_1 != 0.0:
        z1 = ops["z1"]
        out += 0.5 * gamma_1 * (z1 @ rho @ z1 - rho)
    if gamma_2 != 0.0:
        z2 = ops["z2"]
        out += 0.5 * gamma_2 * (z2 @ rho @ z2 - rho)
    return out


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def _evolve_batch(
    rhos: np.ndarray,
    h: np.ndarray,
    kappa: float,
    gamma_1: float,
    gamma_2: float,
    t_total_ns: float,
    policy: StepPolicy,
    *,
    top_level_threshold: float = DEFAULT_TOP_LEVEL_THRESHOLD,
    trace_drift_tol: float = DEFAULT_TRACE_DRIFT_TOL,
    record: Callable[[int, float, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, SimDiagnostics]:
    """RK4-evolve a (B, D, D) batch; returns (final batch, diagnostics).

    Diagnostics track the worst state in the batch. Trace drift is measured
    against each state's initial trace (photon loss is trace-preserving in
    the Lindblad form, so drift is pure integrator error).
    """
    rhos = np.array(rhos, dtype=complex)
    if rhos.ndim == 2:
        rhos = rhos[None]
    b, d, _ = rhos.shape
    n_ph = d // 4
    ops = _full_ops(n_ph)
    steps, dt = policy.resolve(t_total_ns)

    init_traces = np.einsum("bii->b", rhos).real.copy()
    max_top = 0.0
    max_drift = 0.0

    def _scan(r, step_idx, t_now):
        nonlocal max_top, max_drift
        diag = np.einsum("bii->bi", r).real
        top = float(diag.reshape(b, 4, n_ph)[:, :, -1].sum(axis=1).max())
        drift = float(np.abs(diag.sum(axis=1) - init_traces).max())
        max_top = max(max_top, top)
        max_drift = max(max_drift, drift)
        if record is not None:
            record(step_idx, t_now, r)

    _scan(rhos, 0, 0.0)
    half = 0.5 * dt
    for i in range(steps):
        k1 = _rhs(rhos, h, ops, kappa, gamma_1, gamma_2)
        k2 = _rhs(rhos + half * k1, h, ops, kappa, gamma_1, gamma_2)
        k3 = _rhs(rhos + half * k2, h, ops, kappa, gamma_1, gamma_2)
        k4 = _rhs(rhos + dt * k3, h, ops, kappa, gamma_1, gamma_2)
        rhos = rhos + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        rhos = _hermitize(rhos)
        _scan(rhos, i + 1, (i + 1) * dt)

    reasons = []
    if max_drift > trace_drift_tol:
        reasons.append(f"trace drift {max_drift:.3e} exceeds {trace_drift_tol:.0e}")
    if max_top > top_level_threshold:
        reasons.append(
            f"top Fock level population {max_top:.3e} exceeds {top_level_threshold:.0e} "
            f"(n_ph = {n_ph} too small for these parameters)"
        )
    diag = SimDiagnostics(
        max_top_level_pop=max_top,
        trace_drift=max_drift,
        steps=steps,
        dt_ns=dt,
        top_level_threshold=top_level_threshold,
        failed=bool(reasons),
        failure_reasons=tuple(reasons),
    )
    return rhos, diag


def evolve_rk4(
    rho0: CompositeState,
    h: np.ndarray,
    kappa: float,
    gamma_1: float,
    gamma_2: float,
    t_total_ns: float,
    policy: StepPolicy = StepPolicy(),
    *,
    top_level_threshold: float = DEFAULT_TOP_LEVEL_THRESHOLD,
    trace_drift_tol: float = DEFAULT_TRACE_DRIFT_TOL,
    record: Callable[[int, float, np.ndarray], None] | None = None,
) -> tuple[CompositeState, SimDiagnostics]:
    """Evolve one composite state (internal units; H from build_hamiltonian).

    Out-of-tolerance trace drift or guard-level population does not raise:
    it comes back as diagnostics.failed with the reasons spelled out, so
    sweeps can record the failure and continue.
    """
    final, diag = _evolve_batch(
        rho0.matrix,
        h,
        kappa,
        gamma_1,
        gamma_2,
        t_total_ns,
        policy,
        top_level_threshold=top_level_threshold,
        trace_drift_tol=trace_drift_tol,
        record=record,
    )
    return CompositeState(matrix=final[0], n_ph=rho0.n_ph), diag


@dataclass(frozen=True)
class CavityPrep:
    """Initial cavity state: vacuum, coherent(alpha), or thermal(n_bar, samples)."""

    kind: str = "vacuum"
    alpha: complex = 0j
    n_bar: float = 0.0
    samples: int = 64

    def __post_init__(self):
        if self.kind not in ("vacuum", "coherent", "thermal"):
            raise DomainError(f"unknown cavity preparation {self.kind!r}")
        if self.n_bar < 0:
            raise DomainError(f"n_bar must be non-negative, got {self.n_bar}")
        if self.samples < 1:
            raise DomainError(f"samples must be >= 1, got {self.samples}")

    @classmethod
    def vacuum(cls) -> "CavityPrep":
        return cls()

    @classmethod
    def coherent(cls, alpha: complex) -> "CavityPrep":
        return cls(kind="coherent", alpha=complex(alpha))

    @classmethod
    def thermal(cls, n_bar: float, samples: int = 64) -> "CavityPrep":
        return cls(kind="thermal", n_bar=n_bar, samples=samples)


def choose_n_ph(max_amplitude: float, n_ph_floor: int = DEFAULT_N_PH,
                tail: float = 1e-5) -> int:
    """Smallest Fock dimension keeping the guard level below ``tail``.

    ``max_amplitude`` is the largest coherent amplitude the run can reach
    (initial displacement plus the drive loop radius). The guard level of a
    coherent state |amp| is Poissonian, so walk the pmf until it drops
    below ``tail``.
    """
    lam = max_amplitude**2
    if lam == 0.0:
        return n_ph_floor
    k, log_p = 0, -lam
    while not (log_p < math.log(tail) and k > lam):
        k += 1
        log_p += math.log(lam) - math.log(k)
        if k > 1000:
            raise DomainError(f"amplitude {max_amplitude} needs an absurd Fock space")
    return max(n_ph_floor, k + 1)


def _loop_radius(params: DerivedGateParams) -> float:
    """Largest |alpha| the +/-2 branch reaches during the loop (per the drive)."""
    g, delta, kappa = params.g_geom_rad_ns, params.delta_rad_ns, params.kappa_per_ns
    return 2.0 * g / math.hypot(delta, kappa)


def extract_channel(
    params: DerivedGateParams,
    gamma_1: float,
    gamma_2: float,
    initial_cavity: CavityPrep | None = None,
    *,
    n_ph: int | None = None,
    policy: StepPolicy = StepPolicy(),
    top_level_threshold: float = DEFAULT_TOP_LEVEL_THRESHOLD,
    trace_drift_tol: float = DEFAULT_TRACE_DRIFT_TOL,
    seed: int | None = None,
) -> tuple[TwoQubitChannel, SimDiagnostics]:
    """Tomographically reconstruct the effective two-qubit channel.

    gamma_1, gamma_2 in 1/s. Evolves the 16 product-state inputs (plus a
    17th probe for the linearity check) over one gate time, traces out the
    cavity, and solves the 16x16 system OUT = S * IN for the superoperator.
    A probe residual above 1e-6 flags the reconstruction (Fock truncation
    has made the reduced dynamics visibly non-linear). For a thermal
    preparation this delegates to thermal_average_channel (which needs the
    seed).
    """
    prep = initial_cavity or CavityPrep.vacuum()
    if prep.kind == "thermal":
        return thermal_average_channel(
            params, prep.n_bar, prep.samples,
            seed if seed is not None else 0,
            gamma_1=gamma_1, gamma_2=gamma_2, n_ph=n_ph, policy=policy,
            top_level_threshold=top_level_threshold, trace_drift_tol=trace_drift_tol,
        )

    if n_ph is None:
        # Vacuum runs use the fixed default; a displaced cavity gets the
        # space its excursion actually needs (initial offset + loop radius).
        if prep.kind == "coherent":
            n_ph = choose_n_ph(abs(prep.alpha) + _loop_radius(params))
        else:
            n_ph = DEFAULT_N_PH
    fock = FockSpace(n_ph)
    cav = fock.vacuum_rho() if prep.kind == "vacuum" else fock.coherent_rho(prep.alpha)

    probe_vec = np.kron(
        np.array([math.cos(0.3), math.sin(0.3)], dtype=complex),
        np.array([math.cos(1.1), 1j * math.sin(1.1)], dtype=complex),
    )
    probe = np.outer(probe_vec, probe_vec.conj())
    qubit_inputs = list(PRODUCT_STATES) + [probe]

    batch = np.stack([np.kron(q, cav) for q in qubit_inputs])
    h = build_hamiltonian(params, n_ph)
    finals, diag = _evolve_batch(
        batch, h, params.kappa_per_ns, gamma_1 * 1e-9, gamma_2 * 1e-9,
        params.t_g_ns, policy,
        top_level_threshold=top_level_threshold, trace_drift_tol=trace_drift_tol,
    )
    reduced = np.einsum("bikjk->bij", finals.reshape(-1, 4, n_ph, 4, n_ph))

    in_mat = np.stack([q.reshape(16) for q in PRODUCT_STATES], axis=1)
    out_mat = np.stack([r.reshape(16) for r in reduced[:16]], axis=1)
    # S @ IN = OUT with columns vec(rho_i) -> solve the transposed system.
    superop = np.linalg.solve(in_mat.T, out_mat.T).T

    probe_pred = (superop @ probe.reshape(16)).reshape(4, 4)
    resid = float(np.max(np.abs(probe_pred - reduced[16])))
    reasons = list(diag.failure_reasons)
    if resid > RECONSTRUCTION_RESIDUAL_TOL:
        reasons.append(
            f"channel reconstruction residual {resid:.3e} exceeds "
            f"{RECONSTRUCTION_RESIDUAL_TOL:.0e} (reduced dynamics non-linear; "
            "raise n_ph)"
        )
    diag = replace(
        diag,
        reconstruction_residual=resid,
        failed=bool(reasons),
        failure_reasons=tuple(reasons),
    )
    return TwoQubitChannel(superop=superop), diag


def _ground_state_defect(
    rho_full: np.ndarray, params: DerivedGateParams, fock: FockSpace, t_ns: float
) -> float:
    """1 - vacuum weight of the cavity marginal after undoing the drive.

    Applies the qubit-conditioned inverse displacement built from the
    closed-form drive-frame amplitude: branch (s1, s2) is displaced by
    -(g1 s1 + g2 s2) * alpha_unit(t), which for equal couplings reduces to
    the familiar -(s1 + s2) * alpha_d(t).
    """
    n_ph = fock.n_levels
    g1, g2 = params.g1_rad_ns, params.g2_rad_ns
    alpha_unit = drive_frame_displacement(
        1.0, params.delta_rad_ns, params.kappa_per_ns, t_ns
    )
    a = fock.annihilation()
    disp = np.zeros_like(rho_full)
    for i, (s1, s2) in enumerate(((1, 1), (1, -1), (-1, 1), (-1, -1))):
        amp = -(g1 * s1 + g2 * s2) * alpha_unit
        disp[i * n_ph:(i + 1) * n_ph, i * n_ph:(i + 1) * n_ph] = expm(
            amp * a.conj().T - np.conj(amp) * a
        )
    moved = disp @ rho_full @ disp.conj().T
    cav = np.einsum("inim->nm", moved.reshape(4, n_ph, 4, n_ph))
    return 1.0 - float(cav[0, 0].real) / float(np.trace(cav).real)


def polaron_residual(
    params: DerivedGateParams,
    t_samples,
    *,
    n_ph: int | None = None,
    policy: StepPolicy = StepPolicy(),
    initial_qubit: np.ndarray | None = None,
) -> float:
    """Max ground-state defect in the qubit-conditioned displaced frame.

    Evolves (vacuum cavity, no intrinsic dephasing), and at each sampled
    time applies the inverse conditional displacement built from the
    closed-form drive-frame amplitude; the cavity should then sit in its
    ground state up to truncation and integrator error:

        residual(t) = 1 - <0| Tr_qubits[rho-displaced] |0> / Tr[rho].

    Sample times are snapped to the integrator's step grid (consistently
    with the amplitude used for the displacement). Returns the maximum
    residual over the samples.
    """
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=float))
    if np.any(t_samples < 0) or np.any(t_samples > params.t_g_ns * (1 + 1e-12)):
        raise DomainError("sample times must lie in [0, t_g]")
    if n_ph is None:
        n_ph = choose_n_ph(_loop_radius(params))
    if initial_qubit is None:
        plus = np.full(4, 0.5, dtype=complex)
        initial_qubit = np.outer(plus, plus.conj())

    fock = FockSpace(n_ph)
    state = np.kron(np.asarray(initial_qubit, dtype=complex), fock.vacuum_rho())
    h = build_hamiltonian(params, n_ph)
    steps, dt = policy.resolve(params.t_g_ns)
    sample_idx = sorted({int(round(t / dt)) for t in t_samples})

    worst = 0.0

    def _record(step_idx, t_now, batch):
        nonlocal worst
        if step_idx in sample_idx:
            worst = max(worst, _ground_state_defect(batch[0], params, fock, t_now))

    _evolve_batch(
        state, h, params.kappa_per_ns, 0.0, 0.0, params.t_g_ns, policy, record=_record
    )
    return worst


def trajectory_rows(
    params: DerivedGateParams,
    gamma_1: float,
    gamma_2: float,
    initial_cavity: CavityPrep | None = None,
    *,
    n_ph: int | None = None,
    policy: StepPolicy = StepPolicy(),
    initial_qubit: np.ndarray | None = None,
    stride: int = 1,
) -> list[dict]:
    """Per-step state metrics for the optional trajectory dump.

    Evolves a single composite state (default |++> with the requested
    cavity preparation; gamma in 1/s) and records, every ``stride`` steps
    plus the final one, a row with keys t_ns, trace, purity, mean_photon,
    top_level_pop, polaron_residual. The residual column is the same
    displaced-frame ground-state defect polaron_residual() maximizes; for
    non-vacuum preparations or gamma > 0 it is reported as-is rather than
    being expected small.
    """
    prep = initial_cavity or CavityPrep.vacuum()
    if prep.kind == "thermal":
        raise DomainError("trajectory dump needs a deterministic cavity preparation")
    if n_ph is None:
        amp0 = abs(prep.alpha) if prep.kind == "coherent" else 0.0
        n_ph = (
            choose_n_ph(amp0 + _loop_radius(params))
            if prep.kind == "coherent" else DEFAULT_N_PH
        )
    if initial_qubit is None:
        plus = np.full(4, 0.5, dtype=complex)
        initial_qubit = np.outer(plus, plus.conj())
    if stride < 1:
        raise DomainError(f"stride must be >= 1, got {stride}")

    fock = FockSpace(n_ph)
    cav = fock.vacuum_rho() if prep.kind == "vacuum" else fock.coherent_rho(prep.alpha)
    state = np.kron(np.asarray(initial_qubit, dtype=complex), cav)
    h = build_hamiltonian(params, n_ph)
    steps, _ = policy.resolve(params.t_g_ns)

    rows: list[dict] = []

    def _record(step_idx, t_now, batch):
        if step_idx % stride and step_idx != steps:
            return
        st = CompositeState(matrix=batch[0], n_ph=n_ph)
        rows.append({
            "t_ns": t_now,
            "trace": st.trace,
            "purity": st.purity,
            "mean_photon": st.mean_photon,
            "top_level_pop": st.top_level_pop,
            "polaron_residual": _ground_state_defect(batch[0], params, fock, t_now),
        })

    _evolve_batch(
        state, h, params.kappa_per_ns, gamma_1 * 1e-9, gamma_2 * 1e-9,
        params.t_g_ns, policy, record=_record,
    )
    return rows


def thermal_average_channel(
    params: DerivedGateParams,
    n_bar: float,
    sample_count: int,
    seed: int,
    *,
    gamma_1: float = 0.0,
    gamma_2: float = 0.0,
    n_ph: int | None = None,
    policy: StepPolicy = StepPolicy(),
    top_level_threshold: float = DEFAULT_TOP_LEVEL_THRESHOLD,
    trace_drift_tol: float = DEFAULT_TRACE_DRIFT_TOL,
) -> tuple[TwoQubitChannel, SimDiagnostics]:
    """Monte-Carlo thermal-state channel with per-sample local-Z compensation.

    Draws coherent amplitudes from the complex Gaussian of variance n_bar
    (the P-representation of a thermal state), extracts the channel for
    each, strips the deterministic drive-induced single-qubit Z phases by
    fitting two trailing Z angles per sample, and averages the compensated
    superoperators. Deterministic for a given seed. n_bar = 0 short-circuits
    to the plain vacuum extraction (bit-identical with it).
    """
    if n_bar < 0:
        raise DomainError(f"n_bar must be non-negative, got {n_bar}")
    if sample_count < 1:
        raise DomainError(f"sample_count must be >= 1, got {sample_count}")
    if n_bar == 0.0:
        return extract_channel(
            params, gamma_1, gamma_2, CavityPrep.vacuum(), n_ph=n_ph, policy=policy,
            top_level_threshold=top_level_threshold, trace_drift_tol=trace_drift_tol,
        )

    rng = np.random.default_rng(seed)
    sigma = math.sqrt(n_bar / 2.0)
    draws = rng.normal(0.0, sigma, size=(sample_count, 2))
    target = ideal_gate_unitary(math.copysign(math.pi / 4, params.delta_rad_ns))

    acc = np.zeros((16, 16), dtype=complex)
    agg: SimDiagnostics | None = None
    for re_b, im_b in draws:
        beta = complex(re_b, im_b)
        chan, diag = extract_channel(
            params, gamma_1, gamma_2, CavityPrep.coherent(beta), n_ph=n_ph,
            policy=policy, top_level_threshold=top_level_threshold,
            trace_drift_tol=trace_drift_tol,
        )
        fit = fit_local_z(chan, target, validate=False)
        acc += fit.channel.superop_matrix()
        agg = diag if agg is None else agg.merged_with(diag)
    return TwoQubitChannel(superop=acc / sample_count), agg
