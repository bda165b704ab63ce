"""Analytic error channel of the resonator-mediated CPHASE gate.

The gate works by driving the resonator conditionally on the joint qubit
state: each sigma_z1 + sigma_z2 eigenvalue s in {+2, 0, -2} pushes the
cavity around a circle in phase space with amplitude s*alpha(t). When the
loop closes (Delta*t_g = 2*pi*n) the qubits pick up a geometric two-qubit
phase; photon loss along the loop and leftover displacement at closing time
leak which-path information, which dephases the qubits in the Z*Z basis.
All of that is exactly expressible: the channel factorizes into

    rho -> U_g . E_b . E_q (rho)         (the three factors commute)

with U_g = exp(+i * phi * Z1*Z2), E_b a three-Kraus correlated-dephasing
channel parameterized by a single number b in (0, 1], and E_q the ordinary
independent dephasing of the two qubits. Everything in this module is in
angular units: couplings are energy/hbar in rad/ns, rates in 1/ns, times in
ns (any consistent set works).

Basis order is |00>, |01>, |10>, |11>; superoperators act on row-major
vectorized density matrices, S = sum_k kron(K_k, conj(K_k)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPhysicalChannelError

_Z = np.diag([1.0, -1.0])
_I2 = np.eye(2)
PAULI_I4 = np.eye(4, dtype=complex)
PAULI_Z1 = np.kron(_Z, _I2).astype(complex)
PAULI_Z2 = np.kron(_I2, _Z).astype(complex)
PAULI_ZZ = np.kron(_Z, _Z).astype(complex)


def _mat_to_json(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def _mat_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


@dataclass(frozen=True)
class TwoQubitChannel:
    """A two-qubit map stored as Kraus operators and/or a 16x16 superoperator.

    At least one representation must be present. The Kraus list is ordered;
    the superoperator uses row-major vectorization.
    """

    kraus: tuple[np.ndarray, ...] | None = None
    superop: np.ndarray | None = None

    def __post_init__(self):
        if self.kraus is None and self.superop is None:
            raise DomainError("channel needs a Kraus list or a superoperator")
        if self.kraus is not None:
            for k in self.kraus:
                if np.asarray(k).shape != (4, 4):
                    raise DomainError("Kraus operators must be 4x4")
        if self.superop is not None and np.asarray(self.superop).shape != (16, 16):
            raise DomainError("superoperator must be 16x16")

    # -- representations ----------------------------------------------------
    def superop_matrix(self) -> np.ndarray:
        if self.superop is not None:
            return np.asarray(self.superop, dtype=complex)
        s = np.zeros((16, 16), dtype=complex)
        for k in self.kraus:
            s += np.kron(k, k.conj())
        return s

    def choi_matrix(self) -> np.ndarray:
        """Unnormalized Choi matrix (trace 4 for a TP map), row-major pairing."""
        s = self.superop_matrix()
        return s.reshape(4, 4, 4, 4).transpose(0, 2, 1, 3).reshape(16, 16)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if self.kraus is not None:
            out = np.zeros_like(rho)
            for k in self.kraus:
                out += k @ rho @ k.conj().T
            return out
        return (self.superop_matrix() @ rho.reshape(16)).reshape(4, 4)

    # -- diagnostics ---------------------------------------------------------
    def completeness_defect(self) -> float:
        """max|sum_k K^dag K - I| (or the equivalent TP defect of the superop)."""
        if self.kraus is not None:
            acc = np.zeros((4, 4), dtype=complex)
            for k in self.kraus:
                acc += k.conj().T @ k
            return float(np.max(np.abs(acc - np.eye(4))))
        vec_id = np.eye(4, dtype=complex).reshape(16)
        return float(np.max(np.abs(vec_id @ self.superop_matrix() - vec_id)))

    def choi_min_eigenvalue(self) -> float:
        c = self.choi_matrix()
        return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])

    def validate(self, tp_tol: float = 1e-10, choi_tol: float = 1e-8) -> None:
        """Raise NonPhysicalChannelError if the map is not CPTP within tolerance."""
        defect = self.completeness_defect()
        c = self.choi_matrix()
        eigs = np.linalg.eigvalsh(0.5 * (c + c.conj().T))
        if defect > tp_tol or eigs[0] < -choi_tol:
            raise NonPhysicalChannelError(
                f"map is not CPTP: trace-preservation defect {defect:.3e} "
                f"(tol {tp_tol:.0e}), Choi eigenvalues {np.array2string(eigs, precision=3)} "
                f"(min tol -{choi_tol:.0e})",
                choi_eigenvalues=eigs,
                tp_defect=defect,
            )

    # -- algebra -------------------------------------------------------------
    def then(self, later: "TwoQubitChannel") -> "TwoQubitChannel":
        """Composition: apply self first, then ``later``."""
        if self.kraus is not None and later.kraus is not None:
            ops = tuple(b @ a for b in later.kraus for a in self.kraus)
            return TwoQubitChannel(kraus=ops)
        return TwoQubitChannel(superop=later.superop_matrix() @ self.superop_matrix())

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "TwoQubitChannel":
        return cls(kraus=(np.asarray(u, dtype=complex),))

    # -- serialization (matrices as nested rows of [re, im] pairs) -----------
    def to_json_dict(self) -> dict:
        return {
            "kraus": None if self.kraus is None else [_mat_to_json(k) for k in self.kraus],
            "superop": None if self.superop is None else _mat_to_json(self.superop),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TwoQubitChannel":
        kraus = d.get("kraus")
        superop = d.get("superop")
        return cls(
            kraus=None if kraus is None else tuple(_mat_from_json(k) for k in kraus),
            superop=None if superop is None else _mat_from_json(superop),
        )


def validate_two_qubit_density_matrix(
    rho: np.ndarray, herm_tol: float = 1e-12, trace_tol: float = 1e-10, eig_tol: float = 1e-10
) -> None:
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise DomainError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise DomainError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise DomainError("density matrix trace differs from 1 beyond tolerance")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -eig_tol:
        raise DomainError("density matrix has a negative eigenvalue beyond tolerance")


def ideal_gate_unitary(phi_12: float) -> np.ndarray:
    """exp(+i * phi_12 * Z1 Z2) = diag(e^{i phi}, e^{-i phi}, e^{-i phi}, e^{i phi}).

    phi_12 = pi/4 is the CPHASE point: equal to diag(1,1,1,-1) up to
    single-qubit Z rotations and a global phase.
    """
    p = np.exp(1j * phi_12)
    return np.diag([p, p.conjugate(), p.conjugate(), p]).astype(complex)


def textbook_cphase_decomposition() -> tuple[np.ndarray, np.ndarray]:
    """(CZ, local correction L) with CZ = e^{i pi/4} * ideal_gate_unitary(pi/4) @ L.

    L = Rz(pi/2) (x) Rz(pi/2) is the single-qubit-Z dressing that turns the
    symmetric geometric-phase gate into the textbook diag(1, 1, 1, -1).
    """
    rz = np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)])
    local = np.kron(rz, rz)
    cz = np.exp(1j * np.pi / 4) * ideal_gate_unitary(np.pi / 4) @ local
    return cz, local


def alpha_closed_form(g: float, delta: float, kappa: float, t):
    """Cavity displacement per unit sigma_z eigenvalue at time t.

        alpha(t) = -(g/2) * (e^{-kappa t} - e^{i delta t}) / (i delta + kappa)

    (hbar = 1; g in rad/ns, delta in rad/ns, kappa in 1/ns, t in ns, scalar
    or array). Solves d(alpha)/dt = -kappa*alpha + (g/2) e^{i delta t} with
    alpha(0) = 0. At kappa = 0 this is i(g/2 delta)(1 - e^{i delta t}), which
    vanishes whenever delta*t is a multiple of 2*pi — the loop-closing
    (disentangling) points.
    """
    if delta == 0.0 and kappa == 0.0:
        raise DomainError("alpha is unbounded at delta = kappa = 0 (resonant lossless drive)")
    t = np.asarray(t, dtype=float)
    val = -(g / 2.0) * (np.exp(-kappa * t) - np.exp(1j * delta * t)) / (1j * delta + kappa)
    return val if val.ndim else complex(val)


def drive_frame_displacement(g: float, delta: float, kappa: float, t):
    """alpha in the frame of the time-independent gate Hamiltonian.

    The simulation Hamiltonian is written in the frame rotating at the drive
    frequency, where the coherent-state amplitude is

        alpha_d(t) = -i e^{-i delta t} alpha(t)
                   = -i (g/2) (1 - e^{-(i delta + kappa) t}) / (i delta + kappa).

    This is the amplitude the cavity actually holds in the simulation frame
    (per unit sigma_z eigenvalue); use it for polaron-frame checks.
    """
    t = np.asarray(t, dtype=float)
    val = -1j * np.exp(-1j * delta * t) * alpha_closed_form(g, delta, kappa, t)
    return val if val.ndim else complex(val)


@dataclass(frozen=True)
class DisplacementTrajectory:
    """Sampled alpha(t) over [0, t_g] plus the closed-form parameters."""

    t: np.ndarray
    alpha: np.ndarray
    g: float
    delta: float
    kappa: float


def displacement_trajectory(
    g: float, delta: float, kappa: float, t_g: float, num: int = 513
) -> DisplacementTrajectory:
    t = np.linspace(0.0, t_g, num)
    return DisplacementTrajectory(
        t=t, alpha=alpha_closed_form(g, delta, kappa, t), g=g, delta=delta, kappa=kappa
    )


def accumulated_entangling_phase(g: float, delta: float, kappa: float, t: float) -> float:
    """Two-qubit geometric phase accumulated by time t (closed form).

    d(phi)/dt = -g * Re[alpha_d(t)] integrates to

        phi(t) = -(g^2/2) * Im[ ((e^{p t} - 1)/p - t) / (kappa - i delta) ],
        p = i delta - kappa.

    At kappa = 0 this reduces to (g^2 / 2 delta^2)(delta t - sin delta t),
    which reaches pi/4 at the schedule point delta*t = 2*pi*n with
    delta = 2 g sqrt(n). With loss the phase at the schedule point drops by
    a relative 3 kappa^2/delta^2 + O(kappa^3).
    """
    if delta == 0.0 and kappa == 0.0:
        raise DomainError("phase is undefined at delta = kappa = 0")
    p = 1j * delta - kappa
    core = ((np.exp(p * t) - 1.0) / p - t) / (kappa - 1j * delta)
    return float(-(g**2 / 2.0) * core.imag)


def b_factor(g: float, delta: float, kappa: float, t_g: float) -> tuple[float, float, float]:
    """Correlated-dephasing factor b(t_g) and its loss/entanglement split.

        b = exp(-4 kappa \\int_0^{t_g} |alpha|^2 dt - 2 |alpha(t_g)|^2) = b_l * b_e

    computed from the closed-form antiderivative (no quadrature). b_l
    collects the photon-loss (which-path emission) term, b_e the residual
    entanglement with the unclosed loop; at a lossless schedule point both
    are 1. In the small-kappa/delta limit b ~ exp(-pi*kappa/(2 g sqrt(n))).
    """
    if delta == 0.0 and kappa == 0.0:
        raise DomainError("b is undefined at delta = kappa = 0")
    if t_g < 0:
        raise DomainError(f"t_g must be non-negative, got {t_g}")
    gsq = g * g
    d2 = delta * delta + kappa * kappa
    if kappa > 0.0:
        i_exp = (1.0 - math.exp(-2.0 * kappa * t_g)) / (2.0 * kappa)
        i_cos = (
            math.exp(-kappa * t_g)
            * (-kappa * math.cos(delta * t_g) + delta * math.sin(delta * t_g))
            + kappa
        ) / d2
        int_term = 4.0 * kappa * (gsq / (4.0 * d2)) * (i_exp - 2.0 * i_cos + t_g)
    else:
        int_term = 0.0
    ent_term = 2.0 * abs(alpha_closed_form(g, delta, kappa, t_g)) ** 2
    b_l = math.exp(-int_term)
    b_e = math.exp(-ent_term)
    return b_l * b_e, b_l, b_e


def b_factor_simplified(g: float, kappa: float, n: int) -> float:
    """Leading-order b at the schedule point: exp(-pi*kappa/(2 g sqrt(n)))."""
    if not (g > 0 and n >= 1):
        raise DomainError("g must be positive and n >= 1")
    return math.exp(-math.pi * kappa / (2.0 * g * math.sqrt(n)))


def correlated_dephasing_channel(b: float) -> TwoQubitChannel:
    """Three-Kraus channel of the which-path dephasing, parameter b in [0, 1].

    K0 = [(1+b) I - (1-b) Z1 Z2]/2,
    K1 = sqrt((1-b^4)/2) (Z1 + Z2)/2,
    K2 = ((1-b^2)/sqrt(2)) (I + Z1 Z2)/2.

    Completeness is an exact algebraic identity, and the family is a
    semigroup under composition: E_{b1} . E_{b2} = E_{b1 b2}.
    """
    if not (0.0 <= b <= 1.0):
        raise DomainError(f"b must lie in [0, 1], got {b}")
    k0 = 0.5 * ((1.0 + b) * PAULI_I4 - (1.0 - b) * PAULI_ZZ)
    k1 = math.sqrt((1.0 - b**4) / 2.0) * 0.5 * (PAULI_Z1 + PAULI_Z2)
    k2 = ((1.0 - b**2) / math.sqrt(2.0)) * 0.5 * (PAULI_I4 + PAULI_ZZ)
    return TwoQubitChannel(kraus=(k0, k1, k2))


def intrinsic_dephasing_channel(gamma_1: float, gamma_2: float, t: float) -> TwoQubitChannel:
    """Independent dephasing of the two qubits over time t.

    p_j = (1 - e^{-gamma_j t})/2; Kraus set sqrt(w) * {I, Z1, Z2, Z1 Z2} with
    weights (1-p1)(1-p2), p1(1-p2), p2(1-p1), p1 p2. Markovian:
    E(t1) . E(t2) = E(t1 + t2). Rates and time in any consistent units.
    """
    if gamma_1 < 0 or gamma_2 < 0 or t < 0:
        raise DomainError("rates and time must be non-negative")
    p1 = 0.5 * (1.0 - math.exp(-gamma_1 * t))
    p2 = 0.5 * (1.0 - math.exp(-gamma_2 * t))
    weights_ops = (
        ((1.0 - p1) * (1.0 - p2), PAULI_I4),
        (p1 * (1.0 - p2), PAULI_Z1),
        (p2 * (1.0 - p1), PAULI_Z2),
        (p1 * p2, PAULI_ZZ),
    )
    return TwoQubitChannel(kraus=tuple(math.sqrt(w) * op for w, op in weights_ops))


def analytic_gate_channel(
    params, gamma_1: float, gamma_2: float
) -> TwoQubitChannel:
    """Full analytic channel of one gate: E_q at t_g, E_b with b(t_g), then U_g.

    ``params`` is a DerivedGateParams (SI); gamma_1, gamma_2 are the intrinsic
    dephasing rates in 1/s. The three factors commute, so the composition
    order is a convention, not physics. The unitary phase is +pi/4 for
    Delta > 0 and -pi/4 on the other drive sideband.
    """
    g = params.g_geom_rad_ns
    delta = params.delta_rad_ns
    kappa = params.kappa_per_ns
    t_ns = params.t_g_ns
    b, _, _ = b_factor(g, delta, kappa, t_ns)
    e_q = intrinsic_dephasing_channel(gamma_1 * 1e-9, gamma_2 * 1e-9, t_ns)
    e_b = correlated_dephasing_channel(b)
    u = TwoQubitChannel.from_unitary(ideal_gate_unitary(math.copysign(math.pi / 4, delta)))
    return e_q.then(e_b).then(u)


def analytic_avg_fidelity(b: float, gamma_phi: float, t_g: float) -> float:
    """Closed-form average gate fidelity of the analytic channel.

        F = (1/10) (4 + 4 b e^{-gamma_phi t_g} + (b^4 + 1) e^{-2 gamma_phi t_g})

    gamma_phi is the geometric-mean intrinsic dephasing rate; consistent
    units with t_g. Decays from 1 (b = 1, no dephasing) to the fully
    dephased floor 0.4.
    """
    if not (0.0 <= b <= 1.0):
        raise DomainError(f"b must lie in [0, 1], got {b}")
    if gamma_phi < 0 or t_g < 0:
        raise DomainError("gamma_phi and t_g must be non-negative")
    decay = math.exp(-gamma_phi * t_g)
    return (4.0 + 4.0 * b * decay + (b**4 + 1.0) * decay**2) / 10.0
