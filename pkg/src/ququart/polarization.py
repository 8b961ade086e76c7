"""Two-qubit polarization states: ququart vectors, Schmidt form, waveplates,
density matrices built from the biphoton spectrum, and state metrics.

Basis order is fixed as (HH, HV, VH, VV); the first letter is the signal
photon (arm 1), the second the idler (arm 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceFailure, InvalidState, NonUnitaryInput, ZeroSpectrum

BASIS = ("HH", "HV", "VH", "VV")
H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)

PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)


def normalize(amplitudes):
    """Return ``amplitudes`` as a unit complex 4-vector."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise InvalidState(f"a ququart has 4 amplitudes, got {psi.size}")
    norm = np.linalg.norm(psi)
    if not np.isfinite(norm) or norm < 1e-150:
        raise InvalidState("state vector is not normalizable")
    return psi / norm


def _check_state(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise InvalidState(f"a ququart has 4 amplitudes, got shape {psi.shape}")
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-12:
        raise InvalidState("state vector is not normalized")
    return psi


def seed_state(mu, phase=0.0):
    """sqrt(mu)|HH> + sqrt(1 - mu) e^{i phase}|VV>, the native two-crystal state."""
    return np.array([math.sqrt(mu), 0.0, 0.0, math.sqrt(1.0 - mu) * np.exp(1j * phase)], dtype=complex)


def check_density(rho, atol=1e-12, psd_tol=1e-10):
    """Raise InvalidState unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise InvalidState(f"density matrix trace {np.trace(rho).real:.15g} != 1")
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < -psd_tol:
        raise InvalidState(f"density matrix has negative eigenvalue {lam[0]:.3g}")
    return rho


def density(psi):
    psi = _check_state(psi)
    return np.outer(psi, psi.conj())


def _as_density(state):
    arr = np.asarray(state, dtype=complex)
    return density(arr) if arr.ndim == 1 else check_density(arr)


@dataclass(frozen=True)
class SchmidtForm:
    """sqrt(mu)|A1 A2> + sqrt(1 - mu)|B1 B2> with mu >= 1/2."""

    mu: float
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def state(self):
        return math.sqrt(self.mu) * np.kron(self.a1, self.a2) + math.sqrt(1.0 - self.mu) * np.kron(self.b1, self.b2)


def schmidt_decompose(psi):
    psi = _check_state(psi)
    u, s, vh = np.linalg.svd(psi.reshape(2, 2))
    mu = float(s[0] ** 2 / (s[0] ** 2 + s[1] ** 2))
    return SchmidtForm(mu, u[:, 0], vh[0, :], u[:, 1], vh[1, :])


def reduced_state(state, subsystem):
    """Partial trace leaving photon 1 or 2; accepts a vector or 4x4 matrix."""
    rho = _as_density(state).reshape(2, 2, 2, 2)
    if subsystem == 1:
        return np.einsum("ijkj->ik", rho)
    if subsystem == 2:
        return np.einsum("jijk->ik", rho)
    raise ValueError(f"subsystem must be 1 or 2, got {subsystem}")


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def waveplate(retardance, axis_angle):
    """Jones matrix of a retarder, fast axis at ``axis_angle`` from horizontal.

    The retardance phase sits on the slow axis: R(t) diag(1, e^{i G}) R(-t).
    """
    c, s = math.cos(axis_angle), math.sin(axis_angle)
    e = np.exp(1j * retardance)
    return np.array(
        [[c * c + e * s * s, (1 - e) * c * s], [(1 - e) * c * s, s * s + e * c * c]],
        dtype=complex,
    )


def hwp(axis_angle):
    return waveplate(math.pi, axis_angle)


def qwp(axis_angle):
    return waveplate(math.pi / 2, axis_angle)


def is_unitary(u, atol=1e-12):
    u = np.asarray(u, dtype=complex)
    return u.shape == (2, 2) and np.max(np.abs(u.conj().T @ u - np.eye(2))) <= atol


def apply_local(psi, u1, u2):
    """(U1 x U2)|psi>."""
    psi = _check_state(psi)
    for u in (u1, u2):
        if not is_unitary(u):
            raise NonUnitaryInput("local transformation is not unitary")
    return np.kron(u1, u2) @ psi


def apply_local_density(rho, u1, u2):
    for u in (u1, u2):
        if not is_unitary(u):
            raise NonUnitaryInput("local transformation is not unitary")
    k = np.kron(u1, u2)
    return k @ np.asarray(rho, dtype=complex) @ k.conj().T


def orthogonal_complement(a):
    """Unit vector orthogonal to |a>, chosen as (-conj(a_V), conj(a_H))."""
    a = np.asarray(a, dtype=complex)
    return np.array([-np.conj(a[1]), np.conj(a[0])], dtype=complex)


def _plates(angles):
    t_q, t_h = angles
    return hwp(t_h) @ qwp(t_q)


_SEED_GRID = np.linspace(0.0, math.pi, 64, endpoint=False)


def plate_angles_for_target(a, b=None, tol=1e-9):
    """Quarter- then half-wave plate angles taking |H> to |a>.

    Returns ``(theta_qwp, theta_hwp, phase)``: U = HWP(theta_hwp) QWP(theta_qwp)
    maps |H> to |a> up to a global phase, and |V> to e^{i phase}|b> relative
    to that same phase.  ``b`` defaults to the orthogonal complement of ``a``.
    """
    a = np.asarray(a, dtype=complex)
    a = a / np.linalg.norm(a)
    b = orthogonal_complement(a) if b is None else np.asarray(b, dtype=complex)

    # U|H> for every seed pair in one shot: first column of HWP @ QWP
    q = np.stack([qwp(t)[:, 0] for t in _SEED_GRID])          # (64, 2)
    hs = np.stack([hwp(t) for t in _SEED_GRID])               # (64, 2, 2)
    out = np.einsum("hij,qj->hqi", hs, q)                     # (hwp, qwp, 2)
    overlap = np.abs(out @ a.conj()) ** 2
    ih, iq = np.unravel_index(np.argmax(overlap), overlap.shape)
    seed = np.array([_SEED_GRID[iq], _SEED_GRID[ih]])

    def loss(x):
        return 1.0 - abs(np.vdot(a, _plates(x)[:, 0])) ** 2

    best = seed
    if loss(seed) > 1e-16:
        res = minimize(loss, seed, method="BFGS", options={"gtol": 1e-14, "maxiter": 500})
        if loss(res.x) < loss(seed):
            best = res.x
        if loss(best) > 1e-14:
            res = minimize(loss, best, method="Nelder-Mead",
                           options={"xatol": 1e-14, "fatol": 1e-18, "maxiter": 4000})
            if loss(res.x) < loss(best):
                best = res.x
    u = _plates(best)
    fid = abs(np.vdot(a, u[:, 0]))
    if fid < 1.0 - tol:
        raise ConvergenceFailure(f"waveplate search reached overlap {fid:.12f}, need {1 - tol}")
    alpha = np.angle(np.vdot(a, u[:, 0]))
    beta = np.angle(np.vdot(b, u[:, 1]))
    phase = float(np.angle(np.exp(1j * (beta - alpha))))
    t_q, t_h = (float(x % math.pi) for x in best)
    return t_q, t_h, phase


@dataclass(frozen=True)
class ArmSetting:
    """Waveplates in one arm; ``None`` angles mean no plates are needed."""

    qwp: float | None
    hwp: float | None
    residual_phase: float

    def unitary(self):
        if self.qwp is None:
            return np.eye(2, dtype=complex)
        return hwp(self.hwp) @ qwp(self.qwp)


@dataclass(frozen=True)
class Recipe:
    """Settings that turn the two-crystal source into a target ququart.

    ``pump_angle`` is the pump polarization direction from horizontal,
    arcsin(sqrt(1 - mu)); the pump half-wave plate axis sits at half of it.
    ``pump_phase`` is the H/V pump phase the quartz plates must provide.
    """

    mu: float
    pump_angle: float
    pump_phase: float
    arm1: ArmSetting
    arm2: ArmSetting
    compensator_required: bool

    @property
    def pump_hwp_angle(self):
        return self.pump_angle / 2.0

    def simulate(self):
        """Ideal (dispersion-free) output state of this recipe."""
        seed = seed_state(self.mu, self.pump_phase)
        return np.kron(self.arm1.unitary(), self.arm2.unitary()) @ seed


def _arm_setting(a, b):
    # |H> -> |a> and |V> -> |b> up to phases: no plates needed
    if abs(abs(a[0]) - 1.0) < 1e-12 and abs(abs(b[1]) - 1.0) < 1e-12:
        alpha = np.angle(a[0])
        beta = np.angle(b[1])
        return ArmSetting(None, None, float(np.angle(np.exp(-1j * (beta - alpha)))))
    t_q, t_h, phase = plate_angles_for_target(a, b)
    return ArmSetting(t_q, t_h, phase)


def prepare_arbitrary(target):
    """Recipe preparing ``target`` from the seed state sqrt(mu)|HH> + sqrt(1-mu)|VV>."""
    psi = _check_state(target)
    sf = schmidt_decompose(psi)
    arm1 = _arm_setting(sf.a1, sf.b1)
    arm2 = _arm_setting(sf.a2, sf.b2)
    # U_j|H> = e^{i alpha_j}|A_j>, U_j|V> = e^{i beta_j}|B_j>: the seed's VV phase must undo beta - alpha
    pump_phase = float(np.angle(np.exp(-1j * (arm1.residual_phase + arm2.residual_phase))))
    return Recipe(
        mu=sf.mu,
        pump_angle=math.asin(math.sqrt(max(0.0, 1.0 - sf.mu))),
        pump_phase=pump_phase,
        arm1=arm1,
        arm2=arm2,
        compensator_required=sf.mu < 1.0 - 1e-12,
    )


def density_from_spectrum(amp, mu, pump_phase=0.0):
    """Polarization density matrix after tracing out frequency.

    The HH/VV coherence is sqrt(mu (1 - mu)) e^{-i pump_phase} times the
    normalized overlap of the H- and V-branch amplitudes.
    """
    norm = amp.normalization
    if not norm > 0:
        raise ZeroSpectrum("spectral amplitude has zero norm")
    overlap = amp.coherence_integral()
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = mu
    rho[3, 3] = 1.0 - mu
    rho[0, 3] = math.sqrt(mu * (1.0 - mu)) * np.exp(-1j * pump_phase) * overlap
    rho[3, 0] = np.conj(rho[0, 3])
    return check_density(rho)


def coherence(rho):
    """|rho_HH,VV| / sqrt(rho_HH,HH rho_VV,VV), the normalized HH-VV coherence."""
    rho = np.asarray(rho, dtype=complex)
    pop = (rho[0, 0] * rho[3, 3]).real
    if pop <= 0:
        return 0.0
    return float(abs(rho[0, 3]) / math.sqrt(pop))


def fidelity(rho, target):
    """<psi|rho|psi> for a pure target."""
    psi = _check_state(target)
    rho = _as_density(rho)
    return float(min(1.0, max(0.0, np.vdot(psi, rho @ psi).real)))


_SY2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(state):
    """Wootters concurrence of a two-qubit state vector or density matrix."""
    rho = _as_density(state)
    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    # singular values of sqrt(rho) sqrt(rho~) are the square roots of the
    # eigenvalues of rho rho~, without the precision lost by taking roots
    lam = np.linalg.svd(root @ _SY2 @ root.conj() @ _SY2, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def purity(rho):
    rho = _as_density(rho)
    return float(np.trace(rho @ rho).real)


def to_pairs(values):
    """Complex array to nested [re, im] lists for JSON."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    return [to_pairs(row) for row in arr]


def from_pairs(pairs):
    arr = np.asarray(pairs, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]
