"""Three-level ladder (g, e, r) under a square-wave chopped coupling laser.

Units: angular frequencies and decay rates in rad/s and 1/s, hbar = 1, so a
Hamiltonian is expressed directly in rad/s.  Basis ordering is (g, e, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, StepTooLarge, ZeroDecayRate

G, E, R = 0, 1, 2
STATE_LABELS = ("g", "e", "r")

TRACE_TOL = 1e-9
TRACE_DRIFT_LIMIT = 1e-6
HERMITIAN_TOL = 1e-12
_DEGENERATE_REL = 1e-12


@dataclass(frozen=True)
class DriveProfile:
    """Laser drive and decay parameters.

    ``duty`` is the ON fraction of each chop period.  ``duty=1`` means the
    coupling laser is never switched off.
    """

    omega_p: float
    omega_c0: float
    f_chop: float
    gamma_e: float
    gamma_r: float
    duty: float = 0.5
    delta_p: float = 0.0
    delta_c: float = 0.0

    def __post_init__(self):
        if not self.f_chop > 0:
            raise ValueError(f"f_chop must be > 0, got {self.f_chop}")
        if not 0 < self.duty <= 1:
            raise ValueError(f"duty must be in (0, 1], got {self.duty}")
        if self.gamma_e < 0 or self.gamma_r < 0:
            raise ValueError("decay rates must be >= 0")

    @property
    def period(self) -> float:
        return 1.0 / self.f_chop


@dataclass
class Trajectory:
    times: np.ndarray   # (n,)
    states: np.ndarray  # (n, 3, 3) complex

    def population(self, level: str) -> np.ndarray:
        i = STATE_LABELS.index(level)
        return self.states[:, i, i].real

    def coherence(self, a: str, b: str) -> np.ndarray:
        return self.states[:, STATE_LABELS.index(a), STATE_LABELS.index(b)]

    def __len__(self):
        return len(self.times)


# -- density matrices --------------------------------------------------------

def basis_state(level: str) -> np.ndarray:
    """Projector |level><level| as a 3x3 complex array."""
    rho = np.zeros((3, 3), dtype=complex)
    i = STATE_LABELS.index(level)
    rho[i, i] = 1.0
    return rho


def pure_state(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def check_density_matrix(rho: np.ndarray, trace_tol: float = TRACE_TOL) -> None:
    """Raise InvariantViolation unless ``rho`` is Hermitian, unit-trace and has
    populations in [0, 1] (to within tolerance)."""
    rho = np.asarray(rho)
    if rho.shape != (3, 3):
        raise InvariantViolation(f"density matrix must be 3x3, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise InvariantViolation(f"not Hermitian (max deviation {herm:.3g})")
    tr = abs(np.trace(rho) - 1.0)
    if tr > trace_tol:
        raise InvariantViolation(f"trace deviates from 1 by {tr:.3g}")
    pops = np.diag(rho).real
    if np.any(pops < -1e-9) or np.any(pops > 1 + 1e-9):
        raise InvariantViolation(f"populations out of range: {pops}")


# -- model -------------------------------------------------------------------

def chopped_rabi(t, drive: DriveProfile):
    """Coupling Rabi frequency: ``omega_c0`` during the first ``duty`` fraction
    of every chop period, zero otherwise.  Accepts scalars or arrays."""
    phase = np.mod(np.asarray(t, dtype=float) * drive.f_chop, 1.0)
    out = np.where(phase < drive.duty, drive.omega_c0, 0.0)
    return float(out) if out.ndim == 0 else out


def build_hamiltonian(omega_p, omega_c, delta_p=0.0, delta_c=0.0) -> np.ndarray:
    """Rotating-frame ladder Hamiltonian in rad/s.

    Diagonal detuning terms (0, -delta_p, -(delta_p + delta_c)) extend the
    resonant model; with both detunings zero only the probe (g-e) and
    coupling (e-r) off-diagonals remain.
    """
    H = np.zeros((3, 3), dtype=complex)
    H[G, E] = H[E, G] = omega_p / 2
    H[E, R] = H[R, E] = omega_c / 2
    H[E, E] = -delta_p
    H[R, R] = -(delta_p + delta_c)
    return H


def _jump_operators(gamma_e, gamma_r):
    sigma_ge = np.zeros((3, 3), dtype=complex)
    sigma_ge[G, E] = 1.0
    sigma_er = np.zeros((3, 3), dtype=complex)
    sigma_er[E, R] = 1.0
    return [(gamma_e, sigma_ge), (gamma_r, sigma_er)]


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, gamma_e: float,
                 gamma_r: float) -> np.ndarray:
    """Master-equation derivative -i[H, rho] + D[rho] with decay r->e at
    ``gamma_r`` and e->g at ``gamma_e``."""
    drho = -1j * (H @ rho - rho @ H)
    for gamma, c in _jump_operators(gamma_e, gamma_r):
        if gamma == 0:
            continue
        cd = c.conj().T
        cdc = cd @ c
        drho = drho + gamma * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
    return drho


def liouvillian(H: np.ndarray, gamma_e: float, gamma_r: float) -> np.ndarray:
    """9x9 superoperator acting on the row-major flattening of rho, such that
    ``(L @ rho.ravel()).reshape(3, 3) == lindblad_rhs(rho, H, ...)``."""
    eye = np.eye(3)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for gamma, c in _jump_operators(gamma_e, gamma_r):
        if gamma == 0:
            continue
        cdc = c.conj().T @ c
        L = L + gamma * (np.kron(c, c.conj())
                         - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T)))
    return L


def rk4_step(f, t, y, h):
    """One classical Runge-Kutta step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_propagator(L: np.ndarray, h: float) -> np.ndarray:
    """Matrix of one RK4 step for the autonomous linear system y' = L y.

    For a linear right-hand side the four stages collapse to the degree-4
    Taylor polynomial of exp(hL); applying this matrix is the same scheme as
    ``rk4_step`` without re-evaluating the stages each step.
    """
    hL = h * L
    P = np.eye(L.shape[0], dtype=complex)
    term = np.eye(L.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ hL / k
        P = P + term
    return P


def _chop_edges(drive: DriveProfile, t_end: float) -> list[float]:
    """Sorted segment boundaries in [0, t_end] including every chop edge."""
    T = drive.period
    edges = [0.0]
    n = 0
    while True:
        on_end = n * T + drive.duty * T
        nxt = (n + 1) * T
        for e in (on_end, nxt):
            if e >= t_end:
                break
            if e > edges[-1]:
                edges.append(e)
        if nxt >= t_end:
            break
        n += 1
    edges.append(t_end)
    return edges


def evolve(rho0: np.ndarray, drive: DriveProfile, t_end: float, dt: float,
           check: bool = True) -> Trajectory:
    """Integrate the master equation from t=0 to ``t_end``.

    Fixed-step RK4.  The square-wave coupling is discontinuous, so the time
    axis is cut at every chop edge and each piece is stepped with the largest
    uniform step not exceeding ``dt``; no step ever straddles an edge.

    Raises
    ------
    StepTooLarge
        ``dt`` larger than a twentieth of the chop period.
    InvariantViolation
        The trace drifted by more than 1e-6.
    """
    T = drive.period
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > T / 20 * (1 + 1e-12):
        raise StepTooLarge(f"dt={dt:g} s exceeds T/20={T / 20:g} s")
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0)

    L_on = liouvillian(build_hamiltonian(drive.omega_p, drive.omega_c0,
                                         drive.delta_p, drive.delta_c),
                       drive.gamma_e, drive.gamma_r)
    L_off = liouvillian(build_hamiltonian(drive.omega_p, 0.0,
                                          drive.delta_p, drive.delta_c),
                        drive.gamma_e, drive.gamma_r)
    cache = {}

    times = [0.0]
    states = [rho0]
    y = rho0.ravel().copy()
    edges = _chop_edges(drive, t_end)
    for a, b in zip(edges[:-1], edges[1:]):
        span = b - a
        n = max(1, math.ceil(span / dt - 1e-9))
        h = span / n
        on = chopped_rabi(0.5 * (a + b), drive) != 0.0
        key = (on, h)
        if key not in cache:
            cache[key] = rk4_propagator(L_on if on else L_off, h)
        P = cache[key]
        for j in range(1, n + 1):
            y = P @ y
            rho = y.reshape(3, 3)
            if check:
                drift = abs(np.trace(rho) - 1.0)
                if drift > TRACE_DRIFT_LIMIT:
                    raise InvariantViolation(
                        f"trace drift {drift:.3g} at t={a + j * h:g} s; "
                        "integrator misconfigured")
            times.append(b if j == n else a + j * h)
            states.append(rho.copy())
    return Trajectory(np.array(times), np.array(states))


# -- analytic references -----------------------------------------------------

def analytic_on_phase(t, omega_c0: float):
    """Decay-free e<->r Rabi populations for an atom starting in |e>.

    Returns ``(P_e, P_r)`` = (cos^2, sin^2) of ``omega_c0 * t / 2``.
    """
    theta = 0.5 * omega_c0 * np.asarray(t, dtype=float)
    p_r = np.sin(theta) ** 2
    return 1.0 - p_r, p_r


def two_level_rabi(rho_start: np.ndarray, omega_c0: float, t):
    """Decay-free e-r evolution of an arbitrary starting state (probe off).

    Generalises :func:`analytic_on_phase` to a state that is not |e><e|;
    returns ρ_rr(t).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c = np.cos(0.5 * omega_c0 * t)
    s = np.sin(0.5 * omega_c0 * t)
    rho_ee = rho_start[E, E]
    rho_rr = rho_start[R, R]
    rho_er = rho_start[E, R]
    # U = [[c, -i s], [-i s, c]] on the (e, r) block
    return s * s * rho_ee.real + c * c * rho_rr.real + 2 * c * s * rho_er.imag


def _cascade_kernel(gamma_e, gamma_r, tau):
    """(e^{-Γr τ} - e^{-Γe τ}) / (Γe - Γr), evaluated without cancellation.

    The expression is symmetric in the two rates; the slower exponential is
    factored out so the remaining ``expm1`` argument is never positive.
    """
    tau = np.asarray(tau, dtype=float)
    slow, fast = min(gamma_e, gamma_r), max(gamma_e, gamma_r)
    if fast == 0 or (fast - slow) / fast < _DEGENERATE_REL:
        return tau * np.exp(-gamma_r * tau)
    x = (fast - slow) * tau
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(x == 0, 1.0, -np.expm1(-x) / np.where(x == 0, 1.0, x))
    return np.exp(-slow * tau) * tau * ratio


def analytic_off_phase(rho_t0: np.ndarray, gamma_e: float, gamma_r: float,
                       tau):
    """Populations and e-r coherence a time ``tau`` into an OFF phase.

    Closed-form solution of the decay cascade r -> e -> g with no light
    fields::

        ρ_rr = ρ_rr0 exp(-Γr τ)
        ρ_ee = ρ_ee0 exp(-Γe τ) + ρ_rr0 Γr (exp(-Γr τ) - exp(-Γe τ)) / (Γe - Γr)
        ρ_er = ρ_er0 exp(-(Γr + Γe) τ / 2)

    When Γe == Γr (relative difference below 1e-12) the ρ_ee term becomes
    ρ_rr0 Γ τ exp(-Γ τ).  The probe is ignored here; use :func:`evolve` when
    probe repumping during the OFF phase matters.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    rr0 = rho_t0[R, R].real
    ee0 = rho_t0[E, E].real
    er0 = rho_t0[E, R]
    rho_rr = rr0 * np.exp(-gamma_r * tau)
    rho_ee = ee0 * np.exp(-gamma_e * tau) \
        + rr0 * gamma_r * _cascade_kernel(gamma_e, gamma_r, tau)
    rho_er = er0 * np.exp(-0.5 * (gamma_r + gamma_e) * tau)
    return rho_rr, rho_ee, rho_er


def off_phase_integral_residual(rho_t0, gamma_e, gamma_r, tau) -> float:
    """Residual of the integral form of the OFF-phase ρ_ee equation,

        ρ_ee(τ) - [ρ_ee0 + ρ_rr0 (1 - e^{-Γr τ}) - ∫_0^τ Γe ρ_ee(s) ds],

    with ρ_ee taken from :func:`analytic_off_phase` and the integral done by
    adaptive quadrature.  Zero for an exact solution.
    """
    from scipy.integrate import quad

    ee0 = rho_t0[E, E].real
    rr0 = rho_t0[R, R].real

    def ee(s):
        return float(analytic_off_phase(rho_t0, gamma_e, gamma_r, s)[1])

    integral, _ = quad(ee, 0.0, tau, epsabs=1e-14, epsrel=1e-13, limit=200)
    rhs = ee0 + rr0 * (1 - math.exp(-gamma_r * tau)) - gamma_e * integral
    return ee(tau) - rhs


@dataclass(frozen=True)
class DepletionVerdict:
    depleted: bool
    ratio: float


def depletion_check(drive: DriveProfile) -> DepletionVerdict:
    """Does the OFF window last at least one Rydberg lifetime?

    ``ratio`` is (1 - duty) T Γr; advisory only.
    """
    if drive.gamma_r == 0:
        raise ZeroDecayRate("gamma_r must be > 0 for a depletion check")
    ratio = (1.0 - drive.duty) * drive.period * drive.gamma_r
    return DepletionVerdict(ratio >= 1.0, ratio)


# -- steady state (constant drive) ---------------------------------------------

def _steady_system(L):
    """Replace one equation of L x = 0 by the trace condition."""
    A = L.copy()
    A[0, :] = 0.0
    A[0, [0, 4, 8]] = 1.0
    return A


def steady_state(H: np.ndarray, gamma_e: float, gamma_r: float) -> np.ndarray:
    """Stationary density matrix for a constant Hamiltonian.

    Needs ``gamma_e > 0`` for uniqueness.
    """
    A = _steady_system(liouvillian(H, gamma_e, gamma_r))
    b = np.zeros(9, dtype=complex)
    b[0] = 1.0
    return np.linalg.solve(A, b).reshape(3, 3)


def steady_state_sensitivity(H: np.ndarray, dH: np.ndarray, gamma_e: float,
                             gamma_r: float):
    """Steady state and its derivative along the Hamiltonian direction ``dH``.

    Differentiating L(H) rho = 0 with Tr rho fixed gives
    A d(rho) = -(dL) rho with the trace row of the right-hand side zeroed.
    """
    L = liouvillian(H, gamma_e, gamma_r)
    A = _steady_system(L)
    b = np.zeros(9, dtype=complex)
    b[0] = 1.0
    rho = np.linalg.solve(A, b)
    dL = liouvillian(dH, 0.0, 0.0)
    rhs = -(dL @ rho)
    rhs[0] = 0.0
    drho = np.linalg.solve(A, rhs)
    return rho.reshape(3, 3), drho.reshape(3, 3)
