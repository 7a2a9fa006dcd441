"""Quasi-free semigroup generators and the covariance flow they induce.

The correlation matrix obeys the linear matrix ODE

    dG/dt = A^H G + G A + B

with diagonal ``A``. Entry by entry this decouples into scalar equations
``dG_mn/dt = r_mn G_mn + B_mn`` with ``r_mn = conj(a_m) + a_n``, which is
what both the closed-form and the RK4 evolvers work with.
"""
import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidStep, NoNegativeDirection, ZeroLambda
from .states import SingleModeState

RESONANCE_TOL = 1e-12
CP_TOL = 1e-12
NEGATIVITY_TOL = 1e-10
TIME_RESOLUTION = 1e-9


def _rate(name, value):
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be finite and non-negative, got {value!r}")
    return value


def _lam(value):
    value = complex(value)
    if not cmath.isfinite(value):
        raise ValueError(f"lam must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SingleModeParams:
    omega: float = 0.0
    eta: float = 0.0
    sigma: float = 0.0
    lam: complex = 0j

    def __post_init__(self):
        for name in ("omega", "eta", "sigma"):
            object.__setattr__(self, name, _rate(name, getattr(self, name)))
        object.__setattr__(self, "lam", _lam(self.lam))


@dataclass(frozen=True)
class TwoModeParams:
    """Dissipative mode 1 (``omega1, eta, sigma, lam``) and free mode 2 (``omega2``)."""

    omega1: float = 0.0
    omega2: float = 0.0
    eta: float = 0.0
    sigma: float = 0.0
    lam: complex = 0j

    def __post_init__(self):
        for name in ("omega1", "omega2", "eta", "sigma"):
            object.__setattr__(self, name, _rate(name, getattr(self, name)))
        object.__setattr__(self, "lam", _lam(self.lam))

    def mode1(self):
        return SingleModeParams(omega=self.omega1, eta=self.eta, sigma=self.sigma, lam=self.lam)


def kossakowski(params):
    """Dissipator coefficient matrix ``[[eta, conj(lam)], [lam, sigma]]``."""
    lam = params.lam
    return linalg.hermitian([[params.eta, lam.conjugate()], [lam, params.sigma]])


def cp_discriminant(params):
    return params.eta * params.sigma - abs(params.lam) ** 2


def is_completely_positive(params):
    return params.eta >= 0 and params.sigma >= 0 and cp_discriminant(params) >= -CP_TOL


@dataclass(frozen=True, eq=False)
class Drift:
    """Generator of the covariance flow: diagonal ``A`` and inhomogeneity ``B``."""

    A: np.ndarray
    B: np.ndarray

    @property
    def dim(self):
        return self.B.shape[0]

    @property
    def rates(self):
        """Matrix ``r_mn = conj(a_m) + a_n`` of entrywise growth rates."""
        a = np.diagonal(self.A)
        return np.conj(a)[:, None] + a[None, :]

    def restrict(self, which):
        """Drift of the mode-``which`` block; exact because ``A`` is diagonal."""
        sl = slice(2 * (which - 1), 2 * which)
        return Drift(self.A[sl, sl].copy(), self.B[sl, sl].copy())


def _noise(params):
    lam = params.lam
    return linalg.hermitian([[params.eta, -lam.conjugate()], [-lam, params.sigma]])


def drift_single(params):
    damp = params.sigma - params.eta
    A = 0.5 * np.diag([damp + 2j * params.omega, damp - 2j * params.omega])
    return Drift(A, _noise(params))


def drift_two(params):
    damp = 0.5 * (params.sigma - params.eta)
    A = np.diag([damp + 1j * params.omega1, damp - 1j * params.omega1,
                 1j * params.omega2, -1j * params.omega2])
    B = np.zeros((4, 4), dtype=complex)
    B[:2, :2] = _noise(params)
    return Drift(A, B)


def drift_for(params):
    if isinstance(params, TwoModeParams):
        return drift_two(params)
    return drift_single(params)


def _integral_factor(rates, times):
    """``(exp(r t) - 1)/r`` with the resonant limit ``t`` for ``|r| < RESONANCE_TOL``."""
    rt = rates * times
    resonant = np.abs(rates) < RESONANCE_TOL
    safe = np.where(resonant, 1.0, rates)
    return np.where(resonant, times + 0j, np.expm1(rt) / safe)


def flow_closed(G0, drift, times):
    """Exact solution at every time in ``times``.

    ``G0`` may carry leading batch axes; the result has shape
    ``(len(times),) + G0.shape``.
    """
    G0 = np.asarray(G0, dtype=complex)
    t = np.asarray(times, dtype=float).reshape((-1,) + (1,) * G0.ndim)
    R = drift.rates
    G = np.exp(R * t) * G0 + _integral_factor(R, t) * drift.B
    return linalg.hermitian(G, check=False)


def evolve_closed(G0, drift, t):
    if t < 0:
        raise ValueError("t must be non-negative")
    return flow_closed(G0, drift, [t])[0]


def rk4_trajectory(G0, rates, B, dt, n_steps, stride=1):
    """Fixed-step RK4 for ``dG/dt = rates * G + B`` (entrywise), broadcasting over leading axes.

    Returns the states after every ``stride`` steps, starting with ``G0``.
    """
    G = np.array(G0, dtype=complex)

    def f(X):
        return rates * X + B

    out = [G.copy()]
    for k in range(1, n_steps + 1):
        k1 = f(G)
        k2 = f(G + 0.5 * dt * k1)
        k3 = f(G + 0.5 * dt * k2)
        k4 = f(G + dt * k3)
        G = G + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % stride == 0:
            out.append(G.copy())
    return np.stack(out)


def evolve_numeric(G0, drift, t, dt):
    """Classic RK4 with fixed step ``dt``; the final step is shortened to land on ``t``."""
    if dt <= 0:
        raise InvalidStep(f"dt must be positive, got {dt!r}")
    if t < 0:
        raise ValueError("t must be non-negative")
    G0 = linalg.hermitian(G0, check=False)
    if t == 0:
        return G0
    n_full = int(math.floor(t / dt))
    rest = t - n_full * dt
    if rest <= 1e-12 * t:
        rest = 0.0
    G = rk4_trajectory(G0, drift.rates, drift.B, dt, n_full, stride=max(n_full, 1))[-1]
    if rest > 0:
        G = rk4_trajectory(G, drift.rates, drift.B, rest, 1)[-1]
    return linalg.hermitian(G, check=False)


def worst_boundary_state(params, beta):
    """Boundary state (``det G = 0``) whose phase makes ``Re(alpha lam) = -|alpha||lam|``."""
    lam = params.lam
    if abs(lam) < 1e-15:
        raise ZeroLambda("lam = 0: the worst-case phase is undefined")
    if not beta > 1:
        raise ValueError(f"beta must exceed 1, got {beta!r}")
    alpha = -math.sqrt(beta * (beta - 1.0)) * lam.conjugate() / abs(lam)
    return SingleModeState.from_moments(beta, alpha)


def boundary_violation_rate(params, beta):
    """``eta(beta-1) + sigma beta - 2 sqrt(beta(beta-1)) |lam|``.

    Negative means a boundary state with the worst phase leaves the physical
    set immediately.
    """
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta!r}")
    return (params.eta * (beta - 1.0) + params.sigma * beta
            - 2.0 * math.sqrt(beta * (beta - 1.0)) * abs(params.lam))


def most_violating_beta(params):
    """Infimum over ``beta >= 1`` of ``boundary_violation_rate`` and where it is reached.

    With ``beta = (1 + cosh v)/2`` the rate is
    ``((eta+sigma) cosh v - (eta-sigma))/2 - |lam| sinh v``. Returns
    ``(beta_star, rate_inf)``; ``beta_star`` is ``inf`` when the infimum is
    only approached as ``beta -> inf``. The infimum is negative for every
    non-CP generator with ``eta > sigma``.
    """
    a = 0.5 * (params.eta + params.sigma)
    b = abs(params.lam)
    shift = 0.5 * (params.eta - params.sigma)
    if b < a:
        v = math.atanh(b / a)
        return 0.5 * (1.0 + math.cosh(v)), math.sqrt(a * a - b * b) - shift
    if b == a:
        return (1.0, 0.0) if a == 0 else (math.inf, -shift)
    return math.inf, -math.inf


def generator_action(G, drift):
    """Right-hand side ``A^H G + G A + B`` of the flow."""
    return drift.rates * np.asarray(G, dtype=complex) + drift.B


def quadratic_form_rate(state, drift, Psi):
    """``d/dt <Psi|G(t)|Psi>`` at ``t = 0``."""
    G = getattr(state, "G", state)
    Psi = np.asarray(Psi, dtype=complex)
    return float(np.vdot(Psi, generator_action(G, drift) @ Psi).real)


def negative_eigvec_B(drift):
    """Most negative eigenvalue of the mode-1 noise block and its eigenvector.

    The eigenvector's first non-negligible component is made real positive.
    """
    B = drift.B[:2, :2]
    w, V = linalg.eigh(B)
    if w[0] >= -1e-12:
        raise NoNegativeDirection("B is positive semidefinite: no escaping direction")
    psi = V[:, 0]
    lead = psi[np.argmax(np.abs(psi) > 1e-12)]
    psi = psi * (abs(lead) / lead)
    return float(w[0]), psi / np.linalg.norm(psi)


def time_grid(horizon, dt):
    """``0, dt, 2 dt, ...`` ending exactly at ``horizon``."""
    if dt <= 0:
        raise InvalidStep(f"dt must be positive, got {dt!r}")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    n = int(math.floor(horizon / dt + 1e-9))
    times = np.arange(n + 1) * dt
    if horizon - times[-1] > 1e-9 * max(horizon, 1.0):
        times = np.append(times, horizon)
    else:
        times[-1] = horizon
    return times


def _negative(G):
    return linalg.min_eigenvalue(G) < -NEGATIVITY_TOL * linalg.scale(G)


def first_negativity_time(G0, drift, horizon, dt, chunk=2048):
    """Earliest time at which ``G(t)`` loses positivity, or ``None`` within ``horizon``.

    Scans the grid ``0, dt, 2 dt, ...`` and bisects the first offending
    interval down to ``TIME_RESOLUTION``.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    times = time_grid(horizon, dt)
    G0 = np.asarray(G0, dtype=complex)
    for start in range(0, len(times), chunk):
        ts = times[start:start + chunk]
        hits = np.nonzero(_negative(flow_closed(G0, drift, ts)))[0]
        if hits.size:
            i = start + int(hits[0])
            break
    else:
        return None
    if i == 0:
        return 0.0
    lo, hi = float(times[i - 1]), float(times[i])
    while hi - lo > TIME_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if _negative(evolve_closed(G0, drift, mid)):
            hi = mid
        else:
            lo = mid
    return hi
