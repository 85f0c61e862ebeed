"""Numerical cross-checks of the closed-form bath response.

Three independent routes are provided:

* :func:`mb_steady_state` solves the stationary semi-classical (factorized)
  Maxwell-Bloch equations of a driven cavity coupled to one TLS,
* :func:`mb_frequency_pull` reads the complex frequency pull off the
  adiabatically eliminated fluctuation equation,
* :func:`numeric_bath_integral` integrates single-TLS pulls over a flat
  spectral distribution with adaptive Gauss-Kronrod quadrature.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from tlsbath.model import ComplexShift

__all__ = [
    "ConvergenceError",
    "QuadratureError",
    "MBSystem",
    "MBSteadyState",
    "mb_steady_state",
    "mb_residuals",
    "mb_frequency_pull",
    "numeric_bath_integral",
]


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual, iterations):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved abs error {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class MBSystem:
    """Driven cavity + single TLS in the frame rotating at ``omega_p``.

    ``kappa`` is the bare cavity energy decay rate (external + residual
    internal loss). ``drive_j`` is the coherent drive amplitude, in rad/s
    (so that ``|alpha|**2`` is a photon number).
    """

    omega_c: float
    omega_p: float
    omega_q: float
    g: float
    kappa: float
    gamma1: float
    gamma2: float
    sigma_z_th: float
    drive_j: float

    def __post_init__(self):
        for name in ("kappa", "gamma1", "gamma2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def detuning(self):
        return self.omega_p - self.omega_c


@dataclass(frozen=True)
class MBSteadyState:
    alpha: complex
    sigma0: complex
    sigma_z0: float
    iterations: int = 0
    step_history: tuple = ()

    @property
    def photons(self):
        return abs(self.alpha) ** 2


def _sigma_z_of_photons(sys, photons):
    c = 4.0 * sys.g**2 * photons / (sys.gamma1 * sys.gamma2)
    g2 = sys.gamma2**2
    return sys.sigma_z_th * (1.0 - g2 * c / ((sys.omega_q - sys.omega_p) ** 2 + g2 * (1.0 + c)))


def _state_from_sigma_z(sys, sigma_z0):
    # stationary coherence sigma0(alpha) substituted into the field equation
    tls_den = 1j * (sys.omega_p - sys.omega_q) + sys.gamma2
    alpha = sys.drive_j / (1j * sys.detuning + 0.5 * sys.kappa - sys.g**2 * sigma_z0 / tls_den)
    sigma0 = sys.g * alpha * sigma_z0 / tls_den
    return alpha, sigma0


def mb_residuals(sys, state):
    """Relative residuals of the three stationary equations.

    Each residual is normalized by the sum of magnitudes of the terms in its
    equation, so a value of 1e-12 means cancellation to 12 digits.
    """
    a, s, sz = state.alpha, state.sigma0, state.sigma_z0
    t1 = ((-1j * sys.detuning - 0.5 * sys.kappa) * a, sys.g * s, sys.drive_j)
    t2 = ((-1j * (sys.omega_p - sys.omega_q) - sys.gamma2) * s, sys.g * a * sz)
    t3 = (-2.0 * sys.g * (np.conj(a) * s + a * np.conj(s)), -sys.gamma1 * (sz - sys.sigma_z_th))
    out = []
    for terms in (t1, t2, t3):
        scale = sum(abs(t) for t in terms)
        out.append(abs(sum(terms)) / scale if scale > 0 else 0.0)
    return tuple(out)


def mb_steady_state(sys, relaxation=0.5, tol=1e-14, max_iter=100_000):
    """Self-consistent stationary solution by damped fixed-point iteration.

    The unknown iterated on is the intracavity photon number ``|alpha|^2``,
    starting from the bare (TLS-free) cavity response.
    """
    if sys.drive_j == 0.0:
        return MBSteadyState(0j, 0j, float(sys.sigma_z_th), 0)

    bare = sys.drive_j / (1j * sys.detuning + 0.5 * sys.kappa)
    photons = abs(bare) ** 2
    step = np.inf
    history = []
    for it in range(1, max_iter + 1):
        sz = _sigma_z_of_photons(sys, photons)
        alpha, _ = _state_from_sigma_z(sys, sz)
        target = abs(alpha) ** 2
        step = abs(target - photons) / max(photons, target)
        photons = (1.0 - relaxation) * photons + relaxation * target
        history.append(step)
        if step < tol:
            break
    else:
        raise ConvergenceError("Maxwell-Bloch fixed point did not converge", step, max_iter)

    sz = float(_sigma_z_of_photons(sys, photons))
    alpha, sigma0 = _state_from_sigma_z(sys, sz)
    state = MBSteadyState(complex(alpha), complex(sigma0), sz, it, tuple(history))
    worst = max(mb_residuals(sys, state))
    if worst > 1e-10:
        raise ConvergenceError("Maxwell-Bloch residuals above 1e-10", worst, it)
    return state


def mb_frequency_pull(sys, state):
    """Complex pull from the adiabatically eliminated TLS fluctuation.

    The modulated field obeys ``d(da)/dt = (-kappa/2 + K) da`` with
    ``K = g^2 sz0 / (-i(omega_c - omega_q) - gamma2)``; the TLS contribution
    to ``-i * (complex frequency)`` is ``K``, hence the pull is ``i K``.
    """
    k = sys.g**2 * state.sigma_z0 / (-1j * (sys.omega_c - sys.omega_q) - sys.gamma2)
    return ComplexShift.from_complex(1j * k)


def _window_halfwidth(delta, coop):
    return 1e3 * (max(1.0, np.sqrt(1.0 + coop)) + abs(delta))


def numeric_bath_integral(bath, omega_p, omega_c, coop, window=None, epsrel=1e-12, limit=2000):
    """Integrate single-TLS pulls over TLS frequency with quadrature.

    Works in the scaled variable ``x = (omega_q - omega_c) / gamma2``::

        d_omega_c = (p0 g^2 sz_th / 2 pi) * Int dx (1 - C / ((x - delta)^2 + 1 + C)) / (x + i)

    The integral runs over ``[-W, W]`` with breakpoints at the cavity
    (``x = 0``) and the pump (``x = delta``). Outside the window only the
    unsaturated Lorentzian tail ``-pi + 2 arctan(W)`` of the imaginary part
    is kept; the saturated remainder there decays as ``x**-3`` or faster.

    ``window`` overrides the half-width ``W`` (in units of gamma2).
    """
    coop = float(coop)
    if coop < 0:
        raise ValueError("cooperativity must be >= 0")
    delta = (omega_p - omega_c) / bath.gamma2
    w = _window_halfwidth(delta, coop) if window is None else float(window)
    b2 = 1.0 + coop

    def sat(x):
        return 1.0 - coop / ((x - delta) ** 2 + b2)

    def re_part(x):
        return sat(x) * x / (x * x + 1.0)

    def im_part(x):
        return -sat(x) / (x * x + 1.0)

    # breakpoints around the two features, then geometric growth outwards
    features = ((0.0, 1.0), (delta, np.sqrt(b2)))
    pts = {-w, w, 0.0, delta}
    for c, width in features:
        for k in range(0, 60):
            d = width * 2.0**k
            if d >= w:
                break
            pts.update({c - d, c + d})
    edges = np.array(sorted(p for p in pts if -w <= p <= w))

    abs_floor = 1e-15 * np.pi
    re_tot = im_tot = 0.0
    err_tot = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        for fn, acc in ((re_part, "re"), (im_part, "im")):
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    val, err = integrate.quad(fn, lo, hi, epsabs=abs_floor, epsrel=epsrel, limit=limit)
                except integrate.IntegrationWarning as exc:
                    val, err = integrate.quad(fn, lo, hi, epsabs=abs_floor, epsrel=epsrel, limit=limit,
                                              full_output=1)[:2]
                    if err > 1e-9 * np.pi:
                        raise QuadratureError(f"quadrature failed on [{lo:g}, {hi:g}]: {exc}", err) from None
            err_tot += err
            if acc == "re":
                re_tot += val
            else:
                im_tot += val

    if err_tot > 1e-9 * np.pi:
        raise QuadratureError("accumulated quadrature error too large", err_tot)

    # analytic tail of the unsaturated part: Int_{|x|>W} -1/(x^2+1) dx
    im_tot += -(np.pi - 2.0 * np.arctan(w))

    scale = bath.p0 * bath.g**2 * bath.sigma_z_th / (2.0 * np.pi)
    return ComplexShift(scale * re_tot, scale * im_tot)
