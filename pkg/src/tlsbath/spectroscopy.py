"""Notch-type transmission model and resonance fitting.

The probe transmission past a resonator side-coupled to a feedline, with a
smooth background from the measurement chain, is modelled as::

    T(w) = A (1 + alpha (w - w_ref) / w_ref) exp(i (theta0 - tau (w - w_ref)))
           * [1 - (G_ext / cos(phi)) exp(i phi) / (G + 2 i (w - w_c))]

``phi`` is the impedance-mismatch angle caused by standing waves on the
feedline. The real coupling rate is ``G_ext`` (the projection of the complex
coupling ``G_ext exp(i phi) / cos(phi)``), so ``G = G_i + G_ext`` holds with
real rates. After removing the background the response is a circle through
1 of diameter ``G_ext / (G cos(phi))``.

Rates and frequencies in :class:`ResonanceFit` are angular; traces are
stored in Hz.
"""

from dataclasses import dataclass, replace

import numpy as np

from tlsbath.lm import levenberg_marquardt

__all__ = [
    "FitError",
    "SpectrumTrace",
    "Background",
    "ResonanceFit",
    "transmission_model",
    "fit_resonance",
    "fit_power_sweep",
    "fit_circle",
    "remove_background",
]


class FitError(RuntimeError):
    """Fit failed; ``diagnostics`` carries whatever was known at the time."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SpectrumTrace:
    probe_frequencies: np.ndarray  # Hz
    transmission: np.ndarray
    sigma: np.ndarray = None

    def __post_init__(self):
        f = np.asarray(self.probe_frequencies, dtype=float)
        t = np.asarray(self.transmission, dtype=complex)
        if f.ndim != 1 or f.shape != t.shape:
            raise ValueError("frequencies and transmission must be 1-D and equally long")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("probe frequencies must be strictly increasing")
        object.__setattr__(self, "probe_frequencies", f)
        object.__setattr__(self, "transmission", t)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != f.shape or np.any(s <= 0):
                raise ValueError("sigma must be positive and match the trace length")
            object.__setattr__(self, "sigma", s)

    @property
    def omega(self):
        return 2 * np.pi * self.probe_frequencies

    def __len__(self):
        return self.probe_frequencies.size


@dataclass(frozen=True)
class Background:
    amplitude: float = 1.0
    amplitude_slope: float = 0.0
    phase_offset: float = 0.0
    delay: float = 0.0  # s; phase slope -d(phase)/d(omega)
    omega_ref: float = 0.0

    def __call__(self, omega):
        dw = np.asarray(omega, dtype=float) - self.omega_ref
        slope = self.amplitude_slope * dw / self.omega_ref if self.omega_ref else 0.0
        return self.amplitude * (1.0 + slope) * np.exp(1j * (self.phase_offset - self.delay * dw))


@dataclass(frozen=True)
class ResonanceFit:
    """Fitted notch resonance; all rates and frequencies in rad/s."""

    omega_c: float
    gamma_total: float
    gamma_ext: float
    coupling_phase: float = 0.0
    background: Background = Background()
    residual_norm: float = 0.0
    gamma_ext_pinned: bool = False

    @property
    def gamma_i(self):
        return self.gamma_total - self.gamma_ext

    @property
    def circle_diameter(self):
        return self.gamma_ext / (self.gamma_total * np.cos(self.coupling_phase))

    def as_hz(self):
        """Resonance frequency and linewidths divided by 2 pi."""
        k = 1.0 / (2 * np.pi)
        return {
            "f_c_hz": self.omega_c * k,
            "gamma_total_hz": self.gamma_total * k,
            "gamma_ext_hz": self.gamma_ext * k,
            "gamma_i_hz": self.gamma_i * k,
        }


def transmission_model(omega, fit):
    dw = np.asarray(omega, dtype=float) - fit.omega_c
    phi = fit.coupling_phase
    resonant = fit.gamma_ext / np.cos(phi) * np.exp(1j * phi) / (fit.gamma_total + 2j * dw)
    return fit.background(omega) * (1.0 - resonant)


def remove_background(omega, transmission, background):
    return np.asarray(transmission) / background(omega)


def fit_circle(z):
    """Algebraic (Kasa) circle fit in the complex plane.

    Returns ``(center, radius)``.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    a = np.column_stack([x, y, np.ones_like(x)])
    b = x**2 + y**2
    (c0, c1, c2), *_ = np.linalg.lstsq(a, b, rcond=None)
    center = 0.5 * (c0 + 1j * c1)
    radius = np.sqrt(c2 + abs(center) ** 2)
    return complex(center), float(radius)


def _initial_guess(omega, t, gamma_ext_prior):
    n = omega.size
    edge = max(2, n // 10)
    idx = np.r_[0:edge, n - edge:n]
    amp = float(np.mean(np.abs(t[idx])))
    phase = np.unwrap(np.angle(t))
    # off-resonant phase is linear in omega; its slope is -tau
    p = np.polyfit(omega[idx], phase[idx], 1)
    tau = -p[0]
    omega_ref = 0.5 * (omega[0] + omega[-1])
    theta0 = float(np.polyval(p, omega_ref))
    bg = Background(amp, 0.0, theta0, tau, omega_ref)
    tn = t / bg(omega)

    mag = np.abs(tn)
    i_min = int(np.argmin(mag))
    omega_c = omega[i_min]
    depth = 1.0 - mag[i_min]
    if depth <= 0:
        raise FitError("no resonance dip found", depth=depth)
    # -3 dB width of the dip in |1 - T|^2
    dip = np.abs(1.0 - tn) ** 2
    half = 0.5 * dip[i_min]
    above = dip >= half
    lo = i_min
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i_min
    while hi < n - 1 and above[hi + 1]:
        hi += 1
    width = max(omega[hi] - omega[lo], omega[1] - omega[0])
    gamma = float(width)
    gamma_ext = gamma_ext_prior if gamma_ext_prior is not None else depth * gamma
    return bg, omega_c, gamma, min(gamma_ext, 0.999 * gamma)


def fit_resonance(trace, gamma_ext_prior=None, min_linewidths=5.0, max_iter=500):
    """Fit the notch model to a complex transmission trace.

    Real and imaginary parts are fitted jointly, weighted by ``trace.sigma``
    when present. With ``gamma_ext_prior`` (rad/s) the coupling rate is held
    at that value.
    """
    if len(trace) < 16:
        raise FitError("trace too short for fitting", n_points=len(trace))
    omega = trace.omega
    t = trace.transmission
    weights = 1.0 / trace.sigma if trace.sigma is not None else np.ones(omega.size)

    bg0, wc0, gamma0, gext0 = _initial_guess(omega, t, gamma_ext_prior)
    span = omega[-1] - omega[0]
    if span < min_linewidths * gamma0:
        raise FitError("trace spans fewer than the required number of linewidths",
                       span_linewidths=span / gamma0, required=min_linewidths)

    # scaled parameters keep the normal equations well conditioned
    w_ref = bg0.omega_ref
    scale = gamma0
    pinned = gamma_ext_prior is not None

    def unpack(p):
        amp, aslope, th0, tau_s, xc, lg, lge, phi = p
        if pinned:
            gext = gamma_ext_prior
        else:
            gext = np.exp(lge) * scale
        return ResonanceFit(
            omega_c=w_ref + xc * scale,
            gamma_total=np.exp(lg) * scale,
            gamma_ext=gext,
            coupling_phase=phi,
            background=Background(amp, aslope, th0, tau_s / scale, w_ref),
            gamma_ext_pinned=pinned,
        )

    def residual(p):
        model = transmission_model(omega, unpack(p))
        d = (model - t) * weights
        return np.concatenate([d.real, d.imag])

    p0 = np.array([
        bg0.amplitude, 0.0, bg0.phase_offset, bg0.delay * scale,
        (wc0 - w_ref) / scale, np.log(gamma0 / scale), np.log(max(gext0, 1e-6 * gamma0) / scale), 0.0,
    ])

    def feasible(p):
        return abs(p[7]) < 0.49 * np.pi and p[0] > 0

    def jac(p):
        return _jacobian(residual, p, pinned)

    res = levenberg_marquardt(residual, p0, jac, feasible=feasible, max_iter=max_iter,
                              xtol=1e-12, ftol=1e-15)
    if not res.converged:
        raise FitError("resonance fit did not converge", message=res.message, cost=res.cost)
    fit = replace(unpack(res.x), residual_norm=res.residual_norm)
    if fit.gamma_total <= 0 or fit.gamma_i < -1e-9 * fit.gamma_total:
        raise FitError("negative extracted linewidth", gamma_total=fit.gamma_total, gamma_i=fit.gamma_i)
    return fit


def _jacobian(residual, p, pinned):
    h = 1e-7 * np.maximum(np.abs(p), 1.0)
    cols = []
    for i in range(p.size):
        if pinned and i == 6:
            cols.append(np.zeros_like(residual(p)))
            continue
        e = np.zeros_like(p)
        e[i] = h[i]
        cols.append((residual(p + e) - residual(p - e)) / (2 * h[i]))
    return np.column_stack(cols)


def fit_power_sweep(traces, shared_gamma_ext=True):
    """Fit a set of traces of one resonator taken at different pump powers.

    With ``shared_gamma_ext`` the coupling rate, a geometric property, is
    estimated once (median of free per-trace fits) and then pinned for every
    trace.
    """
    free = [fit_resonance(tr) for tr in traces]
    if not shared_gamma_ext:
        return free
    gext = float(np.median([f.gamma_ext for f in free]))
    return [fit_resonance(tr, gamma_ext_prior=gext) for tr in traces]
