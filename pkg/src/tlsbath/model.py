"""Closed-form response of a resonator coupled to a flat, pumped TLS bath.

All rates and frequencies are angular (rad/s). Spectral densities are per
unit angular frequency, so ``p0 * g**2`` is a rate.

The bath-integrated results are written in terms of the normalized pump
detuning ``delta = (omega_p - omega_c) / gamma2`` and the cooperativity
``C = 4 n g**2 / (gamma1 gamma2)``::

    shift   = -(p0 g^2 sz_th / 2) * C/sqrt(1+C) * delta / (delta^2 + (1+sqrt(1+C))^2)
    damping = -p0 g^2 sz_th * [1 - C/sqrt(1+C) * (1+sqrt(1+C)) / (delta^2 + (1+sqrt(1+C))^2)]

The complex pull is ``shift + 1j * damping / 2``.
"""

from dataclasses import dataclass

import numpy as np

from tlsbath import constants

__all__ = [
    "ThermalEnvironment",
    "BathParams",
    "PumpCondition",
    "ComplexShift",
    "thermal_imbalance",
    "cooperativity",
    "saturated_sigma_z",
    "single_tls_shift",
    "bath_frequency_shift",
    "bath_damping",
    "bath_complex_shift",
    "bath_shift_from_detuning",
    "damping_bracket",
    "ground_state_population",
]


@dataclass(frozen=True)
class ThermalEnvironment:
    """Bath temperature in kelvin. Use :meth:`zero` for the T = 0 limit."""

    temperature: float

    def __post_init__(self):
        if not self.temperature >= 0.0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.temperature == 0.0 and not getattr(self, "_zero_ok", False):
            raise ValueError("temperature must be > 0; use ThermalEnvironment.zero()")

    @classmethod
    def zero(cls):
        obj = object.__new__(cls)
        object.__setattr__(obj, "_zero_ok", True)
        object.__setattr__(obj, "temperature", 0.0)
        return obj


def thermal_imbalance(omega_q, env):
    """Equilibrium population difference ``-tanh(hbar omega_q / 2 k_B T)``."""
    omega_q = np.asarray(omega_q, dtype=float)
    if np.any(omega_q <= 0):
        raise ValueError("omega_q must be > 0")
    if env.temperature == 0.0:
        out = -np.ones_like(omega_q)
    else:
        x = constants.HBAR * omega_q / (2.0 * constants.K_B * env.temperature)
        out = -np.tanh(x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BathParams:
    """TLS bath parameters.

    ``gamma1`` defaults to ``2 * gamma2``. Passing it explicitly unties the
    two rates; the physical constraint ``gamma2 >= gamma1 / 2`` still holds.
    Build with :meth:`untied` to make that intent explicit.
    """

    p0: float
    g: float
    gamma2: float
    sigma_z_th: float
    gamma1: float = None

    def __post_init__(self):
        if self.gamma1 is None:
            object.__setattr__(self, "gamma1", 2.0 * self.gamma2)
        for name in ("p0", "g", "gamma1", "gamma2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.gamma2 < 0.5 * self.gamma1 * (1.0 - 1e-12):
            raise ValueError("gamma2 must be >= gamma1 / 2")
        if not -1.0 <= self.sigma_z_th <= 0.0:
            raise ValueError(f"sigma_z_th must lie in [-1, 0], got {self.sigma_z_th}")

    @classmethod
    def untied(cls, p0, g, gamma1, gamma2, sigma_z_th):
        return cls(p0=p0, g=g, gamma2=gamma2, sigma_z_th=sigma_z_th, gamma1=gamma1)

    @classmethod
    def at_temperature(cls, p0, g, gamma2, omega_c, env):
        """Tie gamma1 = 2 gamma2 and freeze sigma_z_th at (omega_c, T)."""
        return cls(p0=p0, g=g, gamma2=gamma2, sigma_z_th=thermal_imbalance(omega_c, env))

    @property
    def gamma_c0(self):
        """Zero-temperature, zero-power TLS damping ``p0 g**2``."""
        return self.p0 * self.g**2


@dataclass(frozen=True)
class PumpCondition:
    n_photons: float
    detuning: float = 0.0  # omega_p - omega_c

    def __post_init__(self):
        if np.any(np.asarray(self.n_photons) < 0):
            raise ValueError("n_photons must be >= 0")


@dataclass(frozen=True)
class ComplexShift:
    """Complex cavity-frequency pull. ``damping`` is twice the imaginary part."""

    real_part: float
    imag_part: float

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z)
        re, im = z.real, z.imag
        if z.ndim == 0:
            re, im = float(re), float(im)
        return cls(re, im)

    @property
    def shift(self):
        return self.real_part

    @property
    def damping(self):
        return 2.0 * self.imag_part

    def as_complex(self):
        return self.real_part + 1j * self.imag_part


def cooperativity(pump, bath):
    return 4.0 * np.asarray(pump.n_photons) * bath.g**2 / (bath.gamma1 * bath.gamma2)


def _check_coop(coop):
    coop = np.asarray(coop, dtype=float)
    if np.any(coop < 0):
        raise ValueError("cooperativity must be >= 0")
    return coop


def saturated_sigma_z(omega_q, omega_p, bath, coop):
    """Population difference of a TLS at ``omega_q`` under a pump at ``omega_p``."""
    coop = _check_coop(coop)
    g2 = bath.gamma2**2
    detuning = np.asarray(omega_q, dtype=float) - omega_p
    out = bath.sigma_z_th * (1.0 - g2 * coop / (detuning**2 + g2 * (1.0 + coop)))
    return out if np.ndim(out) else float(out)


def single_tls_shift(omega_q, omega_c, bath, sigma_z):
    """Complex pull ``g^2 sz / (omega_q - omega_c + i gamma2)`` from one TLS."""
    z = bath.g**2 * np.asarray(sigma_z) / (np.asarray(omega_q) - omega_c + 1j * bath.gamma2)
    return ComplexShift.from_complex(z)


def _root_terms(coop):
    root = np.sqrt(1.0 + coop)
    return coop / root, 1.0 + root


def bath_frequency_shift(bath, delta, coop):
    coop = _check_coop(coop)
    delta = np.asarray(delta, dtype=float)
    ratio, b = _root_terms(coop)
    out = -0.5 * bath.p0 * bath.g**2 * bath.sigma_z_th * ratio * delta / (delta**2 + b**2)
    return out if np.ndim(out) else float(out)


def damping_bracket(delta, coop):
    """Saturation factor of the bath damping; lies in [0, 1]."""
    coop = _check_coop(coop)
    delta = np.asarray(delta, dtype=float)
    ratio, b = _root_terms(coop)
    out = 1.0 - ratio * b / (delta**2 + b**2)
    return out if np.ndim(out) else float(out)


def bath_damping(bath, delta, coop):
    out = -bath.p0 * bath.g**2 * bath.sigma_z_th * np.asarray(damping_bracket(delta, coop))
    return out if np.ndim(out) else float(out)


def bath_complex_shift(bath, delta, coop):
    """Bath-integrated pull as a :class:`ComplexShift`."""
    shift = bath_frequency_shift(bath, delta, coop)
    damping = bath_damping(bath, delta, coop)
    return ComplexShift(shift, 0.5 * damping)


def bath_shift_from_detuning(bath, detuning, coop):
    """Same as :func:`bath_complex_shift` with an angular detuning ``omega_p - omega_c``."""
    return bath_complex_shift(bath, np.asarray(detuning) / bath.gamma2, coop)


def ground_state_population(omega_grid, omega_p, omega_c, bath, coop):
    """Ground-state occupation ``(1 - <sz>) / 2`` across TLS frequencies.

    ``omega_c`` only fixes the origin of the usual plotting axis
    ``omega_q - omega_c`` and does not enter the populations.
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.size == 0:
        return np.empty(0)
    return 0.5 * (1.0 - np.asarray(saturated_sigma_z(grid, omega_p, bath, coop)))
