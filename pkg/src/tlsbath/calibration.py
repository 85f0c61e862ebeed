"""Photon-number calibration of the measurement chain.

A temperature-controlled 50 Ohm load emits Johnson-Nyquist noise; the
spectral density read after the amplification chain is::

    S(T) = G * (hbar w / (exp(hbar w / k_B T) - 1) + S_amp)

Fitting a temperature sweep gives the chain gain ``G`` and the added noise
``S_amp`` (quoted as a temperature ``S_amp / k_B``). With the line
attenuation known, generator power converts to an input photon flux and then
to an intracavity photon number.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from tlsbath import constants

__all__ = [
    "CalibrationError",
    "NoiseSweepPoint",
    "ChainCalibration",
    "bose_occupation",
    "johnson_nyquist_psd",
    "fit_chain",
    "two_point_chain",
    "infer_attenuation",
    "generator_to_flux",
    "intracavity_photons",
    "photons_from_generator",
]


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSweepPoint:
    temperature: float  # K
    psd: float  # W/Hz

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if not self.psd > 0:
            raise ValueError("psd must be > 0")


@dataclass(frozen=True)
class ChainCalibration:
    gain_db: float
    added_noise_kelvin: float
    attenuation_db: float = 0.0

    def __post_init__(self):
        if self.added_noise_kelvin < 0:
            raise ValueError("added noise must be >= 0")

    @property
    def gain(self):
        return constants.db_to_linear(self.gain_db)

    @property
    def s_amp(self):
        """Added noise spectral density in W/Hz."""
        return constants.K_B * self.added_noise_kelvin


def bose_occupation(temperature, omega):
    x = constants.HBAR * omega / (constants.K_B * np.asarray(temperature, dtype=float))
    return 1.0 / np.expm1(x)


def johnson_nyquist_psd(temperature, omega_c, cal):
    temperature = np.asarray(temperature, dtype=float)
    if np.any(temperature < 0):
        raise ValueError("temperature must be >= 0")
    with np.errstate(divide="ignore", over="ignore"):
        occ = np.where(temperature > 0, bose_occupation(np.where(temperature > 0, temperature, 1.0), omega_c), 0.0)
    out = cal.gain * (constants.HBAR * omega_c * occ + cal.s_amp)
    return out if out.ndim else float(out)


def _thermal_power(temps, omega_c):
    return constants.HBAR * omega_c * bose_occupation(temps, omega_c)


def fit_chain(sweep, omega_c, attenuation_db=0.0, relative_weights=True):
    """Least-squares gain and added noise from a noise temperature sweep.

    The model is linear in ``(G, G * S_amp)``. By default residuals are
    relative (``(model - psd) / psd``), matching multiplicative measurement
    noise. Point order and duplicated temperatures (up/down cycles) do not
    matter.
    """
    temps = np.array([p.temperature for p in sweep], dtype=float)
    psd = np.array([p.psd for p in sweep], dtype=float)
    distinct = np.unique(temps)
    if distinct.size < 2:
        raise CalibrationError("noise sweep needs at least two distinct temperatures")
    if distinct.size < 4 or distinct.max() / distinct.min() < 3:
        warnings.warn("noise sweep is short: >= 4 temperatures spanning a factor >= 3 recommended",
                      stacklevel=2)
    x = _thermal_power(temps, omega_c)
    a = np.column_stack([x, np.ones_like(x)])
    b = psd
    if relative_weights:
        a = a / psd[:, None]
        b = np.ones_like(psd)
    # the two columns differ by ~40 orders of magnitude; equilibrate first
    norms = np.linalg.norm(a, axis=0)
    coef, *_ = np.linalg.lstsq(a / norms, b, rcond=None)
    gain, offset = coef / norms
    if gain <= 0:
        raise CalibrationError(f"fitted gain is not positive ({gain:g})")
    added = offset / gain / constants.K_B
    if added < 0:
        warnings.warn(f"fitted added noise is negative ({added:g} K); clipped to 0", stacklevel=2)
        added = 0.0
    return ChainCalibration(constants.linear_to_db(gain), float(added), attenuation_db)


def two_point_chain(t1, s1, t2, s2, omega_c):
    """Exact gain and added noise from two (temperature, psd) readings."""
    x1, x2 = _thermal_power(t1, omega_c), _thermal_power(t2, omega_c)
    gain = (s2 - s1) / (x2 - x1)
    s_amp = s1 / gain - x1
    return ChainCalibration(constants.linear_to_db(gain), s_amp / constants.K_B)


def infer_attenuation(generator_dbm, measured_dbm, gain_db):
    """Input-line attenuation from a through measurement off resonance.

    ``measured_dbm`` is the power read after the amplification chain.
    """
    return generator_dbm - (measured_dbm - gain_db)


def generator_to_flux(power_dbm, attenuation_db, omega_p):
    """Photon flux (photons/s) reaching the resonator input."""
    power = constants.dbm_to_watts(np.asarray(power_dbm, dtype=float) - attenuation_db)
    out = power / (constants.HBAR * omega_p)
    return out if np.ndim(out) else float(out)


def intracavity_photons(input_flux, kappa_c, kappa_tot, detuning):
    """Mean photon number ``4 kc |a_in|^2 / (k_tot^2 + 4 D^2)``."""
    if not kappa_tot > 0:
        raise ValueError("kappa_tot must be > 0")
    detuning = np.asarray(detuning, dtype=float)
    out = 4.0 * kappa_c * np.asarray(input_flux, dtype=float) / (kappa_tot**2 + 4.0 * detuning**2)
    return out if np.ndim(out) else float(out)


def photons_from_generator(power_dbm, cal, resonance, omega_p):
    """Intracavity photons for a tone at ``omega_p`` given a resonance fit.

    The coupling rate is the fitted ``gamma_ext`` and the total decay rate
    the fitted ``gamma_total``.
    """
    flux = generator_to_flux(power_dbm, cal.attenuation_db, omega_p)
    return intracavity_photons(flux, resonance.gamma_ext, resonance.gamma_total, omega_p - resonance.omega_c)
