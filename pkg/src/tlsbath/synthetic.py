"""Synthetic measurement data for tests and demos."""

import numpy as np

from tlsbath.calibration import NoiseSweepPoint, johnson_nyquist_psd
from tlsbath.spectroscopy import SpectrumTrace, transmission_model

__all__ = ["notch_trace", "noise_sweep"]


def notch_trace(resonance, n_points=401, span_linewidths=20.0, noise=0.0, rng=None):
    """Trace of ``resonance`` centred on ``omega_c``, spanning ``span_linewidths`` total linewidths.

    ``noise`` is the standard deviation added to each quadrature, in units of
    the background amplitude.
    """
    half = 0.5 * span_linewidths * resonance.gamma_total
    omega = np.linspace(resonance.omega_c - half, resonance.omega_c + half, n_points)
    t = transmission_model(omega, resonance)
    if noise:
        rng = np.random.default_rng(rng)
        amp = resonance.background.amplitude
        t = t + noise * amp * (rng.standard_normal(n_points) + 1j * rng.standard_normal(n_points))
    sigma = np.full(n_points, noise * resonance.background.amplitude) if noise else None
    return SpectrumTrace(omega / (2 * np.pi), t, sigma)


def noise_sweep(cal, temperatures, omega_c, noise=0.0, rng=None):
    """Johnson-Nyquist readings with relative Gaussian noise."""
    temperatures = np.asarray(temperatures, dtype=float)
    psd = np.asarray(johnson_nyquist_psd(temperatures, omega_c, cal), dtype=float)
    if noise:
        rng = np.random.default_rng(rng)
        psd = psd * (1.0 + noise * rng.standard_normal(psd.shape))
    return [NoiseSweepPoint(t, s) for t, s in zip(temperatures, psd)]
