# Fitting a notch-type resonance seen through an imperfect feedline.
#
# The background has a gain slope, a phase offset and a cable delay; the
# resonance circle is rotated by an impedance-mismatch phase. The fit
# recovers the internal loss separately from the coupling.

import numpy as np

from tlsbath.spectroscopy import Background, ResonanceFit, fit_resonance
from tlsbath.synthetic import notch_trace

two_pi = 2 * np.pi
w = two_pi * 7.521e9
truth = ResonanceFit(w, two_pi * 2.0e6, two_pi * 0.6e6, 0.2, Background(0.8, 0.05, 0.3, 2e-8, w))

for noise in (0.0, 0.01):
    trace = notch_trace(truth, noise=noise, rng=1)
    fit = fit_resonance(trace)
    hz = fit.as_hz()
    print(f"noise {noise:4.2f}: f_c = {hz['f_c_hz']:.1f} Hz, gamma_i/2pi = {hz['gamma_i_hz']:.1f} Hz, "
          f"gamma_ext/2pi = {hz['gamma_ext_hz']:.1f} Hz, phi = {fit.coupling_phase:.4f}")

print(f"truth     : gamma_i/2pi = {truth.gamma_i / two_pi:.1f} Hz, gamma_ext/2pi = {truth.gamma_ext / two_pi:.1f} Hz")
