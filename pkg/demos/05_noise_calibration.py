# Calibrating the output chain from Johnson-Nyquist noise.
#
# A matched load is swept in temperature while the noise density at the
# amplifier output is recorded. Gain and added noise follow from a linear
# fit of power against the thermal occupation.

import numpy as np

from tlsbath.calibration import ChainCalibration, fit_chain, generator_to_flux
from tlsbath.synthetic import noise_sweep

w = 2 * np.pi * 6e9
true = ChainCalibration(61.8, 4.4)

temps = np.geomspace(0.1, 10.0, 20)
readings = noise_sweep(true, np.r_[temps, temps[::-1]], w, noise=0.01, rng=3)
cal = fit_chain(readings, w, attenuation_db=52.0)
print(f"G = {cal.gain_db:.3f} dB (true 61.8), S_amp/k_B = {cal.added_noise_kelvin:.3f} K (true 4.4)")

# With the input attenuation known, a generator setting becomes a photon flux.
print(f"-60 dBm at the generator -> {generator_to_flux(-60.0, cal.attenuation_db, w):.4g} photons/s")
