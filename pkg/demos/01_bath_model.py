# Saturation of a TLS bath by a detuned pump tone.
#
# Walk through the closed-form response of a resonator coupled to a
# continuum of two-level systems: how the extra loss and the frequency
# pull change with pump cooperativity C and normalized detuning delta.

import numpy as np

from tlsbath.model import (
    BathParams,
    ThermalEnvironment,
    bath_damping,
    bath_frequency_shift,
    saturated_sigma_z,
    thermal_imbalance,
)

# Population imbalance of a TLS at the resonator frequency, 330 mK.
omega_c = 2 * np.pi * 7.521e9
sz = thermal_imbalance(omega_c, ThermalEnvironment(0.330))
print(f"thermal <sigma_z> at 7.521 GHz, 330 mK: {sz:.4f}")

# A bath in normalized units: rates in units of gamma2.
bath = BathParams(p0=1.0, g=1.0, gamma2=1.0, sigma_z_th=sz)
print(f"zero-power TLS loss p0 g^2 |sz| = {bath_damping(bath, 0.0, 0.0):.4f}")

# A single TLS right under the pump is driven towards zero polarization.
for c in (0.1, 1.0, 10.0, 100.0):
    print(f"  C={c:6g}: resonant TLS <sigma_z> = {saturated_sigma_z(0.0, 0.0, bath, c):+.4f}")

# Loss falls monotonically with C; the pull has an interior maximum.
coops = np.logspace(-2, 4, 7)
print("\n      C     loss(delta=0)   shift(delta=2)")
for c in coops:
    print(f"{c:9.3g}   {bath_damping(bath, 0.0, c):12.5f}   {bath_frequency_shift(bath, 2.0, c):12.5f}")

# The pull is odd in detuning: the resonance moves towards the pump.
deltas = np.array([-5.0, -1.0, 0.0, 1.0, 5.0])
print("\nshift at C=10 vs delta:", np.round(bath_frequency_shift(bath, deltas, 10.0), 5))
