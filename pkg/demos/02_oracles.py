# Checking the closed forms against two independent computations.
#
# 1. Direct adaptive quadrature of the saturated bath response.
# 2. The stationary state of the driven cavity + single TLS equations of
#    motion, solved numerically.

from tlsbath import checks
from tlsbath.model import BathParams
from tlsbath.oracle import numeric_bath_integral
from tlsbath.model import bath_damping, bath_frequency_shift

bath = BathParams(p0=1.0, g=1.0, gamma2=1.0, sigma_z_th=-0.5)

# One point by hand: C = 3, pump at delta = 2.
res = numeric_bath_integral(bath, 2.0, 0.0, 3.0)
print(f"quadrature shift   {res.shift:.12f}   closed form {bath_frequency_shift(bath, 2.0, 3.0):.12f}")
print(f"quadrature damping {res.damping:.12f}   closed form {bath_damping(bath, 2.0, 3.0):.12f}")

# The full grid used by `verify`: 8 decades of C times 27 detunings.
rep = checks.check_closed_form()
for line in rep.lines():
    print(line)
print(f"({rep.elapsed:.1f} s)")

# Fifty random single-TLS systems spanning C in [1e-3, 1e3].
sigma, pull = checks.check_maxwell_bloch(checks.random_mb_systems(50, seed=0))
for line in list(sigma.lines()) + list(pull.lines()):
    print(line)
print("cooperativity range: {:.2g} .. {:.2g}".format(*sigma.extra["coop_range"]))
