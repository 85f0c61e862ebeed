# Interdigitated capacitor: where the electric energy lives.
#
# Fingers of period a = 1 um with equal width and gap on silicon. A
# finite-difference Laplace solve gives the share of field energy in the
# first spatial harmonic, which decays away from the surface over a / 2 pi.

from tlsbath.geometry import (
    CapacitorGeometry,
    LumpedCircuit,
    capacitance,
    confinement_depth,
    laplace_bvp_solve,
    lc_resonance,
)

geom = CapacitorGeometry.from_period(1e-6, eps_substrate=11.7, area_S=1.07e-9)
print(f"finger width {geom.finger_width_w * 1e9:.0f} nm, gap {geom.gap_s * 1e9:.0f} nm")
print(f"field confined within {confinement_depth(geom) * 1e9:.0f} nm of the surface")

for n in (64, 96, 128):
    sol = laplace_bvp_solve(geom, grid_resolution=n)
    print(f"grid {n:4d}: first-harmonic energy fraction {sol.energy_fraction_first_harmonic:.4f} "
          f"({sol.iterations} SOR sweeps)")

# First-harmonic capacitance and the LC frequency with a 5 nH meander.
c = capacitance(geom)
f = lc_resonance(LumpedCircuit(5e-9, c))
print(f"C = {c * 1e12:.4f} pF, f_LC = {f / 1e9:.3f} GHz")
