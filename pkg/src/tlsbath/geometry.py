"""Electrostatics of a periodic interdigitated capacitor and the LC circuit.

The capacitor is modelled as an infinite array of zero-thickness fingers of
width ``w`` separated by gaps ``s`` (period ``a = 2 (s + w)``) lying on a
substrate of relative permittivity ``eps_substrate``, with vacuum above.

Two amplitude conventions appear for the first-harmonic potential. The
shorthand ``V0 sin(2 pi x / a) exp(-2 pi |z| / a)`` is what :func:`potential`
returns; charge and energy use the truncated Fourier series with amplitude
``V0 / 2`` (electrodes held at +-V0/2), which is the one that gives a charge
``p eps0 (1 + eps_s) V0`` per finger.
"""

from dataclasses import dataclass

import numpy as np

from tlsbath import constants

__all__ = [
    "CapacitorGeometry",
    "LumpedCircuit",
    "LaplaceSolution",
    "LaplaceConvergenceError",
    "potential",
    "surface_charge",
    "capacitance",
    "lc_resonance",
    "confinement_depth",
    "laplace_bvp_solve",
]


@dataclass(frozen=True)
class CapacitorGeometry:
    """Interdigitated capacitor.

    ``area_S`` is authoritative when given; otherwise it is taken as
    ``n_pairs * finger_length_p * period_a`` (one finger pair per period).
    """

    finger_width_w: float
    gap_s: float
    finger_length_p: float = 1.0
    n_pairs: int = 1
    eps_substrate: float = 11.7
    area_S: float = None

    def __post_init__(self):
        for name in ("finger_width_w", "gap_s", "finger_length_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if self.eps_substrate < 1:
            raise ValueError("eps_substrate must be >= 1")
        if self.area_S is None:
            object.__setattr__(self, "area_S", self.n_pairs * self.finger_length_p * self.period_a)
        elif not self.area_S > 0:
            raise ValueError("area_S must be > 0")

    @classmethod
    def from_period(cls, period_a, eps_substrate=11.7, area_S=None, metallization=0.5, **kw):
        """Geometry with period ``a`` and finger fraction ``w / (w + s)``."""
        half = 0.5 * period_a
        return cls(finger_width_w=metallization * half, gap_s=(1.0 - metallization) * half,
                   eps_substrate=eps_substrate, area_S=area_S, **kw)

    @property
    def period_a(self):
        return 2.0 * (self.gap_s + self.finger_width_w)


@dataclass(frozen=True)
class LumpedCircuit:
    inductance_L: float
    capacitance_C: float
    meander_length_l: float = None

    def __post_init__(self):
        if not (self.inductance_L > 0 and self.capacitance_C > 0):
            raise ValueError("L and C must be > 0")

    @classmethod
    def from_meander(cls, length, capacitance_C):
        """Meander inductor estimate ``L ~ mu0 * l``."""
        return cls(constants.MU0 * length, capacitance_C, length)


def potential(x, z, v0, geom):
    a = geom.period_a
    x, z = np.asarray(x, dtype=float), np.asarray(z, dtype=float)
    return v0 * np.sin(2 * np.pi * x / a) * np.exp(-2 * np.pi * np.abs(z) / a)


def surface_charge(x, v0, geom):
    """First-harmonic charge density on the electrode plane (C/m^2).

    Both half-spaces contribute, vacuum with weight 1 and the substrate with
    ``eps_substrate``, for a potential of amplitude ``v0 / 2``.
    """
    a = geom.period_a
    k = 2 * np.pi / a
    return constants.EPS0 * (1.0 + geom.eps_substrate) * 0.5 * v0 * k * np.sin(k * np.asarray(x, dtype=float))


def capacitance(geom):
    return geom.area_S * constants.EPS0 * (1.0 + geom.eps_substrate) / geom.period_a


def lc_resonance(circ):
    """Resonance frequency in Hz."""
    return 1.0 / (2 * np.pi * np.sqrt(circ.inductance_L * circ.capacitance_C))


def confinement_depth(geom):
    return geom.period_a / (2 * np.pi)


class LaplaceConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


@dataclass
class LaplaceSolution:
    """Result of :func:`laplace_bvp_solve`.

    ``fourier_coefficients[n - 1]`` is ``B_n`` of the expansion
    ``V(x, 0) = sum_n B_n sin(2 pi n x / a)``, in units of ``v0``.
    ``capacitance_numeric`` scales the per-period charge to the device area
    ``area_S`` exactly as the closed form does, so the two are directly
    comparable.
    """

    fourier_coefficients: np.ndarray
    energy_fraction_first_harmonic: float
    capacitance_numeric: float
    charge_per_length: float
    energy_per_length: float
    potential: np.ndarray
    x: np.ndarray
    z: np.ndarray
    iterations: int
    residual: float


def laplace_bvp_solve(geom, grid_resolution=64, v0=1.0, height_periods=3.0, tol=1e-10,
                      omega=None, max_iter=200_000):
    """Solve the electrode-plane boundary-value problem on one period.

    Red-black successive over-relaxation on a uniform grid, periodic in x,
    with V = 0 at ``z = +-height_periods * a``. Electrode nodes on ``z = 0``
    are held at +-v0/2; the gap nodes carry no free charge, which the
    flux-conservative stencil (vacuum above, substrate below) enforces.

    Energy and charge come from the discrete operator, so they satisfy the
    discrete Green identity ``W = q v0 / 2`` per period.
    """
    n = int(grid_resolution)
    if n < 64:
        raise ValueError("grid_resolution must be >= 64 points per period")
    a = geom.period_a
    h = a / n
    nz_half = int(round(height_periods * n))
    x = -0.5 * a + h * np.arange(n)
    z = h * np.arange(-nz_half, nz_half + 1)
    j0 = nz_half
    eps_s = geom.eps_substrate

    # link permittivities; vertical link k joins rows k and k+1
    e_vert = np.where(np.arange(2 * nz_half) < j0, eps_s, 1.0)[:, None]
    e_side = np.where(z < 0, eps_s, 1.0)
    e_side[j0] = 0.5 * (1.0 + eps_s)
    e_side = e_side[:, None]

    s, w = geom.gap_s, geom.finger_width_w
    tiny = 1e-9 * h
    plus = (x >= 0.5 * s - tiny) & (x <= 0.5 * s + w + tiny)
    minus = (x <= -0.5 * s + tiny) & (x >= -0.5 * s - w - tiny)

    fixed = np.zeros((z.size, n), dtype=bool)
    fixed[0] = fixed[-1] = True
    fixed[j0] = plus | minus
    dirichlet = np.zeros((z.size, n))
    dirichlet[j0, plus] = 0.5 * v0
    dirichlet[j0, minus] = -0.5 * v0

    # start from the first-harmonic approximation
    xx, zz = np.meshgrid(x, z)
    v = 0.5 * v0 * np.sin(2 * np.pi * xx / a) * np.exp(-2 * np.pi * np.abs(zz) / a)
    v[fixed] = dirichlet[fixed]

    e_up = np.zeros((z.size, 1))
    e_dn = np.zeros((z.size, 1))
    e_up[:-1] = e_vert
    e_dn[1:] = e_vert
    diag = 2 * e_side + e_up + e_dn

    if n % 2:
        raise ValueError("grid_resolution must be even for red-black ordering")
    if omega is None:
        omega = 2.0 / (1.0 + np.sin(np.pi / (2 * nz_half)))
    ii, jj = np.meshgrid(np.arange(n), np.arange(z.size))
    free = ~fixed
    gains = [np.where(((ii + jj) % 2 == c) & free, omega / diag, 0.0) for c in (0, 1)]

    lap = np.empty_like(v)
    tmp = np.empty_like(v)

    def flux(v, out):
        # out = sum over links of eps_link * (V_neighbour - V)
        np.subtract(v[1:], v[:-1], out=tmp[:-1])
        tmp[:-1] *= e_vert
        out[:] = 0.0
        out[:-1] += tmp[:-1]
        out[1:] -= tmp[:-1]
        out[:, 1:-1] += e_side * (v[:, 2:] + v[:, :-2] - 2 * v[:, 1:-1])
        out[:, 0] += e_side[:, 0] * (v[:, 1] + v[:, -1] - 2 * v[:, 0])
        out[:, -1] += e_side[:, 0] * (v[:, 0] + v[:, -2] - 2 * v[:, -1])
        return out

    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        for gain in gains:
            v += gain * flux(v, lap)
        if it % 25 == 0:
            res = np.max(np.abs(flux(v, lap)[free])) / v0
            if res < tol:
                break
    else:
        raise LaplaceConvergenceError("SOR did not converge", res)

    f = flux(v, lap)
    # charge per unit length on the positive electrode: -eps0 * net inflow
    q = -constants.EPS0 * f[j0, plus].sum()
    dv_x = np.roll(v, -1, axis=1) - v
    dv_z = np.diff(v, axis=0)
    energy = 0.5 * constants.EPS0 * ((e_side * dv_x**2).sum() + (e_vert * dv_z**2).sum())

    plane = v[j0] / v0
    harmonics = np.arange(1, n // 2)
    coeffs = 2.0 / n * np.sin(2 * np.pi * np.outer(harmonics, x) / a) @ plane
    # harmonic n stores (pi/2) eps0 (1 + eps_s) n B_n^2 per period and unit length
    e1 = 0.5 * np.pi * constants.EPS0 * (1.0 + eps_s) * (coeffs[0] * v0) ** 2
    cap = q / v0 * geom.area_S / a
    return LaplaceSolution(
        fourier_coefficients=coeffs,
        energy_fraction_first_harmonic=float(e1 / energy),
        capacitance_numeric=float(cap),
        charge_per_length=float(q),
        energy_per_length=float(energy),
        potential=v,
        x=x,
        z=z,
        iterations=it,
        residual=float(res),
    )
