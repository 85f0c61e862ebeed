"""Closed form versus oracle comparisons shared by ``verify`` and the tests."""

import time
from dataclasses import dataclass, field

import numpy as np

from tlsbath import model
from tlsbath.oracle import MBSystem, mb_frequency_pull, mb_residuals, mb_steady_state, numeric_bath_integral

__all__ = ["CheckReport", "closed_form_grid", "check_closed_form", "random_mb_systems", "check_maxwell_bloch"]

# relative errors are taken against max(|value|, ZERO_FLOOR * |p0 g^2 sz_th|)
# so the exactly vanishing shift at delta = 0 has a well defined error
ZERO_FLOOR = 1e-9


@dataclass
class CheckReport:
    name: str
    n_points: int
    max_errors: dict
    tolerance: float
    elapsed: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(e < self.tolerance for e in self.max_errors.values())

    def lines(self):
        for key, err in self.max_errors.items():
            yield f"{self.name}.{key}: max_err={err:.3e} tol={self.tolerance:.0e} n={self.n_points}"


def closed_form_grid(dense=False):
    """Cooperativity decades 1e-3..1e4 crossed with detunings in [-50, 50]."""
    coops = 10.0 ** np.arange(-3, 5)
    n_delta = 101 if dense else 26
    deltas = np.union1d(np.linspace(-50.0, 50.0, n_delta), [0.0])
    cc, dd = np.meshgrid(coops, deltas)
    return cc.ravel(), dd.ravel()


def _rel(a, b, floor):
    return np.abs(a - b) / np.maximum(np.abs(b), floor)


def check_closed_form(bath=None, dense=False, tolerance=1e-6):
    if bath is None:
        bath = model.BathParams(p0=1.0, g=1.0, gamma2=1.0, sigma_z_th=-0.5)
    coops, deltas = closed_form_grid(dense)
    omega_c = 0.0
    floor = ZERO_FLOOR * abs(bath.p0 * bath.g**2 * bath.sigma_z_th)
    t0 = time.perf_counter()
    num_s = np.empty(coops.size)
    num_d = np.empty(coops.size)
    for i, (c, d) in enumerate(zip(coops, deltas)):
        res = numeric_bath_integral(bath, omega_c + d * bath.gamma2, omega_c, c)
        num_s[i], num_d[i] = res.shift, res.damping
    elapsed = time.perf_counter() - t0
    cf_s = model.bath_frequency_shift(bath, deltas, coops)
    cf_d = model.bath_damping(bath, deltas, coops)
    errs = {"shift": float(np.max(_rel(cf_s, num_s, floor))), "damping": float(np.max(_rel(cf_d, num_d, floor)))}
    return CheckReport("closed_form_vs_quadrature", coops.size, errs, tolerance, elapsed)


def random_mb_systems(n=50, seed=0, coop_range=(1e-3, 1e3)):
    """Random single-TLS systems whose bare-cavity cooperativity is log-uniform in ``coop_range``."""
    rng = np.random.default_rng(seed)
    systems = []
    lo, hi = np.log10(coop_range)
    for _ in range(n):
        g = 10.0 ** rng.uniform(-2, -0.5)
        kappa = 10.0 ** rng.uniform(0, 1)
        gamma2 = 10.0 ** rng.uniform(-0.5, 0.5)
        gamma1 = 2.0 * gamma2 * rng.uniform(0.5, 1.0)
        detuning = rng.uniform(-2, 2) * kappa
        omega_q = rng.uniform(-5, 5) * gamma2
        sigma_z_th = -rng.uniform(0.05, 1.0)
        target = 10.0 ** rng.uniform(lo, hi)
        photons = target * gamma1 * gamma2 / (4.0 * g**2)
        drive = np.sqrt(photons * (detuning**2 + 0.25 * kappa**2))
        systems.append(MBSystem(0.0, detuning, omega_q, g, kappa, gamma1, gamma2, sigma_z_th, drive))
    return systems


def check_maxwell_bloch(systems=None, tol_sigma=1e-10, tol_pull=1e-12):
    """Stationary Maxwell-Bloch state against the saturation law and the single-TLS pull."""
    if systems is None:
        systems = random_mb_systems()
    t0 = time.perf_counter()
    err_sz = err_pull = err_res = 0.0
    coops = []
    for s in systems:
        st = mb_steady_state(s)
        bath = model.BathParams.untied(1.0, s.g, s.gamma1, s.gamma2, s.sigma_z_th)
        coop = 4.0 * s.g**2 * st.photons / (s.gamma1 * s.gamma2)
        coops.append(coop)
        sz = model.saturated_sigma_z(s.omega_q, s.omega_p, bath, coop)
        err_sz = max(err_sz, abs(st.sigma_z0 - sz))
        pull = mb_frequency_pull(s, st).as_complex()
        ref = model.single_tls_shift(s.omega_q, s.omega_c, bath, st.sigma_z0).as_complex()
        err_pull = max(err_pull, abs(pull - ref) / abs(ref))
        err_res = max(err_res, max(mb_residuals(s, st)))
    elapsed = time.perf_counter() - t0
    sigma = CheckReport("maxwell_bloch", len(systems), {"sigma_z": err_sz, "residual": err_res}, tol_sigma, elapsed)
    pull = CheckReport("maxwell_bloch", len(systems), {"pull": err_pull}, tol_pull, elapsed)
    sigma.extra["coop_range"] = (min(coops), max(coops))
    return sigma, pull
