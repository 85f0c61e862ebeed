import numpy as np
import pytest

from tlsbath import oracle
from tlsbath.checks import check_closed_form, check_maxwell_bloch, random_mb_systems
from tlsbath.model import BathParams, bath_damping, bath_frequency_shift, saturated_sigma_z, single_tls_shift
from tlsbath.oracle import (
    ConvergenceError,
    MBSteadyState,
    MBSystem,
    QuadratureError,
    mb_frequency_pull,
    mb_residuals,
    mb_steady_state,
    numeric_bath_integral,
)

UNIT = BathParams(p0=1.0, g=1.0, gamma2=1.0, sigma_z_th=-1.0)


def system(**kw):
    base = dict(omega_c=0.0, omega_p=0.7, omega_q=0.3, g=0.05, kappa=2.0, gamma1=1.0, gamma2=0.8,
                sigma_z_th=-0.6, drive_j=5.0)
    base.update(kw)
    return MBSystem(**base)


class TestSteadyState:
    def test_undriven(self):
        st = mb_steady_state(system(drive_j=0.0))
        assert st.alpha == 0 and st.sigma0 == 0 and st.sigma_z0 == -0.6

    def test_decoupled(self):
        s = system(g=0.0)
        st = mb_steady_state(s)
        assert st.alpha == pytest.approx(s.drive_j / (1j * s.detuning + 0.5 * s.kappa), rel=1e-14)
        assert st.sigma_z0 == -0.6

    def test_strong_drive_matches_saturation_law(self):
        s = system()
        # pick J for a bare-cavity cooperativity near 10
        n_target = 10 * s.gamma1 * s.gamma2 / (4 * s.g**2)
        s = system(drive_j=np.sqrt(n_target * (s.detuning**2 + 0.25 * s.kappa**2)))
        st = mb_steady_state(s)
        coop = 4 * s.g**2 * st.photons / (s.gamma1 * s.gamma2)
        assert 5 < coop < 20
        bath = BathParams.untied(1.0, s.g, s.gamma1, s.gamma2, s.sigma_z_th)
        assert abs(st.sigma_z0 - saturated_sigma_z(s.omega_q, s.omega_p, bath, coop)) < 1e-10
        assert max(mb_residuals(s, st)) < 1e-10

    def test_bounds(self):
        for s in random_mb_systems(20, seed=4):
            st = mb_steady_state(s)
            assert s.sigma_z_th - 1e-15 <= st.sigma_z0 <= 0.0

    def test_non_convergence_raises(self):
        with pytest.raises(ConvergenceError) as info:
            mb_steady_state(random_mb_systems(1, seed=1, coop_range=(1e3, 1e3))[0], max_iter=2)
        assert info.value.residual > 0

    def test_converges_at_extreme_saturation(self):
        s = random_mb_systems(1, seed=2, coop_range=(1e6, 1e6))[0]
        st = mb_steady_state(s)
        assert max(mb_residuals(s, st)) < 1e-10

    def test_invalid_rates(self):
        with pytest.raises(ValueError):
            system(kappa=0.0)


class TestFrequencyPull:
    def test_saturated_gives_zero(self):
        st = MBSteadyState(0.0, 0.0, 0.0)
        assert mb_frequency_pull(system(), st).as_complex() == 0

    def test_resonant_is_imaginary(self):
        s = system(omega_q=0.0)
        z = mb_frequency_pull(s, mb_steady_state(s)).as_complex()
        assert z.real == 0.0 and z.imag != 0.0

    def test_matches_single_tls_shift(self):
        s = system()
        st = mb_steady_state(s)
        bath = BathParams.untied(1.0, s.g, s.gamma1, s.gamma2, s.sigma_z_th)
        a = mb_frequency_pull(s, st).as_complex()
        b = single_tls_shift(s.omega_q, s.omega_c, bath, st.sigma_z0).as_complex()
        assert abs(a - b) <= 1e-12 * abs(b)


class TestBathIntegral:
    def test_unsaturated(self):
        b = BathParams(2.0, 0.5, 1.3, -0.4)
        res = numeric_bath_integral(b, 1.0, 0.0, 0.0)
        assert abs(res.shift) < 1e-12
        assert res.damping == pytest.approx(-2.0 * 0.25 * -0.4, rel=1e-10)

    def test_pure_damping_value(self):
        res = numeric_bath_integral(UNIT, 0.0, 0.0, 3.0)
        assert res.damping == pytest.approx(0.5, rel=1e-6)

    def test_shift_value(self):
        res = numeric_bath_integral(UNIT, 3.0, 0.0, 3.0)
        assert res.shift == pytest.approx(1 / 8, rel=1e-6)

    @pytest.mark.parametrize("coop,delta", [(1e-2, 5.0), (1.0, -2.0), (1e3, 30.0), (1e4, -0.5)])
    def test_window_independence(self, coop, delta):
        a = numeric_bath_integral(UNIT, delta, 0.0, coop)
        w = oracle._window_halfwidth(delta, coop)
        b = numeric_bath_integral(UNIT, delta, 0.0, coop, window=2 * w)
        assert abs(a.shift - b.shift) <= 1e-8 * abs(a.shift)
        assert abs(a.damping - b.damping) <= 1e-8 * abs(a.damping)

    def test_physical_units_scale(self, sio2_row):
        b = BathParams(sio2_row.p0, sio2_row.g, sio2_row.gamma2, -0.5)
        res = numeric_bath_integral(b, b.gamma2 * 2.0, 0.0, 1.0)
        assert res.shift == pytest.approx(bath_frequency_shift(b, 2.0, 1.0), rel=1e-6)
        assert res.damping == pytest.approx(bath_damping(b, 2.0, 1.0), rel=1e-6)

    def test_negative_coop_rejected(self):
        with pytest.raises(ValueError):
            numeric_bath_integral(UNIT, 0.0, 0.0, -1.0)

    def test_failure_reports_achieved_error(self, monkeypatch):
        monkeypatch.setattr(oracle.integrate, "quad", lambda *a, **k: (0.0, 1.0))
        with pytest.raises(QuadratureError) as info:
            numeric_bath_integral(UNIT, 1.0, 0.0, 1.0)
        assert info.value.achieved >= 1.0


def test_closed_form_grid_equivalence():
    rep = check_closed_form()
    assert rep.n_points >= 200
    assert rep.passed, list(rep.lines())


def test_maxwell_bloch_equivalence():
    sig, pull = check_maxwell_bloch()
    lo, hi = sig.extra["coop_range"]
    assert lo < 1e-2 and hi > 1e2
    assert sig.passed and pull.passed
