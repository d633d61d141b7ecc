import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonstats.analytic import (
    _ladder,
    amplitude_ode_g2tau,
    com_analytic_g2,
    com_analytic_nbar,
    com_rates,
    com_steady_amplitudes,
    jc_analytic_g2,
    jc_analytic_nbar,
    jc_rates,
    jc_steady_amplitudes,
    ladder_residuals,
    printed_com_amplitudes,
    printed_com_g2,
)
from photonstats.correlations import g2_tau, g2_zero, mean_photon, schwarz_violation
from photonstats.errors import ParameterError, SingularPointError, UndefinedCorrelationError
from photonstats.hilbert import SpaceSpec, mode_operators
from photonstats.liouville import steadystate, system_liouvillian
from photonstats.models import ModelParams

JC = SpaceSpec(3, 0)
COM = SpaceSpec(3, 3)
DIP_MINUS = -25 * (1 + math.sqrt(5))
DIP_PLUS = -25 * (1 - math.sqrt(5))

pytestmark = pytest.mark.filterwarnings("ignore:Omega/kappa")


def numeric(model, p, space):
    l = system_liouvillian(model, p, space)
    rho = steadystate(l, check_unique=False)
    a = mode_operators(space).a
    return mean_photon(rho, a), g2_zero(rho, a)


def jc_at(dc, **kw):
    base = dict(g=50.0, omega=0.1, gamma=1.0)
    base.update(kw)
    return ModelParams.jc(dc, 50.0, **base)


def com_at(nu, delta=-100.0, **kw):
    base = dict(g=50.0, omega=0.1, gamma=1.0, Gamma=0.1)
    base.update(kw)
    return ModelParams.com(delta, nu, **base)


class TestClosedForms:
    @given(st.floats(-100, 100), st.floats(0, 10), st.floats(0.01, 0.5))
    def test_linear_cavity_limit(self, dc, gamma, omega):
        p = ModelParams.jc(dc, 10.0, g=0.0, omega=omega, gamma=gamma + 0.1)
        amp = jc_steady_amplitudes(p)
        assert amp.a1g == pytest.approx(-1j * omega / complex(1.0, dc), rel=1e-12)
        assert jc_analytic_g2(p) == pytest.approx(1.0, abs=1e-9)
        q = ModelParams.com(-dc, 30.0, g=0.0, omega=omega, gamma=gamma + 0.1, Gamma=0.1)
        assert com_steady_amplitudes(q).a10 == pytest.approx(-1j * omega / complex(1.0, 30.0 - dc), rel=1e-12)
        assert com_analytic_g2(q) == pytest.approx(1.0, abs=1e-9)

    def test_zero_drive(self):
        amp = jc_steady_amplitudes(jc_at(10.0, omega=0.0))
        assert amp.a0g == 1 and amp.a1g == 0 and amp.a0e == 0 and amp.a1e == 0 and amp.a2g == 0
        assert jc_analytic_nbar(jc_at(10.0, omega=0.0)) == 0
        assert com_analytic_nbar(com_at(50.0, omega=0.0)) == 0
        with pytest.raises(UndefinedCorrelationError):
            jc_analytic_g2(jc_at(10.0, omega=0.0))

    def test_nbar_free_cavity(self):
        assert jc_analytic_nbar(ModelParams.jc(0.0, 3.0, g=0.0, omega=0.2, gamma=1.0)) == pytest.approx(0.04)
        assert com_analytic_nbar(ModelParams.com(-40.0, 40.0, g=0.0, omega=0.2, gamma=1.0)) == pytest.approx(0.04)

    @given(st.floats(-100, 100), st.floats(0.1, 15), st.floats(0, 80), st.floats(0.001, 0.5))
    def test_nbar_is_one_photon_probability(self, dc, gamma, g, omega):
        p = ModelParams.jc(dc, 50.0, g=g, omega=omega, gamma=gamma)
        assert jc_analytic_nbar(p) == pytest.approx(jc_steady_amplitudes(p).p1, rel=1e-12)
        q = ModelParams.com(-dc, 50.0, g=g, omega=omega, gamma=gamma, Gamma=0.1)
        assert com_analytic_nbar(q) == pytest.approx(com_steady_amplitudes(q).p1, rel=1e-12)

    def test_amplitude_ordering(self):
        for p in (jc_at(DIP_MINUS), jc_at(25.0), jc_at(80.0)):
            amp = jc_steady_amplitudes(p)
            assert abs(amp.a2g) < abs(amp.a1g) < 0.5
        for nu in (20.0, 50.0, 150.0):
            amp = com_steady_amplitudes(com_at(nu))
            assert abs(amp.a20) < abs(amp.a10) < 0.5

    @given(st.floats(-150, 150), st.floats(0, 15), st.floats(0, 2), st.floats(0, 80), st.floats(0.001, 0.5))
    def test_ladder_residuals(self, w, gamma, Gamma, g, omega):
        K, G = complex(1.0, w), complex(gamma + Gamma + 0.01, w)
        amps = _ladder(K, G, g, omega)
        r = ladder_residuals(K, G, g, omega, *amps)
        assert np.max(np.abs(r)) <= 1e-10 * omega

    def test_singular_point(self):
        p = ModelParams.jc(5.0, -5.0, g=0.0, omega=0.1, gamma=0.0)
        with pytest.raises(SingularPointError):
            jc_analytic_nbar(p)
        with pytest.raises(SingularPointError):
            jc_steady_amplitudes(p)
        q = ModelParams.com(-30.0, 30.0, g=0.0, omega=0.1, gamma=0.0, Gamma=0.0)
        with pytest.raises(SingularPointError):
            com_analytic_g2(q)

    def test_weak_drive_warning(self):
        with pytest.warns(UserWarning, match="weak-drive"):
            jc_steady_amplitudes(jc_at(0.0, omega=1.0))

    def test_rates(self):
        p = ModelParams.com(-70.0, 50.0, gamma=4.0, Gamma=0.1)
        assert com_rates(p) == (complex(1.0, -20.0), complex(4.1, -20.0))
        q = ModelParams.jc(3.0, 5.0, gamma=2.0)
        assert jc_rates(q) == (complex(1.0, 3.0), complex(2.0, 8.0))


class TestFigureClaims:
    def test_jc_dip_and_dark_state(self):
        assert jc_analytic_g2(jc_at(DIP_MINUS)) < 0.1
        assert jc_analytic_g2(jc_at(DIP_PLUS)) < 0.1
        assert jc_analytic_g2(jc_at(-50.0)) > 100

    @pytest.mark.parametrize("target", [DIP_MINUS, DIP_PLUS])
    def test_jc_dip_location(self, target):
        grid = np.arange(target - 5, target + 5, 0.01)
        vals = [jc_analytic_g2(jc_at(d)) for d in grid]
        assert abs(grid[int(np.argmin(vals))] - target) <= 0.5

    def test_com_statistics(self):
        assert com_analytic_g2(com_at(100.0)) > 100
        for nu in (50.0, 150.0):
            assert com_analytic_g2(com_at(nu)) < 0.1
        for centre in (100 - 25 * math.sqrt(2), 100 + 25 * math.sqrt(2)):
            grid = np.linspace(centre - 6, centre + 6, 241)
            vals = np.array([com_analytic_g2(com_at(nu)) for nu in grid])
            i = int(np.argmax(vals))
            assert 0 < i < grid.size - 1 and abs(grid[i] - centre) <= 2
            assert vals[i] > 10

    def test_com_nbar_suppressed_at_tunneling_point(self):
        n = {nu: com_analytic_nbar(com_at(nu)) for nu in (90.0, 100.0, 110.0)}
        assert n[100.0] < n[90.0] and n[100.0] < n[110.0]

    def test_jc_matches_master_equation_at_figure_point(self):
        p = jc_at(25.0)
        nbar, g2 = numeric("jc", p, JC)
        assert jc_analytic_nbar(p) == pytest.approx(nbar, rel=0.05)
        assert jc_analytic_g2(p) == pytest.approx(g2, rel=0.05)

    def test_com_matches_master_equation_at_figure_point(self):
        p = com_at(50.0)
        nbar, g2 = numeric("com-effective", p, COM)
        assert com_analytic_nbar(p) == pytest.approx(nbar, rel=0.05)
        assert com_analytic_g2(p) == pytest.approx(g2, rel=0.05)

    @pytest.mark.parametrize("model,p", [
        ("jc", jc_at(25.0)), ("jc", jc_at(-90.0)), ("jc", jc_at(60.0)),
        ("com-effective", com_at(50.0)), ("com-effective", com_at(135.0)), ("com-effective", com_at(180.0)),
    ])
    def test_deviation_shrinks_with_drive(self, model, p):
        analytic = (jc_analytic_nbar, jc_analytic_g2) if model == "jc" else (com_analytic_nbar, com_analytic_g2)
        space = JC if model == "jc" else COM
        devs = []
        for om in (0.1, 0.05, 0.025, 0.0125):
            q = p.replace(omega=om)
            num = numeric(model, q, space)
            devs.append(max(abs(f(q) - x) / x for f, x in zip(analytic, num)))
        assert all(a > b for a, b in zip(devs, devs[1:])), devs


class TestPrintedForms:
    @given(st.floats(-150, 50), st.floats(0, 200), st.floats(1, 80), st.floats(0.1, 15), st.floats(0, 2))
    def test_printed_g2_identity(self, delta, nu, g, gamma, Gamma):
        p = ModelParams.com(delta, nu, g=g, omega=0.1, gamma=gamma, Gamma=Gamma)
        amp = printed_com_amplitudes(p)
        assert printed_com_g2(p) == pytest.approx(2 * amp.p2 / amp.p1**2, rel=1e-12)

    def test_printed_form_misses_direct_drive(self):
        """Without the |1,0,g> -> |2,0,g> drive the closed form misplaces the dip depth."""
        p = com_at(50.0)
        _, g2 = numeric("com-effective", p, COM)
        assert com_analytic_g2(p) == pytest.approx(g2, rel=0.05)
        assert g2 / printed_com_g2(p) > 5.0

    def test_printed_one_photon_amplitudes_agree(self):
        p = com_at(75.0)
        a, b = printed_com_amplitudes(p), com_steady_amplitudes(p)
        assert a.a10 == pytest.approx(b.a10) and a.a01 == pytest.approx(b.a01)


class TestAmplitudeOde:
    FIG4 = ModelParams.com(-70.0, 50.0, g=20.0, omega=4.0, gamma=4.0, Gamma=0.1)

    def test_initial_value(self):
        for p in (self.FIG4, com_at(50.0), com_at(120.0)):
            curve = amplitude_ode_g2tau(p, [0.0, 1.0])
            assert curve.values[0] == pytest.approx(com_analytic_g2(p), rel=1e-9)
        q = jc_at(DIP_PLUS)
        assert amplitude_ode_g2tau(q, [0.0], model="jc").values[0] == pytest.approx(jc_analytic_g2(q), rel=1e-9)

    def test_long_delay_limit(self):
        curve = amplitude_ode_g2tau(self.FIG4, [0.0, 20.0, 60.0])
        assert abs(curve.values[-1] - 1) <= 0.02

    def test_violation_at_figure_params(self):
        curve = amplitude_ode_g2tau(self.FIG4, np.linspace(0, 2, 401))
        assert schwarz_violation(curve, tol=1e-3)

    def test_matches_regression_at_weak_drive(self):
        tau = np.linspace(0, 2, 201)
        p = self.FIG4.replace(omega=0.1)
        space = SpaceSpec(4, 4)
        l = system_liouvillian("com-effective", p, space)
        num = g2_tau(l, steadystate(l), mode_operators(space).a, tau)
        ana = amplitude_ode_g2tau(p, tau)
        assert np.max(np.abs(ana.values - num.values) / num.values) < 0.10
        assert bool(schwarz_violation(num, 1e-3)) == bool(schwarz_violation(ana, 1e-3))

    def test_rejects_bad_input(self):
        with pytest.raises(ParameterError):
            amplitude_ode_g2tau(self.FIG4, [1.0, 0.5])
        with pytest.raises(ParameterError):
            amplitude_ode_g2tau(self.FIG4, [0.0], model="full")

    def test_no_warning_leak_in_weak_regime(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            amplitude_ode_g2tau(com_at(50.0), [0.0, 0.1])
