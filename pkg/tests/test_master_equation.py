import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import table_system
from oracles import (
    PRESET_TABLE,
    SM,
    SP,
    SX,
    SY,
    SZ,
    TWO_PI,
    emission_gamma,
    fsf_sigma_plus_exact,
    fsf_sigma_plus_sx_only,
    fsf_sigma_x_closed,
    l3_closed,
    l_absorption,
    l_emission,
    l_phase,
    phase_noise_gamma,
    random_density,
    random_hermitian,
    random_matrix,
    taylor_exp,
)

from floqdiss.errors import NumericalAbort, StructureError
from floqdiss.kicks import derive_kick_expansion
from floqdiss.master_equation import (
    DissipatorConfig,
    NamedLindbladian,
    dissipator_D,
    ff_superop,
    integrate_me,
    l2_ff,
    l2_fsf,
    l3_rate,
    l3_sigma_xz,
    lindblad_pair,
    me_rhs,
    upper_form_hermiticity_defect,
)
from floqdiss.model import FloquetSystem, FloquetTerm, compute_scales
from floqdiss.operators import PROJ_E, PSI_PLUS
from floqdiss.propagation import TimeGrid

WC = 2 * TWO_PI


def omegas(name):
    return PRESET_TABLE[name]["omegas"]


def w0_of(name):
    h = PRESET_TABLE[name]["H0"]
    return h[0, 0].real if name != "fig3" else h[0, 1].real


def rhs_parts(name):
    s = table_system(name)
    return s, compute_scales(s, WC), derive_kick_expansion(s, WC, 2)


class TestDissipatorD:
    def test_sigma_z(self, rng):
        rho = random_matrix(rng)
        assert np.allclose(dissipator_D(SZ, SZ, rho), 2 * rho - 2 * SZ @ rho @ SZ, atol=1e-14)

    def test_emission_absorption(self, rng):
        rho = random_density(rng)
        ref = rho - SM @ rho @ SP - SP @ rho @ SM
        got = dissipator_D(SM, SP, rho)
        assert np.allclose(got, ref, atol=1e-15)
        assert np.allclose(got, -(l_emission(rho) + l_absorption(rho)), atol=1e-15)

    def test_symmetric_bilinear_traceless(self, rng):
        for _ in range(100):
            a, b, c, rho = (random_matrix(rng) for _ in range(4))
            x = 0.3 - 1.1j
            assert abs(np.trace(dissipator_D(a, b, rho))) <= 1e-12
            assert np.allclose(dissipator_D(a, b, rho), dissipator_D(b, a, rho), atol=1e-13)
            lhs = dissipator_D(a + x * c, b, rho)
            assert np.allclose(lhs, dissipator_D(a, b, rho) + x * dissipator_D(c, b, rho), atol=1e-12)

    def test_named_channels(self, rng):
        rho = random_density(rng)
        assert np.allclose(NamedLindbladian("phase")(rho), l_phase(rho), atol=1e-15)
        assert np.allclose(NamedLindbladian("emission")(rho), l_emission(rho), atol=1e-15)
        assert np.allclose(NamedLindbladian("absorption")(rho), l_absorption(rho), atol=1e-15)
        assert np.array_equal(NamedLindbladian("emission").jump, SM)
        with pytest.raises(ValueError):
            NamedLindbladian("heating")

    def test_lindblad_pair(self, rng):
        rho = random_density(rng)
        assert np.allclose(lindblad_pair(SM, rho), l_emission(rho) + l_absorption(rho), atol=1e-15)


class TestBilinearTerm:
    def test_monochromatic_zero(self, rng):
        s = FloquetSystem(SZ, (FloquetTerm(3 * SX, 40.0),))
        assert np.array_equal(l2_ff(s, WC, 1.3, random_density(rng)), np.zeros((2, 2)))

    def test_phase_noise_rate(self, rng):
        s = table_system("fig2")
        w1, w2 = omegas("fig2")
        for t in rng.uniform(0, 80, 10):
            rho = random_hermitian(rng)
            g = phase_noise_gamma(7.0, -7.0, w1, w2, t)
            expected = 0.5 * g * l_phase(rho)
            for form in ("symmetric", "upper"):
                assert np.abs(l2_ff(s, WC, t, rho, form) - expected).max() <= 1e-12 * max(1.0, abs(g))

    def test_emission_absorption_rate(self, rng):
        s = table_system("fig3")
        w1, w2 = omegas("fig3")
        for t in rng.uniform(0, 80, 10):
            rho = random_hermitian(rng)
            g = emission_gamma(2.0, w1, w2, t)
            expected = g * (l_emission(rho) + l_absorption(rho))
            assert np.abs(l2_ff(s, WC, t, rho) - expected).max() <= 1e-12

    def test_wide_beat_excluded(self, rng):
        s = FloquetSystem(SZ, (FloquetTerm(SZ, 40.0), FloquetTerm(-SZ, 60.0)))
        assert ff_superop(s, 10.0).is_empty()

    def test_initial_damping(self):
        w1, w2 = omegas("fig2")
        half = math.pi / (w2 - w1)
        for t in np.linspace(0.01, 0.99, 25) * half:
            assert phase_noise_gamma(7.0, -7.0, w1, w2, t) > 0
            # relative phase pi: same amplitudes
            assert phase_noise_gamma(7.0, 7.0, w1, w2, t) < 0

    def test_rate_sign_from_package(self):
        rho = PSI_PLUS
        w1, w2 = omegas("fig2")
        t = 0.25 * TWO_PI / (w2 - w1)
        damp = l2_ff(table_system("fig2"), WC, t, rho)
        flipped = FloquetSystem(PRESET_TABLE["fig2"]["H0"], (FloquetTerm(7 * SZ, w1), FloquetTerm(7 * SZ, w2)))
        gain = l2_ff(flipped, WC, t, rho)
        # coherence decays under damping: d rho_eg / dt opposes rho_eg
        assert damp[0, 1].real < 0 < gain[0, 1].real

    def test_forms_agree_on_real_products(self, preset_name):
        s = table_system(preset_name)
        assert upper_form_hermiticity_defect(s, WC) <= 1e-14
        sym, up = ff_superop(s, WC), ff_superop(s, WC, "upper")
        assert sym.allclose(up, atol=1e-12)

    def test_complex_products_need_projection(self):
        s = FloquetSystem(SZ, (FloquetTerm(SX + 0.5j * SY, 50.0), FloquetTerm(SP, 51.0)))
        assert upper_form_hermiticity_defect(s, 10.0) > 1e-3

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            ff_superop(table_system("fig2"), WC, "lower")


class TestSlowFastTerm:
    def test_vanishes_for_phase_noise(self, rng):
        assert np.abs(l2_fsf(table_system("fig2"), WC, 3.3, random_density(rng))).max() <= 1e-13

    def test_sigma_x_closed_form(self, rng):
        s = table_system("fig1")
        w1, w2 = omegas("fig1")
        for t in rng.uniform(0, 80, 10):
            rho = random_hermitian(rng)
            ref = fsf_sigma_x_closed(w0_of("fig1"), 2.0, w1, w2, t, rho)
            assert np.abs(l2_fsf(s, WC, t, rho) - ref).max() <= 1e-12

    def test_sigma_plus_exact_form(self, rng):
        s = table_system("fig3")
        w1, w2 = omegas("fig3")
        for t in rng.uniform(0, 80, 10):
            rho = random_hermitian(rng)
            ref = fsf_sigma_plus_exact(w0_of("fig3"), 2.0, w1, w2, t, rho)
            assert np.abs(l2_fsf(s, WC, t, rho) - ref).max() <= 1e-12

    def test_sigma_plus_single_factor_form(self, rng):
        """The cos^2 form with prefactor -w0 Om^2 (1/w1^2 + 1/w2^2), to 1% of its envelope."""
        s = table_system("fig3")
        w0 = w0_of("fig3")
        w1, w2 = omegas("fig3")
        envelope = w0 * 4.0 * (1 / w1**2 + 1 / w2**2)
        for t in rng.uniform(0, 80, 10):
            rho = random_density(rng)
            ref = fsf_sigma_plus_sx_only(w0, 2.0, w1, w2, t, rho)
            assert np.abs(l2_fsf(s, WC, t, rho) - ref).max() <= 1e-2 * envelope

    def test_sigma_plus_double_factor_form(self, rng):
        """Twice the single-factor form matches the exact sum up to O(dw/w)."""
        s = table_system("fig3")
        w0 = w0_of("fig3")
        w1, w2 = omegas("fig3")
        envelope = w0 * 4.0 * (1 / w1**2 + 1 / w2**2)
        for t in rng.uniform(0, 80, 10):
            rho = random_density(rng)
            ref = 2 * fsf_sigma_plus_sx_only(w0, 2.0, w1, w2, t, rho)
            assert np.abs(l2_fsf(s, WC, t, rho) - ref).max() <= 1e-2 * envelope

    @pytest.mark.parametrize("name", ["fig1", "fig3", "supp"])
    def test_hermiticity_preserving(self, name, rng):
        s = table_system(name)
        for _ in range(10):
            rho = random_hermitian(rng)
            out = l2_fsf(s, WC, rng.uniform(0, 80), rho, hermitize=False)
            assert np.abs(out - out.conj().T).max() <= 1e-13
            assert abs(np.trace(out)) <= 1e-13


class TestThirdOrder:
    def test_closed_form(self, rng):
        s = table_system("supp")
        w0 = w0_of("supp")
        w1, w2 = omegas("supp")
        for t in rng.uniform(0, 80, 10):
            rho = random_hermitian(rng)
            ref = l3_closed(w0, 1.75, w1, w2, t, rho)
            assert np.abs(l3_sigma_xz(s, WC, t, rho) - ref).max() <= 1e-12

    def test_quarter_beat_coefficient(self):
        s = table_system("supp")
        w0 = w0_of("supp")
        w1, w2 = omegas("supp")
        t = 0.25 * TWO_PI / (w2 - w1)
        direct = 16 * w0**2 * 1.75**2 * (1 / w1**3 - 1 / w2**3)
        assert l3_rate(s, WC).at(t)[0, 0].real == pytest.approx(direct, rel=1e-12)

    def test_equal_frequencies_and_origin(self, rng):
        w = omegas("supp")[0]
        s = FloquetSystem(PRESET_TABLE["supp"]["H0"], (FloquetTerm(1.75 * SX, w), FloquetTerm(1.75 * SX, w)))
        rho = random_density(rng)
        assert np.abs(l3_sigma_xz(s, WC, 4.2, rho)).max() == 0
        assert np.abs(l3_sigma_xz(table_system("supp"), WC, 0.0, rho)).max() <= 1e-15

    @pytest.mark.parametrize("name", ["fig2", "fig3"])
    def test_structure_required(self, name):
        with pytest.raises(StructureError):
            l3_sigma_xz(table_system(name), WC, 1.0, PROJ_E)

    def test_complex_amplitude_rejected(self):
        s = FloquetSystem(SZ, (FloquetTerm(1j * SX, 40.0), FloquetTerm(SX, 40.2)))
        with pytest.raises(StructureError):
            l3_rate(s, WC)


class TestGenerator:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            DissipatorConfig(heff_order=3)
        with pytest.raises(ValueError):
            DissipatorConfig(ff_form="diagonal")
        cfg = DissipatorConfig()
        assert cfg.variant("no-fsf").include_fsf is False
        assert cfg.variant("l3").include_l3 is True
        with pytest.raises(ValueError):
            cfg.variant("everything")

    def test_no_drive_is_von_neumann(self, rng):
        h0 = 0.4 * SZ + 0.2 * SX
        s = FloquetSystem(h0)
        exp = derive_kick_expansion(s, WC, 2)
        rho = random_hermitian(rng)
        out = me_rhs(s, WC, exp, DissipatorConfig(), 2.0, rho)
        assert np.allclose(out, -1j * (h0 @ rho - rho @ h0), atol=1e-15)

    def test_phase_noise_generator(self, rng):
        s, sc, exp = rhs_parts("fig2")
        h0 = PRESET_TABLE["fig2"]["H0"]
        w1, w2 = omegas("fig2")
        for t in rng.uniform(0, 80, 5):
            rho = random_hermitian(rng)
            g = phase_noise_gamma(7.0, -7.0, w1, w2, t)
            ref = -1j * (h0 @ rho - rho @ h0) + 0.5 * g * l_phase(rho)
            assert np.abs(me_rhs(s, sc, exp, DissipatorConfig(), t, rho) - ref).max() <= 1e-11

    def test_traceless_and_hermitian(self, preset_name, rng):
        s, sc, exp = rhs_parts(preset_name)
        cfg = DissipatorConfig(include_l3=preset_name in ("fig1", "supp"))
        for _ in range(100):
            rho = random_hermitian(rng)
            out = me_rhs(s, sc, exp, cfg, rng.uniform(0, 80), rho)
            assert abs(np.trace(out)) <= 1e-12
            assert np.abs(out - out.conj().T).max() <= 1e-12

    @given(st.floats(0, 80), st.integers(0, 2**31))
    def test_linear_in_rho(self, t, seed):
        rng = np.random.default_rng(seed)
        s, sc, exp = rhs_parts("fig3")
        a, b = random_hermitian(rng), random_hermitian(rng)
        cfg = DissipatorConfig()
        lhs = me_rhs(s, sc, exp, cfg, t, a + 2 * b)
        rhs = me_rhs(s, sc, exp, cfg, t, a) + 2 * me_rhs(s, sc, exp, cfg, t, b)
        assert np.abs(lhs - rhs).max() <= 1e-10


class TestIntegration:
    def test_free_evolution(self):
        h0 = 0.3 * TWO_PI * SZ + 0.1 * SX
        s = FloquetSystem(h0)
        g = TimeGrid(0.0, 20.0, 0.05)
        out = integrate_me(s, WC, derive_kick_expansion(s, WC, 2), DissipatorConfig(), PSI_PLUS, g)
        for k in (0, 100, len(g) - 1):
            u = taylor_exp(-1j * h0 * g.times[k])
            assert np.abs(out.values[k] - u @ PSI_PLUS @ u.conj().T).max() <= 1e-8

    def test_phase_noise_closed_form(self):
        s, sc, exp = rhs_parts("fig2")
        w0 = w0_of("fig2")
        w1, w2 = omegas("fig2")
        d = w2 - w1
        g = TimeGrid(0.0, 80.0, 0.05)
        out = integrate_me(s, sc, exp, DissipatorConfig(), PSI_PLUS, g)
        t = g.times
        # int_0^t gamma = 16*49 / w_{12-} (1 - cos(d t)) / d; L_phase damps rho_eg at rate gamma
        integral = 16 * 49 * 0.5 * (1 / w1 - 1 / w2) * (1 - np.cos(d * t)) / d
        ref = 0.5 * np.exp(-2j * w0 * t) * np.exp(-integral)
        assert np.abs(out.entry(0, 1) - ref).max() <= 1e-8

    def test_diagnostics(self, preset_name):
        s, sc, exp = rhs_parts(preset_name)
        g = TimeGrid(0.0, 20.0, 0.05)
        rho0 = PSI_PLUS if preset_name != "fig3" else PROJ_E
        try:
            out = integrate_me(s, sc, exp, DissipatorConfig(), rho0, g)
        except NumericalAbort as exc:
            out = exc.partial
        assert out.meta["trace_defect"] <= 1e-8
        assert out.meta["hermiticity_defect"] <= 1e-10
        assert out.meta["substeps"] >= 1

    def test_abort_carries_partial(self):
        # strong gain drives the coherence past the cone
        s = FloquetSystem(SZ, (FloquetTerm(20 * SZ, 20.0), FloquetTerm(20 * SZ, 20.5)))
        exp = derive_kick_expansion(s, 5.0, 2)
        g = TimeGrid(0.0, 6.0, 0.01)
        with pytest.raises(NumericalAbort) as info:
            integrate_me(s, 5.0, exp, DissipatorConfig(), PSI_PLUS, g)
        assert info.value.partial is not None
        assert info.value.partial.meta["min_eigenvalue"] < -1e-2

    def test_rejects_non_density(self):
        s = table_system("fig2")
        with pytest.raises(Exception):
            integrate_me(s, WC, derive_kick_expansion(s, WC, 2), DissipatorConfig(), 0.5 * PSI_PLUS, TimeGrid(0, 1, 0.1))
