import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import qcloak as qc
from qcloak.errors import DomainError, GeometryError, NearEigenvalueError
from qcloak.observables import legendre_values, optical_theorem_defect

import oracles

E0 = 0.5
K0 = math.sqrt(E0)


class TestPhaseShifts:
    def test_free_system_is_shiftless(self, free_medium):
        ps = qc.phase_shifts(free_medium, E0, l_max=20)
        assert max(abs(d) for d in ps.delta) < 1e-10

    def test_square_well_closed_form(self):
        pot = qc.RadialPotential((qc.PotentialShell(0.0, 1.0, -2.0),
                                  qc.PotentialShell(1.0, 3.0, 0.0)))
        ps = qc.phase_shifts(pot, E0, l_max=4)
        exact = oracles.square_well_delta0(E0)
        diff = abs(ps.delta[0] - exact) % math.pi
        assert min(diff, math.pi - diff) < 1e-10

    def test_unitarity(self, cloak_builder):
        ps = qc.phase_shifts(cloak_builder(1.05, 16, -98.5), E0)
        for s in ps.s_matrix():
            assert abs(abs(s) - 1.0) < 1e-10
        assert all(isinstance(d, float) for d in ps.delta)

    def test_rejects_nonpropagating_energy(self, free_medium):
        with pytest.raises(DomainError):
            qc.phase_shifts(free_medium, 0.0)
        with pytest.raises(DomainError):
            qc.phase_shifts(free_medium, -1.0)

    def test_rejects_matching_inside_support(self, cloak_builder):
        with pytest.raises(GeometryError):
            qc.phase_shifts(cloak_builder(1.05, 16), E0, r_match=1.5)

    def test_branch_unwrap_is_continuous(self):
        pot = qc.RadialPotential((qc.PotentialShell(0.0, 1.0, -9.0),
                                  qc.PotentialShell(1.0, 3.0, 0.0)))
        es = np.linspace(0.2, 2.2, 120)
        raw = [qc.phase_shifts(pot, e, l_max=0).delta[0] for e in es]
        smooth = qc.unwrap_phases(raw)
        steps = np.abs(np.diff(smooth))
        assert steps.max() < math.pi / 2


class TestAmplitude:
    def test_zero_shifts_zero_amplitude(self):
        ps = qc.PhaseShifts(E0, K0, (0.0, 0.0, 0.0))
        assert qc.amplitude(ps, 0.7) == 0.0

    def test_swave_unitarity_limit(self):
        ps = qc.PhaseShifts(E0, K0, (math.pi / 2.0,))
        for theta in (0.0, 1.0, 2.5):
            f = qc.amplitude(ps, theta)
            assert abs(f - 1j / K0) < 1e-14
        assert qc.total_cross_section(ps) == pytest.approx(8.0 * math.pi,
                                                           rel=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.floats(min_value=-1.5, max_value=1.5), min_size=1,
                    max_size=12))
    def test_optical_theorem_property(self, deltas):
        ps = qc.PhaseShifts(E0, K0, tuple(deltas))
        assert optical_theorem_defect(ps) < 1e-8
        assert qc.amplitude(ps, 0.0).imag >= -1e-15

    def test_cross_section_zero_for_free(self):
        ps = qc.PhaseShifts(E0, K0, (0.0, 0.0))
        assert qc.total_cross_section(ps) == 0.0


class TestDNSpectrum:
    def test_free_s_channel_value(self, free_medium):
        dn = qc.dn_spectrum(free_medium, E0, l_max=0)
        expected = K0 / math.tan(3.0 * K0) - 1.0 / 3.0
        assert dn.lam[0] == pytest.approx(expected, rel=1e-12)
        assert dn.lam[0] == pytest.approx(-0.767, abs=1e-3)

    def test_free_matches_analytic_all_channels(self, free_medium):
        dn = qc.dn_spectrum(free_medium, E0, l_max=20)
        free = qc.free_dn_spectrum(E0, 20)
        assert dn.max_deviation_from_free() < 1e-10
        for a, b in zip(dn.lam, free.lam):
            assert a == pytest.approx(b, abs=1e-10)

    def test_near_eigenvalue_error_names_channel(self, free_medium):
        E_star = (math.pi / 3.0) ** 2
        with pytest.raises(NearEigenvalueError) as info:
            qc.dn_spectrum(free_medium, E_star, l_max=3)
        assert info.value.l == 0

    def test_normalization_invariance(self, cloak_builder):
        # Dirichlet- and Neumann-normalized reads of the same channel agree
        system = cloak_builder(1.05, 16, -98.5)
        for l in (0, 2, 5):
            sol = qc.solve_channel(system, l, E0, want_norms=False)
            lam_dirichlet = sol.log_derivative_end
            scale = 7.3  # arbitrary rescale of the propagated pair
            lam_neumann = (scale * sol.q_end - scale * sol.p_end / 3.0) / (
                scale * sol.p_end)
            assert lam_dirichlet == pytest.approx(lam_neumann, abs=1e-10)

    def test_cloak_deviation_decreases_with_truncation(self, cloak_builder):
        devs = []
        for R, n in ((1.1, 12), (1.05, 16), (1.01, 36), (1.005, 50)):
            dn = qc.dn_spectrum(cloak_builder(R, n, -98.5), E0)
            devs.append(dn.max_deviation_from_free())
        assert all(a > b for a, b in zip(devs, devs[1:]))

    def test_reference_cloak_shifts_are_uniformly_small(self, cloak_builder):
        ps = qc.phase_shifts(cloak_builder(1.005, 50, -98.5), E0)
        assert max(abs(d) for d in ps.delta) < 0.05


class TestPlaneWaveField:
    def test_free_field_is_plane_wave(self, free_medium):
        rng = np.random.default_rng(4)
        pts = np.column_stack([rng.uniform(0.0, 3.0, 50),
                               rng.uniform(-1.0, 1.0, 50)])
        psi = qc.plane_wave_field(free_medium, E0, pts, l_max=25)
        exact = np.exp(1j * K0 * pts[:, 0] * pts[:, 1])
        assert np.max(np.abs(psi - exact)) < 1e-8

    def test_field_at_origin(self, free_medium, cloak_builder):
        # origin samples are evaluated at the kernel's start radius (1e-6),
        # so the free value is e^{ik*1e-6} rather than exactly 1
        pts = np.array([[0.0, 1.0]])
        psi = qc.plane_wave_field(free_medium, E0, pts, l_max=25)
        assert abs(psi[0] - 1.0) < 1e-5
        shielded = qc.plane_wave_field(cloak_builder(1.005, 50, -98.5),
                                       E0, pts)
        assert abs(shielded[0]) < 0.1

    def test_outside_ball_continuation(self, free_medium):
        pts = np.array([[3.5, 0.3], [4.2, -0.9]])
        psi = qc.plane_wave_field(free_medium, E0, pts, l_max=25)
        exact = np.exp(1j * K0 * pts[:, 0] * pts[:, 1])
        assert np.max(np.abs(psi - exact)) < 1e-8

    def test_cloak_exterior_resembles_plane_wave(self, cloak_builder):
        system = cloak_builder(1.005, 50, -98.5)
        x = np.linspace(2.05, 3.0, 40)
        pts = np.column_stack([x, np.ones_like(x)])
        psi = qc.plane_wave_field(system, E0, pts)
        exact = np.exp(1j * K0 * x)
        assert np.max(np.abs(psi - exact)) < 0.05

    def test_cloak_core_is_shielded(self, cloak_builder):
        system = cloak_builder(1.005, 50, -98.5)
        x = np.linspace(0.05, 0.95, 20)
        pts = np.column_stack([x, np.ones_like(x)])
        psi = qc.plane_wave_field(system, E0, pts)
        assert np.max(np.abs(psi)) < 0.1

    def test_trapped_mode_is_core_dominated(self, cloak_builder):
        system = cloak_builder(1.005, 50, -71.45)
        pts = qc.dirichlet_eigenvalues(system, 0, (0.4, 0.6))
        E_star = pts[0].E
        r = np.linspace(0.01, 3.0, 200)
        u = qc.radial_mode(system, 0, E_star + 1e-9, r)
        inside = np.abs(u[r < 1.0]).max()
        outside = np.abs(u[r > 1.2]).max()
        assert inside == pytest.approx(1.0)
        assert outside < 1e-2

    def test_point_validation(self, free_medium):
        with pytest.raises(DomainError):
            qc.plane_wave_field(free_medium, E0, np.array([[1.0, 2.0]]))


class TestLegendre:
    def test_values_against_scipy(self):
        from scipy.special import eval_legendre
        mu = np.linspace(-1.0, 1.0, 21)
        pl = legendre_values(12, mu)
        for l in range(13):
            assert np.allclose(pl[l], eval_legendre(l, mu), atol=1e-12)
