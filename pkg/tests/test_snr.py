import math

import numpy as np
import pytest

from xlmimo.errors import DomainError, SingularityError
from xlmimo.scenario import ArrayConfig, UserLocation, user_from_polar
from xlmimo.snr import (SnrQuery, corner_integral,
                        corner_integral_no_polarization, polarization_gap,
                        snr_asymptotic, snr_element_sum, snr_far_field,
                        snr_perpendicular_geometric, snr_rect_aperture,
                        snr_ula, snr_ula_asymptotic, snr_ula_no_polarization,
                        snr_ula_perpendicular, snr_upa, snr_upa_from_angles,
                        snr_upa_no_polarization)

from conftest import RHO, WAVELENGTH, make_config, oracle_snr_sum

ETA = 1 / math.pi


def q(cfg, user, rho=RHO):
    return SnrQuery(config=cfg, user=user, rho=rho)


class TestCornerIntegral:
    def test_zero_edges(self):
        assert corner_integral(0.0, 3.0, 2.0) == 0.0
        assert corner_integral(3.0, 0.0, 2.0) == 0.0

    def test_large_aperture_limit_is_quarter_turn(self):
        assert corner_integral(1e8, 1e8, 2.0) == pytest.approx(math.pi / 2, rel=1e-6)

    def test_odd_in_both_arguments(self, rng):
        for _ in range(20):
            a, b, z = rng.uniform(0.1, 5, size=3)
            assert corner_integral(-a, b, z) == pytest.approx(-corner_integral(a, b, z))
            assert corner_integral(a, -b, z) == pytest.approx(-corner_integral(a, b, z))

    def test_height_must_be_positive(self):
        with pytest.raises(DomainError):
            corner_integral(1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            corner_integral_no_polarization(1.0, 1.0, -2.0)


class TestElementSum:
    def test_on_plane_user(self):
        cfg = make_config(8, 8)
        assert snr_element_sum(q(cfg, UserLocation(3.0, 0, 0))) == 0.0

    def test_single_element(self):
        from xlmimo.channel import element_power
        from xlmimo.scenario import AntennaIndex
        cfg = make_config(1, 1)
        u = UserLocation(1, 2, 5)
        assert snr_element_sum(q(cfg, u)) == pytest.approx(
            RHO * element_power(cfg, u, AntennaIndex(0, 0)), rel=1e-14)

    def test_matches_independent_oracle(self, rng):
        cfg = make_config(32, 16)
        for _ in range(5):
            u = UserLocation(rng.uniform(-10, 10), rng.uniform(-10, 10),
                             rng.uniform(1, 15))
            assert snr_element_sum(q(cfg, u)) == pytest.approx(
                oracle_snr_sum(cfg, u), rel=1e-13)


class TestPlanarClosedForm:
    def test_on_plane_user(self):
        cfg = make_config(8, 8)
        assert snr_upa(q(cfg, UserLocation(3.0, 0, 0))) == 0.0

    def test_against_element_sum(self):
        cfg = make_config(64, 64)
        u = UserLocation(10, 10, 10)
        query = q(cfg, u)
        assert snr_upa(query) == pytest.approx(snr_element_sum(query), rel=1e-3)

    def test_symmetric_user_reduces_to_four_equal_terms(self):
        cfg = make_config(32, 32)
        u = UserLocation(0, 0, 7)
        expect = RHO * cfg.occupation_ratio / (6 * math.pi) * 4 * corner_integral(
            cfg.length_y / 2, cfg.length_x / 2, 7.0)
        assert snr_upa(q(cfg, u)) == pytest.approx(expect, rel=1e-14)

    def test_huge_aperture_hits_polarized_limit(self):
        cfg = make_config(16, 16)
        user = UserLocation(0, 0, 10)
        val = snr_upa(q(cfg, user), extents=(1e6, 1e6))
        # frozen arithmetic: 1e9 * (1/pi) / 3
        assert val == pytest.approx(106103295.39459737, rel=1e-3)
        assert val == pytest.approx(RHO * ETA / 3, rel=1e-3)

    def test_monotone_in_extents(self, rng):
        cfg = make_config(8, 8)
        user = UserLocation(2, -3, 6)
        query = q(cfg, user)
        vals_x = [snr_upa(query, extents=(lx, 5.0)) for lx in (1, 2, 5, 20, 100)]
        vals_y = [snr_upa(query, extents=(5.0, ly)) for ly in (1, 2, 5, 20, 100)]
        assert np.all(np.diff(vals_x) > 0)
        assert np.all(np.diff(vals_y) > 0)

    def test_never_exceeds_limit(self, rng):
        cfg = make_config(8, 8)
        limit = RHO * cfg.occupation_ratio / 3
        for _ in range(50):
            user = UserLocation(rng.uniform(-50, 50), rng.uniform(-50, 50),
                                rng.uniform(0.1, 100))
            lx, ly = rng.uniform(0.1, 1e4, size=2)
            assert snr_upa(q(cfg, user), extents=(lx, ly)) <= limit + 1e-9 * RHO


class TestNoPolarization:
    def test_dominates_polarized(self, rng):
        cfg = make_config(24, 24)
        for _ in range(30):
            user = UserLocation(rng.uniform(-20, 20), rng.uniform(-20, 20),
                                rng.uniform(0.5, 30))
            query = q(cfg, user)
            unpol = snr_upa_no_polarization(query)
            assert snr_upa(query) <= unpol + 1e-12
            assert unpol <= RHO * cfg.occupation_ratio / 2 + 1e-9 * RHO

    def test_far_user_ratio_tends_to_one(self):
        cfg = make_config(16, 16)
        user = UserLocation(0.5, 0.5, 100 * max(cfg.length_x, cfg.length_y))
        query = q(cfg, user)
        assert snr_upa(query) / snr_upa_no_polarization(query) == pytest.approx(1.0, abs=1e-2)

    def test_tall_aperture_ratio_two_thirds(self):
        cfg = make_config(16, 16)
        user = UserLocation(0, 0, 10)
        query = q(cfg, user)
        ratio = snr_upa(query, extents=(10.0, 1e6)) / snr_upa_no_polarization(
            query, extents=(10.0, 1e6))
        assert ratio == pytest.approx(2 / 3, rel=1e-2)


class TestAngleForm:
    def test_broadside_matches_cartesian(self):
        cfg = make_config(20, 20)
        r = 12.0
        direct = snr_upa(q(cfg, UserLocation(0, 0, r)))
        assert snr_upa_from_angles(r, 0.0, 0.0, cfg, RHO) == pytest.approx(direct, rel=1e-10)

    def test_matches_cartesian_route(self, rng):
        cfg = make_config(24, 16)
        for _ in range(25):
            r = rng.uniform(2, 60)
            psi_e = rng.uniform(0, math.pi / 2 * 0.98)
            psi_a = rng.uniform(0, 2 * math.pi)
            user = user_from_polar(r, psi_e, psi_a)
            assert snr_upa_from_angles(r, psi_e, psi_a, cfg, RHO) == pytest.approx(
                snr_upa(q(cfg, user)), rel=1e-10)

    def test_grazing_elevation_is_zero(self):
        cfg = make_config(8, 8)
        assert snr_upa_from_angles(10.0, math.pi / 2, 0.3, cfg, RHO) == 0.0


class TestAsymptotes:
    def test_values(self):
        assert snr_asymptotic("discrete_polarized", ETA, RHO) == pytest.approx(RHO * ETA / 3)
        assert snr_asymptotic("discrete_unpolarized", ETA, RHO) == pytest.approx(RHO * ETA / 2)
        assert snr_asymptotic("continuous", 1.0, 1.0) == pytest.approx(1 / 3)

    def test_polarized_unpolarized_ratio(self, rng):
        for _ in range(10):
            eta = rng.uniform(0.01, 1.0)
            rho = rng.uniform(1, 1e10)
            assert snr_asymptotic("discrete_unpolarized", eta, rho) / \
                snr_asymptotic("discrete_polarized", eta, rho) == pytest.approx(1.5)

    def test_domain(self):
        with pytest.raises(DomainError):
            snr_asymptotic("discrete_polarized", 1.5, RHO)
        with pytest.raises(DomainError):
            snr_asymptotic("nonsense", 0.5, RHO)


class TestPerpendicularGeometric:
    def test_equals_general_form(self, rng):
        cfg = make_config(8, 8)
        for _ in range(100):
            lx, ly = rng.uniform(0.1, 100, size=2)
            z = rng.uniform(0.1, 100)
            user = UserLocation(0, 0, z)
            geo = snr_perpendicular_geometric(q(cfg, user), extents=(lx, ly))
            general = snr_upa(q(cfg, user), extents=(lx, ly))
            assert geo == pytest.approx(general, rel=1e-10)

    def test_limits(self):
        cfg = make_config(8, 8)
        user = UserLocation(0, 0, 10)
        # both extents huge: alpha -> pi/2, beta -> pi/4, SNR -> rho eta / 3
        val = snr_perpendicular_geometric(q(cfg, user), extents=(1e9, 1e9))
        assert val == pytest.approx(RHO * cfg.occupation_ratio / 3, rel=1e-6)
        # wide aperture only: the diagonal foreshortening disappears
        alpha = math.atan((20.0 / 2) / 10.0)
        no_beta = RHO * cfg.occupation_ratio * 2 / (3 * math.pi) * (
            math.atan(math.tan(alpha)) + 0.5 * math.sin(alpha) * math.cos(alpha))
        assert snr_perpendicular_geometric(q(cfg, user), extents=(1e9, 20.0)) == \
            pytest.approx(no_beta, rel=1e-3)

    def test_off_axis_rejected(self):
        cfg = make_config(8, 8)
        with pytest.raises(DomainError):
            snr_perpendicular_geometric(q(cfg, UserLocation(1, 0, 10)))


class TestLinearArray:
    def test_against_element_sum(self):
        cfg = make_config(1000, 1)
        u = UserLocation(0, 5, 10)
        assert snr_ula(q(cfg, u)) == pytest.approx(oracle_snr_sum(cfg, u), rel=1e-3)

    def test_perpendicular_view_angle_form(self):
        # broadside row: closed form, view-angle form, and the brute sum agree
        cfg = make_config(1000, 1)
        u = UserLocation(0, 0, 10)
        query = q(cfg, u)
        assert snr_ula_perpendicular(query) == pytest.approx(snr_ula(query), rel=1e-12)
        assert snr_ula_perpendicular(query) == pytest.approx(
            oracle_snr_sum(cfg, u), rel=1e-3)

    def test_asymptotic_independent_of_x(self):
        cfg = make_config(10_000_000, 1)
        a = snr_ula(q(cfg, UserLocation(0, 3, 10)))
        b = snr_ula(q(cfg, UserLocation(1000, 3, 10)))
        assert a == pytest.approx(b, rel=1e-3)

    def test_planar_config_rejected(self):
        with pytest.raises(DomainError):
            snr_ula(q(make_config(4, 4), UserLocation(0, 1, 5)))

    def test_axis_user_rejected(self):
        cfg = make_config(100, 1)
        with pytest.raises(SingularityError):
            snr_ula(q(cfg, UserLocation(1.0, 0, 0)))

    def test_no_polarization_against_oracle(self, rng):
        cfg = make_config(2000, 1)
        lattice = (np.arange(cfg.m_x) - (cfg.m_x - 1) / 2) * cfg.delta_x
        for _ in range(5):
            u = UserLocation(rng.uniform(-5, 5), rng.uniform(-8, 8), rng.uniform(2, 12))
            r2 = (lattice - u.x) ** 2 + u.y ** 2 + u.z ** 2
            oracle = RHO * (cfg.element_area / (4 * math.pi) * u.z / r2 ** 1.5).sum()
            assert snr_ula_no_polarization(q(cfg, u)) == pytest.approx(oracle, rel=1e-3)


class TestLinearAsymptotes:
    def test_centered_row_variants_coincide(self):
        cfg = make_config(100, 1)
        expect = RHO * cfg.element_area / (2 * math.pi * cfg.delta_x) / 10.0
        assert snr_ula_asymptotic(0.0, 10.0, cfg, RHO) == pytest.approx(expect)
        assert snr_ula_asymptotic(0.0, 10.0, cfg, RHO, polarized=False) == \
            pytest.approx(expect)

    def test_unpolarized_dominates(self, rng):
        cfg = make_config(100, 1)
        for _ in range(20):
            uy, uz = rng.uniform(0, 30), rng.uniform(0.1, 30)
            assert snr_ula_asymptotic(uy, uz, cfg, RHO, polarized=False) >= \
                snr_ula_asymptotic(uy, uz, cfg, RHO)

    def test_gap_identity(self, rng):
        cfg = make_config(100, 1)
        for _ in range(20):
            uy, uz = rng.uniform(0, 30), rng.uniform(0.1, 30)
            diff = snr_ula_asymptotic(uy, uz, cfg, RHO, polarized=False) \
                - snr_ula_asymptotic(uy, uz, cfg, RHO)
            assert diff == pytest.approx(polarization_gap(uy, uz, cfg, RHO),
                                         rel=1e-12, abs=1e-12)

    def test_gap_vanishes_at_extremes(self):
        cfg = make_config(100, 1)
        assert polarization_gap(0.0, 5.0, cfg, RHO) == 0.0
        assert polarization_gap(1e6, 5.0, cfg, RHO) == pytest.approx(0.0, abs=1e-3)

    def test_gap_unimodal_peaking_at_uz(self):
        # grid-scan oracle: the gap rises to a single maximum at u_y = u_z
        # (stationary point of u_y^2/(u_y^2+u_z^2)^2), then decays
        cfg = make_config(100, 1)
        uz = 6.0
        grid = np.linspace(0.1, 30, 2000)
        gaps = np.array([polarization_gap(uy, uz, cfg, RHO) for uy in grid])
        best = int(np.argmax(gaps))
        assert grid[best] == pytest.approx(uz, rel=0.02)
        assert np.all(np.diff(gaps[:best]) > 0)
        assert np.all(np.diff(gaps[best + 1:]) < 0)


class TestFarFieldReference:
    def test_linear_in_elements(self):
        u = UserLocation(3, 4, 12)
        small = snr_far_field(q(make_config(16, 16), u))
        big = snr_far_field(q(make_config(16, 32), u))
        assert big == pytest.approx(2 * small)

    def test_broadside_aperture_form(self):
        cfg = make_config(16, 16)
        u = UserLocation(0, 0, 25)
        expect = RHO * cfg.n_elements * cfg.element_area / (4 * math.pi * 625)
        assert snr_far_field(q(cfg, u), "aperture") == pytest.approx(expect)

    def test_matches_near_field_far_out(self):
        # convergence needs a negligible y direction cosine (no residual
        # polarization loss), so place the far user in the xz plane
        cfg = make_config(16, 16)
        u = user_from_polar(1e4, 0.4, 0.0)
        query = q(cfg, u)
        assert snr_upa(query) / snr_far_field(query, "aperture") == \
            pytest.approx(1.0, abs=1e-2)
        # off-plane far users keep the (1 - psi_y^2) polarization factor
        off = user_from_polar(1e4, 0.4, 1.0)
        expect = (1.0 - off.cosines[1] ** 2)
        ratio = snr_upa(q(cfg, off)) / snr_far_field(q(cfg, off), "aperture")
        assert ratio == pytest.approx(expect, rel=1e-2)

    def test_unknown_variant(self):
        with pytest.raises(DomainError):
            snr_far_field(q(make_config(4, 4), UserLocation(0, 0, 5)), "bogus")


class TestCrossFormulaIdentities:
    def test_closed_vs_sum_far_regime(self, rng):
        # closed form tracks the element sum at 1e-3 once r >= 100 spacings
        for _ in range(10):
            m_x, m_y = int(rng.integers(4, 48)), int(rng.integers(4, 48))
            cfg = make_config(m_x, m_y)
            r = rng.uniform(100 * cfg.delta_x, 400 * cfg.delta_x)
            user = user_from_polar(r, rng.uniform(0, 1.4), rng.uniform(0, 2 * math.pi))
            query = q(cfg, user)
            assert snr_upa(query) == pytest.approx(snr_element_sum(query), rel=1e-3)

    def test_rect_aperture_scale_invariance(self, rng):
        # dividing every length by r_o leaves the SNR unchanged
        for _ in range(20):
            lx, ly = rng.uniform(0.5, 50, size=2)
            user = UserLocation(rng.uniform(-10, 10), rng.uniform(-10, 10),
                                rng.uniform(0.5, 20))
            r = user.distance
            scaled = UserLocation(user.x / r, user.y / r, user.z / r)
            assert snr_rect_aperture(lx, ly, user, ETA, RHO) == pytest.approx(
                snr_rect_aperture(lx / r, ly / r, scaled, ETA, RHO), rel=1e-12)
