import math

import numpy as np
import pytest

from xlmimo.errors import DomainError
from xlmimo.scenario import (AntennaIndex, ArrayConfig, UserLocation,
                             antenna_center, element_distance, index_lattice,
                             load_scenario, sample_users, user_from_polar)

from conftest import WAVELENGTH, make_config


class TestArrayConfig:
    def test_default_factory_matches_baseline(self):
        cfg = make_config(100, 10)
        assert cfg.delta_x == pytest.approx(0.0628)
        assert cfg.element_area == pytest.approx(WAVELENGTH ** 2 / (4 * math.pi))
        assert cfg.occupation_ratio == pytest.approx(1 / math.pi)
        assert cfg.length_x == pytest.approx(100 * 0.0628)
        assert cfg.n_elements == 1000

    def test_element_must_fit_in_cell(self):
        with pytest.raises(DomainError):
            ArrayConfig(m_x=4, m_y=4, delta_x=0.05, delta_y=0.05,
                        a_x=0.06, a_y=0.01, wavelength=0.1)

    def test_positive_dimensions_required(self):
        with pytest.raises(DomainError):
            ArrayConfig(m_x=0, m_y=4, delta_x=0.05, delta_y=0.05,
                        a_x=0.01, a_y=0.01, wavelength=0.1)
        with pytest.raises(DomainError):
            ArrayConfig(m_x=4, m_y=4, delta_x=-0.05, delta_y=0.05,
                        a_x=0.01, a_y=0.01, wavelength=0.1)


class TestLattice:
    def test_odd_count_is_integer_symmetric(self):
        assert index_lattice(5).tolist() == [-2, -1, 0, 1, 2]

    def test_even_count_is_half_integer_symmetric(self):
        lat = index_lattice(10)
        assert lat[0] == -4.5 and lat[-1] == 4.5
        assert np.allclose(np.diff(lat), 1.0)
        assert np.allclose(lat, -lat[::-1])

    def test_cardinality(self):
        cfg = make_config(7, 4)
        assert len(cfg.x_lattice()) * len(cfg.y_lattice()) == cfg.n_elements


class TestAntennaCenter:
    def test_single_element_at_origin(self):
        cfg = make_config(1, 1)
        assert antenna_center(cfg, AntennaIndex(0, 0)).tolist() == [0, 0, 0]

    def test_one_spacing_offset(self):
        cfg = ArrayConfig(m_x=3, m_y=1, delta_x=0.0628, delta_y=0.0628,
                          a_x=0.03, a_y=0.03, wavelength=0.1256)
        assert antenna_center(cfg, AntennaIndex(1, 0)) == pytest.approx([0.0628, 0, 0])

    def test_mirror_symmetry(self):
        cfg = make_config(3, 3)
        plus = antenna_center(cfg, AntennaIndex(1, 0))
        minus = antenna_center(cfg, AntennaIndex(-1, 0))
        assert np.allclose(plus, -minus)

    def test_all_centers_on_plane(self):
        cfg = make_config(4, 6)
        for ix in cfg.x_lattice():
            for iy in cfg.y_lattice():
                assert antenna_center(cfg, AntennaIndex(ix, iy))[2] == 0.0

    def test_out_of_range_rejected(self):
        cfg = make_config(3, 3)
        with pytest.raises(DomainError):
            antenna_center(cfg, AntennaIndex(2, 0))
        with pytest.raises(DomainError):
            antenna_center(cfg, AntennaIndex(0.5, 0))  # off the odd lattice


class TestElementDistance:
    def test_perpendicular(self):
        cfg = make_config(5, 5)
        u = UserLocation(0, 0, 10)
        assert element_distance(cfg, u, AntennaIndex(0, 0)) == pytest.approx(10.0)

    def test_symmetry(self):
        cfg = make_config(5, 5)
        u = UserLocation(0, 0, 10)
        d1 = element_distance(cfg, u, AntennaIndex(2, 0))
        d2 = element_distance(cfg, u, AntennaIndex(-2, 0))
        assert d1 == pytest.approx(d2)

    def test_matches_norm_oracle(self, rng):
        cfg = make_config(9, 6)
        for _ in range(20):
            u = UserLocation(*rng.uniform(-5, 5, size=2), rng.uniform(0.1, 20))
            ix = rng.choice(cfg.x_lattice())
            iy = rng.choice(cfg.y_lattice())
            expect = math.sqrt((ix * cfg.delta_x - u.x) ** 2
                               + (iy * cfg.delta_y - u.y) ** 2 + u.z ** 2)
            assert element_distance(cfg, u, AntennaIndex(ix, iy)) == pytest.approx(expect, rel=1e-14)

    def test_never_below_height(self, rng):
        cfg = make_config(6, 4)
        u = UserLocation(1.2, -0.7, 3.3)
        for ix in cfg.x_lattice():
            for iy in cfg.y_lattice():
                assert element_distance(cfg, u, AntennaIndex(ix, iy)) >= u.z


class TestUserLocation:
    def test_unit_direction_cosines(self, rng):
        for _ in range(50):
            u = UserLocation(*rng.uniform(-30, 30, size=2), rng.uniform(1e-3, 50))
            assert abs(np.sum(u.cosines ** 2) - 1.0) < 1e-12

    def test_behind_array_rejected(self):
        with pytest.raises(DomainError):
            UserLocation(1, 1, -0.1)

    def test_origin_rejected(self):
        with pytest.raises(DomainError):
            UserLocation(0, 0, 0)


class TestUserFromPolar:
    def test_broadside(self):
        u = user_from_polar(10, 0, 0)
        assert (u.x, u.y, u.z) == pytest.approx((0, 0, 10))

    def test_endfire_x(self):
        u = user_from_polar(10, math.pi / 2, 0)
        assert (u.x, u.y, u.z) == pytest.approx((10, 0, 0), abs=1e-12)

    def test_diagonal_inversion(self):
        # direction (1,1,1)/sqrt(3) at distance sqrt(300) lands on [10,10,10]
        psi_e = math.acos(1 / math.sqrt(3))
        psi_a = math.pi / 4
        u = user_from_polar(math.sqrt(300), psi_e, psi_a)
        assert (u.x, u.y, u.z) == pytest.approx((10, 10, 10), rel=1e-10)

    def test_roundtrip(self, rng):
        for _ in range(30):
            r = rng.uniform(1, 100)
            psi_e = rng.uniform(0, math.pi / 2 * 0.999)
            psi_a = rng.uniform(0, 2 * math.pi)
            u = user_from_polar(r, psi_e, psi_a)
            assert u.distance == pytest.approx(r, rel=1e-10)
            assert u.elevation == pytest.approx(psi_e, rel=1e-8, abs=1e-10)
            back = user_from_polar(u.distance, u.elevation, u.azimuth)
            assert (back.x, back.y, back.z) == pytest.approx((u.x, u.y, u.z),
                                                             rel=1e-10, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            user_from_polar(-1, 0, 0)
        with pytest.raises(DomainError):
            user_from_polar(1, math.pi * 0.6, 0)


class TestSampleUsers:
    def test_degenerate_box(self):
        users = sample_users((3.0, 3.0, 7.0, 7.0), 1, seed=0)
        assert (users[0].x, users[0].y, users[0].z) == (3.0, 0.0, 7.0)

    def test_seed_reproducibility(self):
        a = sample_users((-25, 25, 2, 12), 50, seed=42)
        b = sample_users((-25, 25, 2, 12), 50, seed=42)
        assert [(u.x, u.z) for u in a] == [(u.x, u.z) for u in b]

    def test_different_seed_differs(self):
        a = sample_users((-25, 25, 2, 12), 5, seed=1)
        b = sample_users((-25, 25, 2, 12), 5, seed=2)
        assert [(u.x, u.z) for u in a] != [(u.x, u.z) for u in b]

    def test_uniform_mean_within_three_sigma(self):
        n = 10_000
        users = sample_users((-25, 25, 2, 12), n, seed=7)
        xs = np.array([u.x for u in users])
        zs = np.array([u.z for u in users])
        # standard error of the mean of U(a,b) is (b-a)/sqrt(12 n)
        assert abs(xs.mean() - 0.0) < 3 * 50 / math.sqrt(12 * n)
        assert abs(zs.mean() - 7.0) < 3 * 10 / math.sqrt(12 * n)
        assert all(u.y == 0.0 for u in users[:100])

    def test_invalid_region(self):
        with pytest.raises(DomainError):
            sample_users((-1, 1, 0.0, 5), 3, seed=0)
        with pytest.raises(DomainError):
            sample_users((-1, 1, 2, 5), 0, seed=0)
        with pytest.raises(DomainError):
            sample_users((-1, 1, 2, math.inf), 3, seed=0)


class TestScenarioFile:
    def test_load_and_defaults(self, tmp_path):
        path = tmp_path / "scen.ini"
        path.write_text("[scenario]\nlambda = 0.1256\nm_x = 100\nm_y = 10\n"
                        "user_region = -25, 25, 2, 12\nk = 5\nseed = 3\n")
        scen = load_scenario(path)
        assert scen.m_x == 100 and scen.k == 5 and scen.seed == 3
        cfg = scen.array_config()
        assert cfg.n_elements == 1000
        users = scen.draw_users()
        assert len(users) == 5

    def test_missing_section(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[other]\nx = 1\n")
        with pytest.raises(DomainError):
            load_scenario(path)

    def test_bad_region(self, tmp_path):
        path = tmp_path / "bad2.ini"
        path.write_text("[scenario]\nuser_region = 1, 2, 3\n")
        with pytest.raises(DomainError):
            load_scenario(path)
