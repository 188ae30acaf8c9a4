import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import factorial, genlaguerre

import kerrcat as kc


def displacement_dense(m, n, z, dim=60):
    """Brute-force matrix exponential of z adag - z* a."""
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1)
    d = expm(z * a.conj().T - np.conj(z) * a)
    return d[m, n]


def displacement_genlaguerre(m, n, z):
    """Independent branch formula with scipy's Laguerre polynomials."""
    x = abs(z) ** 2
    if m >= n:
        pref = math.sqrt(factorial(n) / factorial(m)) * z ** (m - n)
        return pref * math.exp(-x / 2) * genlaguerre(n, m - n)(x)
    pref = math.sqrt(factorial(m) / factorial(n)) * (-np.conj(z)) ** (n - m)
    return pref * math.exp(-x / 2) * genlaguerre(m, n - m)(x)


class TestQFunction:
    def test_vacuum_at_origin(self):
        vac = kc.fock_state(0, 16)
        assert kc.q_function(vac, 0.0) == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_coherent_gaussian(self):
        rho = kc.coherent_state(3.0, 64)
        assert kc.q_function(rho, 3.0) == pytest.approx(1.0 / math.pi, abs=1e-10)
        for beta in (0.0, 1.5 + 0.5j, 4.0 - 1.0j, 2.2j):
            expect = math.exp(-abs(beta - 3.0) ** 2) / math.pi
            assert kc.q_function(rho, beta) == pytest.approx(expect, abs=1e-10)

    def test_nonnegative(self, ref_params):
        rho = kc.evolve_field(kc.coherent_state(3.0, 64), 4.0, ref_params)
        for beta in (0.0, 1.0 + 2.0j, -3.0):
            assert kc.q_function(rho, beta) >= -1e-12

    def test_four_peaks_at_quarter_revival(self, coherent5, ref_params):
        t_r = kc.revival_time(ref_params, 25.0)
        rho = kc.evolve_field(coherent5, 0.25 * t_r, ref_params)
        radius = math.sqrt(kc.mean_photon(rho))
        angles = np.linspace(0.0, 2.0 * math.pi, 360, endpoint=False)
        profile = np.array(
            [kc.q_function(rho, radius * np.exp(1j * a)) for a in angles]
        )
        up = profile > np.roll(profile, 1)
        down = profile > np.roll(profile, -1)
        peaks = np.nonzero(up & down & (profile > 0.1 * profile.max()))[0]
        assert len(peaks) == 4

    def test_two_peaks_on_imaginary_axis_at_collapse(self, coherent5, ref_params):
        t_r = kc.revival_time(ref_params, 25.0)
        rho = kc.evolve_field(coherent5, 0.5 * t_r, ref_params)
        radius = math.sqrt(kc.mean_photon(rho))
        on_axis = kc.q_function(rho, 1j * radius) + kc.q_function(rho, -1j * radius)
        off_axis = kc.q_function(rho, radius) + kc.q_function(rho, -radius)
        assert on_axis > 100.0 * off_axis


class TestDisplacementElement:
    def test_ground_to_ground(self):
        beta = 0.9 - 0.4j
        z = 2.0 * beta
        expect = math.exp(-2.0 * abs(beta) ** 2)
        assert kc.displacement_element(0, 0, z) == pytest.approx(expect, rel=1e-13)

    def test_identity_at_zero(self):
        assert kc.displacement_element(4, 4, 0.0) == 1.0
        assert kc.displacement_element(4, 2, 0.0) == 0.0

    def test_against_dense_exponential(self):
        z = 1.2 + 0.7j
        assert kc.displacement_element(5, 3, z) == pytest.approx(
            displacement_dense(5, 3, z), abs=1e-10
        )
        for m, n, zz, dim in [
            (3, 5, z, 60),
            (0, 7, -0.6 + 1.9j, 60),
            (12, 12, 2.5j, 80),
            (40, 38, 12.0 + 3.0j, 260),
            (17, 2, -4.0 - 4.0j, 160),
        ]:
            assert kc.displacement_element(m, n, zz) == pytest.approx(
                displacement_dense(m, n, zz, dim=dim), abs=1e-10
            )

    def test_against_library_laguerre(self):
        for m, n in [(0, 0), (2, 9), (9, 2), (15, 15), (30, 25)]:
            for z in (0.3, 1.1 - 2.0j, 4.0j):
                assert kc.displacement_element(m, n, z) == pytest.approx(
                    displacement_genlaguerre(m, n, z), rel=1e-10, abs=1e-12
                )

    def test_unitarity_row_sums(self):
        # the displaced state reaches out to (sqrt(n) + |z|)^2, which for the
        # largest corner (n=40, |z|=6) sits beyond level 128; the horizon
        # follows the classical support plus a decay margin
        for n in (0, 5, 17, 40):
            for z in (0.3, 2.0 - 1.0j, 6.0j, 5.0 + 3.0j):
                horizon = max(129, int((math.sqrt(n) + abs(z)) ** 2) + 60)
                total = sum(
                    abs(kc.displacement_element(m, n, z)) ** 2 for m in range(horizon)
                )
                assert total == pytest.approx(1.0, abs=1e-8)

    def test_extreme_arguments_stay_finite(self):
        # far corner of a huge grid: predicted magnitude collapses to zero
        assert kc.displacement_element(0, 128, 1e-4) == 0.0
        val = kc.displacement_element(128, 0, 40.0 + 40.0j)
        assert np.isfinite(val)


class TestWigner:
    def test_coherent_gaussian(self):
        rho = kc.coherent_state(3.0, 64)
        assert kc.wigner(rho, 3.0) == pytest.approx(2.0 / math.pi, abs=1e-10)
        for beta in (2.0 + 1.0j, 4.0, 1.5 - 0.5j):
            expect = 2.0 / math.pi * math.exp(-2.0 * abs(beta - 3.0) ** 2)
            assert kc.wigner(rho, beta) == pytest.approx(expect, abs=1e-10)

    def test_cat_parity_at_origin(self):
        even = kc.cat_state(kc.CatSpec(3.0j, 0.0), 64)
        odd = kc.cat_state(kc.CatSpec(3.0j, math.pi), 64)
        assert kc.wigner(even, 0.0) == pytest.approx(2.0 / math.pi, abs=1e-10)
        assert kc.wigner(odd, 0.0) == pytest.approx(-2.0 / math.pi, abs=1e-10)

    def test_interference_fringes_at_collapse(self, coherent5, ref_params):
        t_r = kc.revival_time(ref_params, 25.0)
        rho = kc.evolve_field(coherent5, 0.5 * t_r, ref_params)
        # probe the interior directly (a grid this small would trip the
        # edge guard by construction)
        probe = np.linspace(-1.0, 1.0, 41).astype(complex)
        fringe = kc.phasespace._wigner_values(rho.matrix, probe)
        # a two-component superposition leaves oscillations of both signs
        assert fringe.max() > 0.3
        assert fringe.min() < -0.1


class TestGridKernels:
    def test_grid_matches_scalar_routes(self, ref_params):
        rho = kc.evolve_field(kc.coherent_state(2.0, 40), 3.0, ref_params)
        spec = kc.GridSpec(re_min=-6.0, re_max=6.0, n_re=7, im_min=-6.0, im_max=6.0, n_im=7)
        wq = kc.grid_eval(rho, spec, kind="Q")
        ww = kc.grid_eval(rho, spec, kind="W")
        re = spec.re_axis()
        im = spec.im_axis()
        for i in (1, 3, 5):
            for j in (2, 4):
                beta = re[j] + 1j * im[i]
                assert wq.values[i, j] == pytest.approx(kc.q_function(rho, beta), abs=1e-12)
                assert ww.values[i, j] == pytest.approx(kc.wigner(rho, beta), abs=1e-12)

    def test_normalization(self, ref_params):
        rho = kc.evolve_field(kc.coherent_state(3.0, 64), 11.0, ref_params)
        spec = kc.GridSpec(re_min=-7.5, re_max=7.5, n_re=101, im_min=-7.5, im_max=7.5, n_im=101)
        assert kc.grid_eval(rho, spec, kind="Q").integral() == pytest.approx(1.0, abs=1e-3)
        assert kc.grid_eval(rho, spec, kind="W").integral() == pytest.approx(1.0, abs=1e-3)

    def test_smoothing_wigner_gives_husimi(self):
        # convolving W with the Gaussian (2/pi) e^{-2|b|^2} reproduces Q
        rho = kc.cat_state(kc.CatSpec(3.0j, 0.0), 64)
        spec = kc.GridSpec(re_min=-7.0, re_max=7.0, n_re=141, im_min=-7.0, im_max=7.0, n_im=141)
        w = kc.grid_eval(rho, spec, kind="W")
        betas = spec.re_axis()[None, :] + 1j * spec.im_axis()[:, None]
        area = spec.cell_area()
        rng = np.random.RandomState(11)
        pts = rng.uniform(-2.5, 2.5, 20) + 1j * rng.uniform(-5.0, 5.0, 20)
        for p in pts:
            kernel = np.exp(-2.0 * np.abs(betas - p) ** 2)
            smoothed = 2.0 / math.pi * float(np.sum(w.values * kernel)) * area
            assert smoothed == pytest.approx(kc.q_function(rho, p), abs=2e-3)

    def test_jobs_bit_identical(self):
        rho = kc.coherent_state(2.0, 32)
        spec = kc.GridSpec(re_min=-5.0, re_max=5.0, n_re=31, im_min=-5.0, im_max=5.0, n_im=31)
        a = kc.grid_eval(rho, spec, kind="W", jobs=1)
        b = kc.grid_eval(rho, spec, kind="W", jobs=4)
        assert np.array_equal(a.values, b.values)

    def test_edge_warning_and_error(self):
        rho = kc.coherent_state(5.0, 128)
        warn_spec = kc.GridSpec(re_min=-8.0, re_max=8.0, n_re=33, im_min=-8.0, im_max=8.0, n_im=33)
        with pytest.warns(RuntimeWarning):
            kc.grid_eval(rho, warn_spec, kind="Q")
        tight_spec = kc.GridSpec(re_min=-6.0, re_max=6.0, n_re=25, im_min=-6.0, im_max=6.0, n_im=25)
        with pytest.raises(ValueError):
            kc.grid_eval(rho, tight_spec, kind="Q")


class TestPsgridFormat:
    def test_roundtrip(self, tmp_path):
        rho = kc.coherent_state(1.0, 32)
        spec = kc.GridSpec(re_min=-5.0, re_max=5.0, n_re=21, im_min=-5.0, im_max=5.0, n_im=11)
        grid = kc.grid_eval(rho, spec, kind="Q", t=1.5)
        path = tmp_path / "sample.psgrid"
        grid.save(path, meta={"delta": "0.0"})
        again = kc.read_psgrid(path)
        assert again.kind == "Q" and again.t == 1.5
        assert again.spec == spec
        assert np.array_equal(again.values, grid.values)

    def test_header_line(self, tmp_path):
        rho = kc.coherent_state(0.5, 16)
        spec = kc.GridSpec(re_min=-4.0, re_max=4.0, n_re=7, im_min=-4.0, im_max=4.0, n_im=5)
        text = kc.grid_eval(rho, spec, kind="W", t=0.25).to_text()
        head = text.split("\n", 1)[0]
        assert head.startswith("psgrid v1 kind=W t=0.25 ")
        assert "re=-4.0:4.0:7" in head and "im=-4.0:4.0:5" in head

    def test_bounds_validation(self):
        spec = kc.GridSpec(re_min=0.0, re_max=1.0, n_re=2, im_min=0.0, im_max=1.0, n_im=2)
        with pytest.raises(ValueError):
            kc.PhaseSpaceGrid(spec=spec, values=-0.5 * np.ones((2, 2)), kind="Q")
        with pytest.raises(ValueError):
            kc.PhaseSpaceGrid(spec=spec, values=np.ones((2, 2)), kind="W")


class TestAnimate:
    def test_manifest_uniform_times(self, tmp_path, ref_params):
        rho = kc.coherent_state(2.0, 32)
        spec = kc.GridSpec(re_min=-6.5, re_max=6.5, n_re=17, im_min=-6.5, im_max=6.5, n_im=17)
        t_r = kc.revival_time(ref_params, 4.0)
        paths, manifest = kc.animate(
            rho, ref_params, (0.0, 0.5 * t_r), 4, spec, "Q", tmp_path, t_r=t_r
        )
        assert len(paths) == 4
        lines = [ln for ln in open(manifest).read().splitlines() if not ln.startswith("#")]
        assert lines[0].startswith("psgrid-manifest v1 kind=Q n_frames=4")
        fractions = [float(ln.split()[2]) for ln in lines[1:]]
        # uniform left-endpoint spacing: k / (2 n_frames) of the revival time
        assert fractions == pytest.approx([0.0, 0.125, 0.25, 0.375], abs=1e-15)

    def test_single_frame_is_initial_gaussian(self, tmp_path, bare_params):
        rho = kc.coherent_state(5.0, 128)
        spec = kc.GridSpec(re_min=-9.0, re_max=9.0, n_re=61, im_min=-9.0, im_max=9.0, n_im=61)
        paths, _ = kc.animate(rho, bare_params, (0.0, 1.0), 1, spec, "Q", tmp_path, t_r=10.0)
        grid = kc.read_psgrid(paths[0])
        i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        assert grid.spec.re_axis()[j] == pytest.approx(5.0, abs=0.15)
        assert grid.spec.im_axis()[i] == pytest.approx(0.0, abs=0.15)
        assert grid.values[i, j] == pytest.approx(1.0 / math.pi, rel=1e-2)

    def test_rejects_empty(self, tmp_path, ref_params):
        with pytest.raises(ValueError):
            kc.animate(kc.coherent_state(1.0, 8), ref_params, (0.0, 1.0), 0, None, "Q", tmp_path, t_r=1.0)
