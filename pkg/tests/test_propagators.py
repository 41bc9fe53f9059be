import math

import numpy as np
import pytest

from zaklab.fields import (
    TWO_PI,
    FourierField,
    MeanZeroError,
    ZakharovState,
    phase_space_norm,
    sobolev_norm,
)
from zaklab.flow import SchemeSpec, evolve
from zaklab.propagators import (
    PhysicalConstants,
    PicardSettings,
    free_schrodinger,
    free_wave,
    picard_iterate,
    schrodinger_nonlinearity,
    wave_forcing,
)

from conftest import make_smooth_state, quadrature_coefficient


def brute_force_product(u: FourierField, n: FourierField) -> np.ndarray:
    """Direct convolution oracle: (un)_hat[k] = (1/2pi) sum_j u_hat[j] n_hat[k-j]."""
    K = u.grid_size
    out = np.zeros(2 * K + 1, dtype=np.complex128)
    for k in range(-K, K + 1):
        acc = 0.0 + 0.0j
        for j in range(-K, K + 1):
            if abs(k - j) <= K:
                acc += u.coeffs[j + K] * n.coeffs[k - j + K]
        out[k + K] = acc / TWO_PI
    return out


class TestConstants:
    def test_integer_ratio_rejected(self):
        with pytest.raises(ValueError, match="integer"):
            PhysicalConstants(1.0, 2.0)
        with pytest.raises(ValueError, match="integer"):
            PhysicalConstants(1.0, 3.0 + 1e-12)

    def test_near_integer_tolerance(self):
        PhysicalConstants(1.0, 2.0 + 1e-6)  # outside the 1e-9 band: fine

    def test_positivity(self):
        with pytest.raises(ValueError):
            PhysicalConstants(-1.0, 0.5)


class TestFreeSchrodinger:
    def test_t0_identity(self, consts):
        u = make_smooth_state(8, seed=1).u
        out = free_schrodinger(u, 0.0, consts)
        assert np.array_equal(out.coeffs, u.coeffs)

    def test_modulus_preserved(self, consts):
        u = make_smooth_state(8, seed=2).u
        out = free_schrodinger(u, 0.37, consts)
        assert np.max(np.abs(np.abs(out.coeffs) - np.abs(u.coeffs))) <= 1e-15

    def test_pi_phase(self):
        c = PhysicalConstants(1.0, 0.5)
        u = FourierField.from_modes(4, {1: 1.0})
        out = free_schrodinger(u, math.pi, c)
        assert out.get(1) == pytest.approx(-1.0, abs=1e-15)

    def test_group_property(self, consts):
        u = make_smooth_state(8, seed=3).u
        ab = free_schrodinger(free_schrodinger(u, 0.2, consts), 0.3, consts)
        direct = free_schrodinger(u, 0.5, consts)
        nz = np.abs(direct.coeffs) > 0
        rel = np.abs(ab.coeffs[nz] - direct.coeffs[nz]) / np.abs(direct.coeffs[nz])
        assert np.max(rel) <= 1e-12

    def test_sobolev_norm_preserved(self, consts):
        u = make_smooth_state(8, seed=4).u
        for s in (-1.5, 0.0, 2.0):
            before = sobolev_norm(u, s)
            after = sobolev_norm(free_schrodinger(u, 1.7, consts), s)
            assert abs(after - before) <= 1e-14 * before


class TestFreeWave:
    def test_t0_identity(self, consts):
        z = make_smooth_state(8, seed=5)
        n, nd = free_wave(z.n, z.ndot, 0.0, consts)
        assert np.array_equal(n.coeffs, z.n.coeffs)
        assert np.array_equal(nd.coeffs, z.ndot.coeffs)

    def test_per_mode_energy_conserved(self, consts):
        z = make_smooth_state(8, seed=6)
        n, nd = free_wave(z.n, z.ndot, 2.31, consts)
        k = np.arange(-8, 9).astype(float)
        nz = k != 0
        before = (np.abs(z.n.coeffs[nz]) ** 2
                  + np.abs(z.ndot.coeffs[nz] / (consts.beta * np.abs(k[nz]))) ** 2)
        after = (np.abs(n.coeffs[nz]) ** 2
                 + np.abs(nd.coeffs[nz] / (consts.beta * np.abs(k[nz]))) ** 2)
        assert np.max(np.abs(after - before) / before) <= 1e-12

    def test_quarter_period_swap(self):
        # beta=1/2, k=1, t=pi: cos(pi/2)=0, sin(pi/2)/(1/2)=2
        c = PhysicalConstants(1.0, 0.5)
        n0 = FourierField.from_modes(4, {1: 0.3 + 0.1j, -1: 0.3 - 0.1j}, is_real=True)
        nd0 = FourierField.from_modes(4, {1: 0.5 - 0.2j, -1: 0.5 + 0.2j}, is_real=True)
        n, nd = free_wave(n0, nd0, math.pi, c)
        assert n.get(1) == pytest.approx(2.0 * nd0.get(1), rel=1e-14)

    def test_mean_rejected(self, consts):
        n = FourierField.from_modes(4, {0: 1.0}, is_real=True)
        nd = FourierField.zeros(4, is_real=True)
        with pytest.raises(MeanZeroError):
            free_wave(n, nd, 0.1, consts)

    def test_group_property(self, consts):
        z = make_smooth_state(8, seed=7)
        n1, nd1 = free_wave(z.n, z.ndot, 0.4, consts)
        n2, nd2 = free_wave(n1, nd1, 0.6, consts)
        n, nd = free_wave(z.n, z.ndot, 1.0, consts)
        for a, b in ((n2, n), (nd2, nd)):
            nz = np.abs(b.coeffs) > 0
            assert np.max(np.abs(a.coeffs[nz] - b.coeffs[nz]) / np.abs(b.coeffs[nz])) <= 1e-12

    def test_realness_preserved(self, consts):
        z = make_smooth_state(8, seed=8)
        n, nd = free_wave(z.n, z.ndot, 0.9, consts)
        assert n.realness_defect() <= 1e-15
        assert nd.realness_defect() <= 1e-15


class TestSchrodingerNonlinearity:
    def test_zero_factor(self):
        u = make_smooth_state(8, seed=9).u
        out = schrodinger_nonlinearity(u, FourierField.zeros(8, is_real=True))
        assert np.max(np.abs(out.coeffs)) == 0.0

    def test_constant_density_is_identity(self):
        u = make_smooth_state(8, seed=10).u
        n = FourierField.from_modes(8, {0: TWO_PI}, is_real=True)
        out = schrodinger_nonlinearity(u, n)
        assert np.max(np.abs(out.coeffs - u.coeffs)) <= 1e-12

    def test_trig_identity(self):
        # e^{ix} * 2cos(x) = e^{2ix} + 1
        u = FourierField.from_modes(8, {1: TWO_PI})
        n = FourierField.from_modes(8, {1: TWO_PI, -1: TWO_PI}, is_real=True)
        out = schrodinger_nonlinearity(u, n)
        assert out.get(0) == pytest.approx(TWO_PI, abs=1e-12)
        assert out.get(2) == pytest.approx(TWO_PI, abs=1e-12)
        assert abs(out.get(1)) <= 1e-12

    @pytest.mark.parametrize("grid_size", [2, 5, 8])
    def test_matches_convolution_oracle(self, grid_size):
        z = make_smooth_state(grid_size, seed=11 + grid_size)
        out = schrodinger_nonlinearity(z.u, z.n)
        oracle = brute_force_product(z.u, z.n)
        assert np.max(np.abs(out.coeffs - oracle)) <= 1e-12


class TestWaveForcing:
    def test_plane_wave_gives_zero(self):
        u = FourierField.from_modes(8, {3: 1.7 - 0.3j})
        out = wave_forcing(u)
        assert np.max(np.abs(out.coeffs)) <= 1e-13

    def test_zero_field(self):
        assert np.max(np.abs(wave_forcing(FourierField.zeros(6)).coeffs)) == 0.0

    def test_two_mode_example_against_quadrature_oracle(self):
        # u = 1 + e^{ix}: |u|^2 = 2 + 2cos x, so dxx|u|^2 = -2cos x and the
        # k = +-1 coefficients are -2pi (oracle below recomputes them).
        u = FourierField.from_modes(8, {0: TWO_PI, 1: TWO_PI})
        expected = quadrature_coefficient(lambda x: -2.0 * np.cos(x), 1)
        assert expected == pytest.approx(-TWO_PI, rel=1e-12)
        out = wave_forcing(u)
        assert out.get(1) == pytest.approx(expected, rel=1e-12)
        assert out.get(-1) == pytest.approx(expected, rel=1e-12)

    def test_random_field_against_quadrature_oracle(self):
        z = make_smooth_state(6, seed=14)
        out = wave_forcing(z.u)

        def second_derivative_of_intensity(x):
            vals = np.zeros_like(x, dtype=np.complex128)
            for k in range(-6, 7):
                vals += z.u.coeffs[k + 6] * np.exp(1j * k * x) / TWO_PI
            intensity = np.abs(vals) ** 2
            # differentiate the trigonometric polynomial mode by mode
            out_vals = np.zeros_like(x, dtype=np.complex128)
            for k in range(-12, 13):
                coeff = np.sum(np.exp(-1j * k * x) * intensity) * TWO_PI / len(x)
                out_vals += -(k**2) * coeff * np.exp(1j * k * x) / TWO_PI
            return out_vals

        x = 2.0 * np.pi * np.arange(64) / 64
        oracle_vals = second_derivative_of_intensity(x)
        for k in range(-6, 7):
            oracle_k = np.sum(np.exp(-1j * k * x) * oracle_vals) * TWO_PI / 64
            assert out.get(k) == pytest.approx(oracle_k, abs=1e-11)

    def test_mean_zero_and_real(self):
        u = make_smooth_state(8, seed=15).u
        out = wave_forcing(u)
        assert out.mean_coefficient == 0.0
        assert out.realness_defect() <= 1e-14


class TestPicard:
    def test_zero_iterations_is_free_flow(self, consts):
        z = make_smooth_state(8, seed=16, norm=0.3)
        out = picard_iterate(z, PicardSettings(0, 8, 1e-2), consts)
        free_u = free_schrodinger(z.u, 1e-2, consts)
        n, nd = free_wave(z.n, z.ndot, 1e-2, consts)
        assert np.max(np.abs(out.u.coeffs - free_u.coeffs)) <= 1e-15
        assert np.max(np.abs(out.n.coeffs - n.coeffs)) <= 1e-15
        assert np.max(np.abs(out.ndot.coeffs - nd.coeffs)) <= 1e-15

    def test_plane_wave_stays_free(self, consts):
        z = ZakharovState.zeros(8)
        z.u.coeffs[8 + 2] = 0.8
        out = picard_iterate(z, PicardSettings(5, 16, 1e-2), consts)
        free_u = free_schrodinger(z.u, 1e-2, consts)
        assert np.max(np.abs(out.u.coeffs - free_u.coeffs)) <= 1e-14
        assert np.max(np.abs(out.n.coeffs)) <= 1e-14

    def test_iterates_contract(self, consts):
        z = make_smooth_state(8, seed=17, norm=0.3)
        finals = [picard_iterate(z, PicardSettings(j, 32, 5e-3), consts)
                  for j in range(5)]
        gaps = [phase_space_norm(finals[j + 1] - finals[j]) for j in range(4)]
        assert all(gaps[j + 1] < gaps[j] for j in range(3))

    def test_matches_stepper_at_small_window(self, consts):
        z = make_smooth_state(16, seed=18, norm=0.25)
        pic = picard_iterate(z, PicardSettings(8, 64, 1e-2), consts)
        ref = evolve(z, 1e-2, SchemeSpec(dt=1e-4, sample_stride=10**9), consts).final_state
        assert phase_space_norm(pic - ref) <= 1e-6

    def test_window_refinement_order(self, consts):
        # picard with many iterations vs the stepper at matched windows:
        # the gap should shrink at second order or better
        z = make_smooth_state(12, seed=19, norm=0.3)
        windows = [4e-2, 2e-2, 1e-2]
        gaps = []
        for w in windows:
            pic = picard_iterate(z, PicardSettings(10, 64, w), consts)
            stp = evolve(z, w, SchemeSpec(dt=w / 4, sample_stride=10**9), consts).final_state
            gaps.append(phase_space_norm(pic - stp))
        slope = np.polyfit(np.log(windows), np.log(gaps), 1)[0]
        assert slope >= 1.8

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            PicardSettings(-1, 8, 0.1)
        with pytest.raises(ValueError):
            PicardSettings(2, 8, 1.5)
