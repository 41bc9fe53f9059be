import math

import numpy as np
import pytest

from zaklab.fields import (
    TWO_PI,
    FourierField,
    ZakharovState,
    phase_space_norm,
)
from zaklab.flow import SchemeSpec, evolve, evolve_truncated, hamiltonian, step_full
from zaklab.propagators import zakharov_rhs
from zaklab.symplectic import (
    BallSpec,
    CylinderSpec,
    apply_J,
    ball_contains,
    check_symplectic,
    cylinder_contains,
    hamiltonian_vector_field,
    phase_space_inner,
    random_tangent,
    symplectic_form,
)

from conftest import make_smooth_state, quadrature_integral


def tangent(seed, grid_size=12, band=6):
    return random_tangent(grid_size, band, np.random.default_rng(seed))


class TestSymplecticForm:
    def test_vanishes_on_diagonal(self, consts):
        a = tangent(1)
        assert symplectic_form(a, a, consts) == pytest.approx(0.0, abs=1e-13)

    def test_antisymmetry(self, consts):
        a, b = tangent(2), tangent(3)
        ab = symplectic_form(a, b, consts)
        ba = symplectic_form(b, a, consts)
        assert abs(ab + ba) <= 1e-13 * (abs(ab) + 1.0)

    def test_bilinearity(self, consts):
        a, b, c3 = tangent(4), tangent(5), tangent(6)
        lhs = symplectic_form(a.scale(1.7) + b, c3, consts)
        rhs = 1.7 * symplectic_form(a, c3, consts) + symplectic_form(b, c3, consts)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), 1.0)

    def test_u_pairing_value_from_quadrature(self, consts):
        # a_u = e^{ix}, b_u = i e^{ix}: the u pairing is
        # 2 Im int conj(a_u) b_u dx = 2 Im(2pi i) = 4pi (oracle recomputes it)
        a = ZakharovState.zeros(4)
        a.u.coeffs[4 + 1] = TWO_PI
        b = ZakharovState.zeros(4)
        b.u.coeffs[4 + 1] = TWO_PI * 1j
        oracle = 2.0 * quadrature_integral(
            lambda x: np.imag(np.conj(np.exp(1j * x)) * 1j * np.exp(1j * x)))
        assert oracle == pytest.approx(4.0 * math.pi, rel=1e-12)
        assert symplectic_form(a, b, consts) == pytest.approx(oracle, rel=1e-12)

    def test_wave_cross_pairing_value_from_quadrature(self, consts):
        # a_n = cos x paired against b_ndot = cos x:
        # omega = -(1/beta^2) int a_n dx^{-2} b_ndot dx and dx^{-2} cos = -cos,
        # so the value is pi / beta^2
        a = ZakharovState.zeros(4)
        a.n.coeffs[4 + 1] = math.pi
        a.n.coeffs[4 - 1] = math.pi
        b = ZakharovState.zeros(4)
        b.ndot.coeffs[4 + 1] = math.pi
        b.ndot.coeffs[4 - 1] = math.pi
        oracle = -(1.0 / consts.beta**2) * quadrature_integral(
            lambda x: np.cos(x) * (-np.cos(x)))
        assert oracle == pytest.approx(math.pi / consts.beta**2, rel=1e-12)
        assert symplectic_form(a, b, consts) == pytest.approx(oracle, rel=1e-12)

    def test_same_slot_wave_pairing_vanishes(self, consts):
        a = ZakharovState.zeros(4)
        a.n.coeffs[4 + 1] = math.pi
        a.n.coeffs[4 - 1] = math.pi
        b = ZakharovState.zeros(4)
        b.n.coeffs[4 + 1] = -math.pi * 1j
        b.n.coeffs[4 - 1] = math.pi * 1j
        assert symplectic_form(a, b, consts) == pytest.approx(0.0, abs=1e-14)

    def test_mean_guard(self, consts):
        a = tangent(7)
        a.n.coeffs[12] = 0.1
        with pytest.raises(ValueError, match="mean-zero"):
            symplectic_form(a, tangent(8), consts)

    def test_nondegenerate_on_band(self, consts):
        # every basis direction with 0 < |k| <= band has a partner
        grid_size, band = 10, 6
        for k in range(1, band + 1):
            for slot in ("u_re", "u_im", "n", "ndot"):
                e = ZakharovState.zeros(grid_size)
                partner = ZakharovState.zeros(grid_size)
                if slot == "u_re":
                    e.u.coeffs[grid_size + k] = 1.0
                    partner.u.coeffs[grid_size + k] = 1j
                elif slot == "u_im":
                    e.u.coeffs[grid_size + k] = 1j
                    partner.u.coeffs[grid_size + k] = 1.0
                elif slot == "n":
                    e.n.coeffs[grid_size + k] = 1.0
                    e.n.coeffs[grid_size - k] = 1.0
                    partner.ndot.coeffs[grid_size + k] = 1.0
                    partner.ndot.coeffs[grid_size - k] = 1.0
                else:
                    e.ndot.coeffs[grid_size + k] = 1.0
                    e.ndot.coeffs[grid_size - k] = 1.0
                    partner.n.coeffs[grid_size + k] = 1.0
                    partner.n.coeffs[grid_size - k] = 1.0
                assert abs(symplectic_form(e, partner, consts)) >= 1e-8


class TestAlmostComplexStructure:
    def test_square_is_minus_identity(self, consts):
        a = tangent(9)
        jj = apply_J(apply_J(a))
        assert np.max(np.abs(jj.u.coeffs + a.u.coeffs)) <= 1e-13
        assert np.max(np.abs(jj.n.coeffs + a.n.coeffs)) <= 1e-13
        assert np.max(np.abs(jj.ndot.coeffs + a.ndot.coeffs)) <= 1e-13

    def test_compatibility_with_inner_product(self, consts):
        rng = np.random.default_rng(10)
        for _ in range(100):
            a = random_tangent(10, 6, rng)
            b = random_tangent(10, 6, rng)
            lhs = phase_space_inner(a, apply_J(b), consts)
            rhs = symplectic_form(a, b, consts)
            assert abs(lhs - rhs) <= 1e-11 * max(abs(rhs), 1.0)

    def test_u_component_multiplies_by_minus_i(self, consts):
        a = ZakharovState.zeros(4)
        a.u.coeffs[4 + 1] = TWO_PI
        out = apply_J(a)
        assert out.u.get(1) == pytest.approx(-1j * TWO_PI, rel=1e-15)

    def test_preserves_realness(self, consts):
        a = tangent(11)
        out = apply_J(a)
        assert out.n.realness_defect() <= 1e-15
        assert out.ndot.realness_defect() <= 1e-15


class TestHamiltonianVectorField:
    def test_zero_state_is_critical(self, consts):
        out = hamiltonian_vector_field(ZakharovState.zeros(6), consts, 1e-5)
        assert np.max(np.abs(out.u.coeffs)) <= 1e-9
        assert np.max(np.abs(out.n.coeffs)) <= 1e-9

    def test_wave_only_reduces_to_linear_system(self, consts):
        z = make_smooth_state(8, seed=12)
        z.u.coeffs[:] = 0.0
        out = hamiltonian_vector_field(z, consts, 1e-5)
        k = np.arange(-8, 9).astype(float)
        assert np.max(np.abs(out.n.coeffs - z.ndot.coeffs)) <= 1e-8
        expected_ndot = -consts.beta**2 * k**2 * z.n.coeffs
        assert np.max(np.abs(out.ndot.coeffs - expected_ndot)) <= 1e-8

    def test_matches_explicit_right_side(self, consts):
        z = make_smooth_state(12, seed=13, norm=0.8)
        fd = hamiltonian_vector_field(z, consts, 1e-5)
        explicit = zakharov_rhs(z, consts)
        for a, b in ((fd.u, explicit.u), (fd.n, explicit.n), (fd.ndot, explicit.ndot)):
            assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-6

    def test_energy_critical_along_own_field(self, consts):
        z = make_smooth_state(10, seed=14, norm=0.7)
        x = hamiltonian_vector_field(z, consts, 1e-5)
        eps = 1e-6
        plus = hamiltonian(z + x.scale(eps), consts)
        minus = hamiltonian(z - x.scale(eps), consts)
        assert abs(plus - minus) / (2 * eps) <= 1e-8

    def test_step_validation(self, consts):
        with pytest.raises(ValueError):
            hamiltonian_vector_field(ZakharovState.zeros(4), consts, 0.0)


class TestCheckSymplectic:
    def test_identity_flow_defect_is_exactly_zero(self, consts):
        origin = ZakharovState.zeros(10)
        rep = check_symplectic(lambda z, t: z, origin, 0.0, 6, 5, 1e-5, consts,
                               np.random.default_rng(15))
        assert rep.max_defect == 0.0

    def test_scaling_map_defect_is_three(self, consts):
        origin = ZakharovState.zeros(10)
        rep = check_symplectic(lambda z, t: z.scale(2.0), origin, 0.0, 6, 5,
                               1e-5, consts, np.random.default_rng(16))
        assert rep.max_defect == pytest.approx(3.0, abs=1e-12)

    def test_free_flow_defect_small(self, consts):
        z = make_smooth_state(12, seed=17, norm=0.7)
        spec = SchemeSpec(dt=1e-3, linear_only=True, sample_stride=10**9)
        flow = lambda w, t: evolve(w, t, spec, consts).final_state
        rep = check_symplectic(flow, z, 0.05, 6, 8, 1e-5, consts,
                               np.random.default_rng(18))
        assert rep.max_defect <= 1e-8

    def test_single_strang_step_on_band(self, consts):
        z = make_smooth_state(16, seed=19, norm=0.7)
        flow = lambda w, t: step_full(w, 1e-3, consts)
        rep = check_symplectic(flow, z, 1e-3, 8, 10, 1e-5, consts,
                               np.random.default_rng(20))
        assert rep.max_defect <= 1e-5

    def test_truncated_flow_defect(self, consts):
        z = make_smooth_state(16, seed=21, norm=0.7)
        spec = SchemeSpec(dt=1e-3, sample_stride=10**9)
        flow = lambda w, t: evolve_truncated(w, t, 8, spec, consts).final_state
        rep = check_symplectic(flow, z, 0.02, 8, 6, 1e-5, consts,
                               np.random.default_rng(22))
        assert rep.max_defect <= 1e-5

    def test_report_serializes(self, consts, tmp_path):
        origin = ZakharovState.zeros(8)
        rep = check_symplectic(lambda z, t: z, origin, 0.0, 4, 3, 1e-5, consts,
                               np.random.default_rng(23))
        path = tmp_path / "defects.jsonl"
        rep.to_jsonl(path)
        assert len(path.read_text().splitlines()) == 3


class TestGeometry:
    def test_center_in_own_ball(self, consts):
        z = make_smooth_state(6, seed=24)
        assert ball_contains(BallSpec(z, 1e-9), z)

    def test_closed_boundary(self):
        center = ZakharovState.zeros(6)
        z = ZakharovState.zeros(6)
        z.u.coeffs[6 + 1] = math.sqrt(TWO_PI)  # phase-space norm exactly computable
        r = phase_space_norm(z - center)
        assert ball_contains(BallSpec(center, r), z)

    def test_cylinder_example(self):
        z = ZakharovState.zeros(4)
        z.u.coeffs[4 + 1] = 1.0
        z.n.coeffs[4 + 1] = 2.0
        z.n.coeffs[4 - 1] = 2.0
        z.ndot.coeffs[4 + 1] = 8.0
        z.ndot.coeffs[4 - 1] = 8.0
        spec = CylinderSpec(1, (0, 0, 0), 11.0)
        assert cylinder_contains(spec, z)
        assert not cylinder_contains(CylinderSpec(1, (0, 0, 0), 10.99), z)

    def test_spec_validation(self):
        z = ZakharovState.zeros(4)
        with pytest.raises(ValueError):
            BallSpec(z, 0.0)
        with pytest.raises(ValueError):
            CylinderSpec(0, (0, 0, 0), 1.0)
