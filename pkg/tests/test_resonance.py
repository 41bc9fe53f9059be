import math

import numpy as np
import pytest

from zaklab.propagators import PhysicalConstants
from zaklab.resonance import (
    FrequencyTriple,
    SpaceTimeField,
    bilinear_ratio_scan,
    classify_triple,
    modulation_bound,
    modulation_sweep,
    psi_window,
    window_transform,
    xsb_norm,
    y_norm,
    z_norm,
)


class TestFrequencyTriple:
    def test_constraint_enforced(self):
        with pytest.raises(ValueError, match="k0"):
            FrequencyTriple("schrodinger", 4, 2, 1, 1.0, 0.5, 0.5)
        with pytest.raises(ValueError, match="tau0"):
            FrequencyTriple("schrodinger", 3, 2, 1, 1.0, 0.5, 0.4)
        with pytest.raises(ValueError, match="k0 != 0"):
            FrequencyTriple("schrodinger", 0, 1, -1, 0.0, 0.0, 0.0)

    def test_wave_constraints(self):
        FrequencyTriple("wave", 1, 2, 1, 3.0, 4.0, 1.0)
        with pytest.raises(ValueError):
            FrequencyTriple("wave", 2, 2, 1, 3.0, 4.0, 1.0)


class TestModulationBound:
    def test_schrodinger_worked_example(self, consts):
        trip = FrequencyTriple("schrodinger", 3, 2, 1, 4.5, 4.0, 0.5)
        lhs, rhs, residual = modulation_bound(trip, consts)
        assert lhs == pytest.approx(4.5, abs=0)
        assert rhs == pytest.approx(4.5, abs=0)
        assert residual == 0.0

    def test_wave_worked_example(self, consts):
        trip = FrequencyTriple("wave", 1, 2, 1, 3.0, 4.0, 1.0)
        lhs, rhs, residual = modulation_bound(trip, consts)
        assert lhs == pytest.approx(2.5, abs=0)
        assert rhs == pytest.approx(2.5, abs=0)
        assert residual == 0.0

    def test_all_characteristics_forces_positive_max(self, consts):
        # taus on all three characteristics make the largest modulation land
        # exactly on the algebraic bound, which is positive unless beta/alpha
        # hits an integer (excluded by configuration)
        k1, k2 = 5, 2
        k0 = k1 + k2
        tau1 = consts.alpha * k1**2
        tau2 = consts.beta * abs(k2)
        trip = FrequencyTriple("schrodinger", k0, k1, k2, tau1 + tau2, tau1, tau2)
        lhs, rhs, residual = modulation_bound(trip, consts)
        assert residual == pytest.approx(0.0, abs=1e-12)
        assert rhs > 0
        assert lhs >= rhs / 3.0
        assert lhs > 0

    def test_max_of_three_inequality_randomized(self, consts):
        rng = np.random.default_rng(0)
        for _ in range(500):
            k1 = int(rng.integers(-16, 17))
            k2 = int(rng.integers(-16, 17))
            k0 = k1 + k2
            if k0 == 0 or abs(k0) > 16:
                continue
            tau1, tau2 = rng.uniform(-40, 40, size=2)
            trip = FrequencyTriple("schrodinger", k0, k1, k2,
                                   tau1 + tau2, tau1, tau2)
            lhs, rhs, residual = modulation_bound(trip, consts)
            assert abs(residual) <= 1e-10
            assert 3.0 * lhs >= rhs - 1e-12


class TestModulationSweep:
    def test_small_sweep_clean(self, consts):
        for kind in ("schrodinger", "wave"):
            out = modulation_sweep(kind, 8, 200, consts, seed=3)
            assert out["violations"] == 0
            assert out["max_residual"] <= 1e-10
            assert out["min_slack"] >= 0.0

    def test_deterministic(self, consts):
        a = modulation_sweep("schrodinger", 4, 50, consts, seed=9)
        b = modulation_sweep("schrodinger", 4, 50, consts, seed=9)
        assert a == b


class TestClassify:
    def test_examples(self):
        assert classify_triple(8, 4, 4) == "resonant"
        assert classify_triple(9, 8, 1) == "nonresonant"
        for k in (1, 3, 17):
            assert classify_triple(k, k, k) == "resonant"

    def test_symmetry_and_sign_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            ks = [int(rng.integers(-32, 33)) for _ in range(3)]
            base = classify_triple(*ks)
            assert classify_triple(ks[2], ks[0], ks[1]) == base
            assert classify_triple(*[-k for k in ks]) == base

    def test_comparability_knob(self):
        assert classify_triple(12, 4, 8, c_res=2.0) == "nonresonant"
        assert classify_triple(12, 4, 8, c_res=3.0) == "resonant"


class TestSpaceTimeNorms:
    def _atom_field(self, amp, k, tau, flavor, consts, n_tau=9, width=4.0):
        grid_size = abs(k) + 1
        taus = tau + np.linspace(-width / 2, width / 2, n_tau)
        coeffs = np.zeros((2 * grid_size + 1, n_tau), dtype=complex)
        coeffs[k + grid_size, n_tau // 2] = amp
        return SpaceTimeField(coeffs, grid_size, taus, flavor, width)

    def test_zero_field(self, consts):
        f = SpaceTimeField(np.zeros((3, 4)), 1, np.linspace(0, 1, 4), "schrodinger", 1.0)
        assert xsb_norm(f, 0.7, 0.3, consts) == 0.0

    def test_plain_l2_at_b0_s0(self, consts):
        rng = np.random.default_rng(6)
        coeffs = rng.standard_normal((5, 8)) + 1j * rng.standard_normal((5, 8))
        f = SpaceTimeField(coeffs, 2, np.linspace(-1, 1, 8), "schrodinger", 2.0)
        expected = math.sqrt(float(np.sum(np.abs(coeffs) ** 2)) * f.dtau)
        assert xsb_norm(f, 0.0, 0.0, consts) == pytest.approx(expected, rel=1e-14)

    def test_on_characteristic_atom(self, consts):
        # atom at (k, tau) = (1, alpha): modulation weight is <0> = 1
        f = self._atom_field(2.5, 1, consts.alpha, "schrodinger", consts)
        for b in (0.0, 0.5, -0.5, 2.0):
            assert xsb_norm(f, 0.0, b, consts) == pytest.approx(
                2.5 * math.sqrt(f.dtau), rel=1e-14)

    def test_wave_characteristic_both_branches(self, consts):
        for sign in (+1, -1):
            f = self._atom_field(1.0, 2, sign * consts.beta * 2, "wave", consts)
            assert xsb_norm(f, 0.0, 5.0, consts) == pytest.approx(
                math.sqrt(f.dtau), rel=1e-14)

    def test_monotone_in_b(self, consts):
        rng = np.random.default_rng(7)
        coeffs = rng.standard_normal((7, 16)) + 1j * rng.standard_normal((7, 16))
        f = SpaceTimeField(coeffs, 3, np.linspace(3, 9, 16), "schrodinger", 6.0)
        values = [xsb_norm(f, -0.5, b, consts) for b in (0.0, 0.25, 0.5, 1.0)]
        assert all(values[i + 1] >= values[i] for i in range(3))

    def test_y_and_z_composites_positive(self, consts):
        rng = np.random.default_rng(8)
        coeffs = rng.standard_normal((5, 12)) + 1j * rng.standard_normal((5, 12))
        f = SpaceTimeField(coeffs, 2, np.linspace(-4, 4, 12), "wave", 8.0)
        assert y_norm(f, -0.5, consts) > z_norm(f, -0.5, consts) > 0


class TestWindow:
    def test_plateau_and_support(self):
        assert np.all(psi_window(np.linspace(-1, 1, 11)) == 1.0)
        assert np.all(psi_window(np.array([-2.5, 2.01, 3.0])) == 0.0)
        # the transition saturates to 1.0 or 0.0 in floats right at the
        # plateau edges; check strict interior away from them
        interior = psi_window(np.linspace(1.2, 1.8, 31))
        assert np.all((interior > 0) & (interior < 1))
        assert np.all(np.diff(psi_window(np.linspace(1.01, 1.99, 50))) <= 0)

    def test_transform_peak_is_window_mass(self):
        # Psi-hat(0) = int Psi dt, between 2 (inner plateau) and 4 (support)
        peak = window_transform(0.0)
        assert 2.0 < peak < 4.0

    def test_transform_decays(self):
        assert abs(window_transform(200.0)) < 1e-6 * window_transform(0.0)


class TestBilinearScan:
    def test_small_scan_shapes_and_determinism(self, consts):
        a = bilinear_ratio_scan([4, 8, 16], 12, consts, seed=1)
        b = bilinear_ratio_scan([4, 8, 16], 12, consts, seed=1)
        assert a.rows == b.rows
        assert a.slope == b.slope
        assert set(a.rows[0]) == {"N0", "N1", "N2", "N_max", "ratio", "seed", "sample"}
        assert all(r["ratio"] > 0 for r in a.rows)
        assert len(a.aggregates) == 3

    def test_nonresonant_filter_applied(self, consts):
        a = bilinear_ratio_scan([4, 8], 8, consts, seed=2)
        for row in a.rows:
            assert classify_triple(row["N0"], row["N1"], row["N2"]) == "nonresonant"

    def test_wave_kind_runs(self, consts):
        a = bilinear_ratio_scan([4, 8, 16], 8, consts, seed=3, kind="wave")
        assert all(r["ratio"] > 0 for r in a.rows)

    def test_input_validation(self, consts):
        with pytest.raises(ValueError):
            bilinear_ratio_scan([3, 6], 4, consts)
        with pytest.raises(ValueError):
            bilinear_ratio_scan([8, 4], 4, consts)
        with pytest.raises(ValueError):
            bilinear_ratio_scan([4, 8], 0, consts)
