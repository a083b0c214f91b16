import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crlhiso import coupler, crlh
from crlhiso.coupler import CoupledLineParams
from crlhiso.errors import AsymmetricCouplerError, OutOfBandError

from oracles import coupled_cell_chain, multiport_chain_to_s

W_OP = 2 * math.pi * 6e9
P = 300e-6


def db(x):
    return 20 * math.log10(abs(x))


def lattice_oracle(w, L_m, C_m, n, dL=0.0):
    """4-port S of the N-cell coupled lattice, terminated in the bare-line Z0."""
    z0 = crlh.characteristic_impedance(crlh.REFERENCE_CELL, w).real
    t = np.linalg.matrix_power(coupled_cell_chain(w, L_m, C_m, dL), n)
    return multiport_chain_to_s(t, z0)


class TestCoupledLineParams:
    def test_from_cell_splits_shift(self):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 1e-12, 1e-15, delta=6e-12)
        assert c.line_up.dL_R == -6e-12 and c.line_down.dL_R == 6e-12
        assert not c.is_symmetric
        assert c.delta == pytest.approx(6e-12)
        assert c.symmetrized().is_symmetric
        assert c.bare.dL_R == 0.0

    def test_rejects_negative_mutual_capacitance(self):
        with pytest.raises(ValueError):
            CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 1e-12, -1e-15)

    def test_even_odd_substitution(self, coupled_off):
        even, odd = coupler.even_odd_cells(coupled_off)
        assert even.L_R == pytest.approx(301e-12) and even.C_R == 150e-15
        assert odd.C_R == pytest.approx(190e-15) and odd.L_R == 300e-12

    def test_even_odd_refuses_asymmetric(self):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 1e-12, 1e-15, delta=1e-12)
        with pytest.raises(AsymmetricCouplerError):
            coupler.even_odd_cells(c)


class TestCouplingCoefficient:
    # Magnitudes from eigenvalues of the 4x4 coupled-cell chain matrix (tests/oracles.py);
    # the sign is the left-handed band convention (On positive).
    @pytest.mark.parametrize("L_m, k_per_cell", [(0.5e-12, -0.021282468004), (105e-12, 0.021212935043)])
    def test_design_points(self, L_m, k_per_cell):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, L_m, 20e-15)
        modes = coupler.coupling_coefficient(c, W_OP)
        assert modes.k0_per_cell == pytest.approx(k_per_cell, rel=1e-6)
        assert modes.k0 == pytest.approx(k_per_cell / P, rel=1e-6)

    @pytest.mark.parametrize("L_m", [0.5e-12, 105e-12])
    def test_matches_chain_matrix_eigenvalues(self, L_m):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, L_m, 20e-15)
        cos_bp = np.linalg.eigvals(coupled_cell_chain(W_OP, L_m, 20e-15)[:2, :2])
        ref = np.sort(np.arccos(cos_bp.real))
        modes = coupler.coupling_coefficient(c, W_OP)
        got = np.sort(np.abs([modes.beta_c * P, modes.beta_pi * P]))
        np.testing.assert_allclose(got, ref, rtol=1e-10)

    def test_symmetric_c_pi_reduces_to_even_odd(self, coupled_off, coupled_on):
        for c in (coupled_off, coupled_on):
            eo = coupler.coupling_coefficient(c, W_OP)
            cp = coupler.c_pi_constants(c, W_OP)
            assert cp.delta_beta_0 == 0.0
            assert cp.k0_per_cell == pytest.approx(eo.k0_per_cell, abs=1e-12)

    def test_asymmetric_modes_match_chain_matrix(self):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 0.5e-12, 20e-15, delta=6e-12)
        cos_bp = np.linalg.eigvals(coupled_cell_chain(W_OP, 0.5e-12, 20e-15, 6e-12)[:2, :2])
        ref = np.sort(np.arccos(cos_bp.real))
        m = coupler.c_pi_constants(c, W_OP)
        np.testing.assert_allclose(np.sort(np.abs([m.beta_c * P, m.beta_pi * P])), ref, rtol=1e-10)

    def test_asymmetric_k0_close_to_symmetric(self, coupled_off):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 0.5e-12, 20e-15, delta=6e-12)
        asym = coupler.coupling_coefficient(c, W_OP)
        sym = coupler.coupling_coefficient(coupled_off, W_OP)
        assert asym.k0 == pytest.approx(sym.k0, rel=1e-3)
        assert 0 < abs(asym.delta_beta_0_per_cell) < 0.25 * abs(asym.k0_per_cell)

    def test_homogeneous_model_is_close(self, coupled_off):
        lat = coupler.coupling_coefficient(coupled_off, W_OP, "lattice")
        hom = coupler.coupling_coefficient(coupled_off, W_OP, "homogeneous")
        assert hom.k0 == pytest.approx(lat.k0, rel=0.1)

    def test_unknown_model(self, coupled_off):
        with pytest.raises(ValueError):
            coupler.coupling_coefficient(coupled_off, W_OP, "fdtd")

    def test_out_of_band(self, coupled_off):
        with pytest.raises(OutOfBandError):
            coupler.coupling_coefficient(coupled_off, 2 * math.pi * 11.5e9)

    def test_three_db_helpers(self, coupled_off):
        modes = coupler.coupling_coefficient(coupled_off, W_OP)
        cells = coupler.three_db_cells(modes)
        assert round(cells) == 37
        assert coupler.three_db_mismatch(modes, cells) == pytest.approx(0.0, abs=1e-12)
        assert abs(coupler.three_db_mismatch(modes, 37)) < 0.03 * math.pi / 4


class TestStaticCoupler:
    def test_matches_four_port_lattice(self, coupled_off):
        cs = coupler.static_coupler_s(coupled_off, W_OP, 37)
        ref = lattice_oracle(W_OP, 0.5e-12, 20e-15, 37)
        assert cs.m[0, 0] == pytest.approx(ref[2, 0], abs=1e-10)
        assert cs.m[1, 0] == pytest.approx(ref[3, 0], abs=1e-10)
        assert cs.m[0, 1] == pytest.approx(ref[2, 1], abs=1e-10)
        assert cs.gamma == pytest.approx(ref[0, 0], abs=1e-10)
        assert cs.upsilon == pytest.approx(ref[1, 0], abs=1e-10)

    def test_reference_levels(self, coupled_off):
        cs = coupler.static_coupler_s(coupled_off, W_OP, 37)
        assert db(cs.m[0, 0]) == pytest.approx(-3.038674, abs=1e-5)
        assert db(cs.m[1, 0]) == pytest.approx(-2.994901, abs=1e-5)
        assert db(cs.gamma) == pytest.approx(-31.309161, abs=1e-5)
        assert db(cs.upsilon) == pytest.approx(-31.305668, abs=1e-5)

    def test_lossless(self, coupled_off):
        for f in (5.8e9, 6e9, 6.2e9):
            cs = coupler.static_coupler_s(coupled_off, 2 * math.pi * f, 37)
            power = abs(cs.m[0, 0]) ** 2 + abs(cs.m[1, 0]) ** 2 + abs(cs.gamma) ** 2 + abs(cs.upsilon) ** 2
            assert power == pytest.approx(1.0, abs=1e-10)

    def test_matrix_is_read_only(self, coupled_off):
        cs = coupler.static_coupler_s(coupled_off, W_OP, 37)
        with pytest.raises(ValueError):
            cs.m[0, 0] = 0

    @pytest.mark.parametrize("mode, expected", [("fixed50", 50.0), (42.0, 42.0)])
    def test_termination_modes(self, coupled_off, mode, expected):
        assert coupler.termination_impedance(coupled_off, W_OP, mode) == expected

    def test_termination_out_of_band(self, coupled_off):
        with pytest.raises(OutOfBandError):
            coupler.termination_impedance(coupled_off, 2 * math.pi * 11.5e9)

    def test_unknown_termination(self, coupled_off):
        with pytest.raises(ValueError):
            coupler.termination_impedance(coupled_off, W_OP, "open")


class TestClosedForm:
    def test_symmetric_limit_is_hybrid(self, coupled_off):
        modes = coupler.coupling_coefficient(coupled_off, W_OP)
        lc = math.pi / 4 / abs(modes.k0)
        m = coupler.asym_coupler_s_closedform(modes, lc)
        s = math.copysign(1, modes.k0)
        np.testing.assert_allclose(m, np.array([[1, -1j * s], [-1j * s, 1]]) / math.sqrt(2), atol=1e-12)

    def test_close_to_lattice_for_asymmetric_pair(self):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, 0.5e-12, 20e-15, delta=6e-12)
        m = coupler.asym_coupler_s_closedform(coupler.c_pi_constants(c, W_OP), 37 * P)
        ref = lattice_oracle(W_OP, 0.5e-12, 20e-15, 37, dL=6e-12)
        assert db(m[0, 0]) == pytest.approx(db(ref[2, 0]), abs=0.2)
        assert db(m[1, 0]) == pytest.approx(db(ref[3, 0]), abs=0.2)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(min_value=-15e-12, max_value=15e-12),
        st.floats(min_value=5.6e9, max_value=6.4e9),
        st.sampled_from([0.5e-12, 105e-12]),
        st.floats(min_value=1e-3, max_value=0.05),
    )
    def test_unitary(self, delta, f, L_m, lc):
        c = CoupledLineParams.from_cell(crlh.REFERENCE_CELL, L_m, 20e-15, delta=delta)
        modes = coupler.c_pi_constants(c, 2 * math.pi * f)
        m = coupler.asym_coupler_s_closedform(modes, lc)
        np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-12)

    def test_rejects_evanescent_coupling(self):
        modes = coupler.NormalModes(1.0, 1.0, 0.5, 0.1, math.nan, P, evanescent_coupling=True)
        with pytest.raises(ValueError):
            coupler.asym_coupler_s_closedform(modes, 0.01)
