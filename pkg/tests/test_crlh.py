import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crlhiso import crlh, netalg
from crlhiso.crlh import LEFT_HANDED, RIGHT_HANDED, STOPBAND, CrlhCellParams
from crlhiso.errors import PoleError

from oracles import REFERENCE, branch_values

W_OP = 2 * math.pi * 6e9

# Direct evaluation of cos(beta p) = 1 + ZY/2 and sqrt(Z/Y) with plain numpy.
BETA_P_6GHZ = 0.7069335975403402
Z0_6GHZ = 52.08372607615979
F_SERIES = 12279070441.052774
F_SHUNT = 10982734482.680931


class TestCellParams:
    @pytest.mark.parametrize("field", ["L_R", "C_R", "L_L", "C_L", "p"])
    def test_rejects_nonpositive(self, field):
        with pytest.raises(ValueError):
            crlh.REFERENCE_CELL.with_(**{field: 0.0})

    def test_shift_must_stay_below_lr(self):
        with pytest.raises(ValueError):
            crlh.REFERENCE_CELL.with_(dL_R=-300e-12)

    def test_series_inductance_includes_shift(self):
        assert crlh.REFERENCE_CELL.with_(dL_R=6e-12).series_inductance == pytest.approx(306e-12)


class TestDispersion:
    def test_reference_point(self, cell):
        pt = crlh.propagation_constant(cell, W_OP)
        assert pt.beta_per_cell == pytest.approx(BETA_P_6GHZ, rel=1e-12)
        assert pt.alpha_per_cell == 0.0
        assert pt.band == LEFT_HANDED
        assert pt.signed_beta_per_cell == pytest.approx(-BETA_P_6GHZ, rel=1e-12)
        assert pt.beta == pytest.approx(BETA_P_6GHZ / 300e-6)

    def test_resonances(self, cell):
        assert crlh.series_resonance(cell) / (2 * math.pi) == pytest.approx(F_SERIES, rel=1e-12)
        assert crlh.shunt_resonance(cell) / (2 * math.pi) == pytest.approx(F_SHUNT, rel=1e-12)

    def test_beta_zero_at_series_resonance(self, cell):
        w = crlh.series_resonance(cell)
        z = crlh.series_impedance(cell, w)
        _, _, arg = crlh.bloch_phase(z, crlh.shunt_admittance(cell, w))
        assert abs(z) < 1e-9
        assert arg == pytest.approx(1.0, abs=1e-12)
        assert crlh.propagation_constant(cell, w).beta_per_cell < 1e-5

    @pytest.mark.parametrize(
        "f, band",
        [(3e9, LEFT_HANDED), (6e9, LEFT_HANDED), (11.5e9, STOPBAND), (15e9, RIGHT_HANDED)],
    )
    def test_band_labels(self, cell, f, band):
        pt = crlh.propagation_constant(cell, 2 * math.pi * f)
        assert pt.band == band
        assert pt.evanescent is (band == STOPBAND)
        if band == STOPBAND:
            assert pt.alpha_per_cell > 0

    def test_low_frequency_bragg_stopband(self, cell):
        # Well below the LH band the arccos argument drops under -1.
        pt = crlh.propagation_constant(cell, 2 * math.pi * 0.5e9)
        assert pt.band == STOPBAND
        assert pt.beta_per_cell == pytest.approx(math.pi)

    def test_branch_continuity(self, cell):
        freqs = np.arange(4.0e9, 9.0e9, 1e6)
        beta = np.array([crlh.propagation_constant(cell, 2 * math.pi * f).beta_per_cell for f in freqs])
        steps = np.abs(np.diff(beta))
        secant = abs(beta[-1] - beta[0]) / (len(beta) - 1)
        assert steps.max() < 10 * secant

    def test_matches_independent_evaluation(self):
        cell = CrlhCellParams(**REFERENCE)
        for f in (4e9, 5e9, 6.5e9, 13e9):
            w = 2 * math.pi * f
            z, y = branch_values(w)
            ref = np.arccos((1 + z * y / 2).real)
            assert crlh.propagation_constant(cell, w).beta_per_cell == pytest.approx(ref, rel=1e-12)

    def test_homogeneous_beta_sign_follows_band(self, cell):
        assert crlh.homogeneous_beta(cell, W_OP).real < 0
        assert crlh.homogeneous_beta(cell, 2 * math.pi * 15e9).real > 0


class TestCharacteristicImpedance:
    def test_reference_value(self, cell):
        z0 = crlh.characteristic_impedance(cell, W_OP)
        assert z0.real == pytest.approx(Z0_6GHZ, rel=1e-12)
        assert z0.imag == 0.0

    def test_stopband_is_imaginary(self, cell):
        z0 = crlh.characteristic_impedance(cell, 2 * math.pi * 11.5e9)
        assert z0.real == pytest.approx(0.0, abs=1e-9)
        assert z0.imag > 0

    def test_pole_at_shunt_resonance(self):
        # Pick element values whose shunt resonance is exact in floating point.
        cell = CrlhCellParams(L_R=1.0, C_R=1.0, L_L=1.0, C_L=4.0)
        with pytest.raises(PoleError):
            crlh.characteristic_impedance(cell, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=1e9, max_value=30e9))
    def test_nonnegative_real_part(self, f):
        cell = crlh.REFERENCE_CELL
        w = 2 * math.pi * f
        if w == crlh.shunt_resonance(cell):
            return
        z0 = crlh.characteristic_impedance(cell, w)
        assert z0.real >= 0
        if z0.real == 0:
            assert z0.imag >= 0


class TestChainMatrices:
    def test_cell_is_reciprocal_and_symmetric(self, cell):
        m = crlh.cell_abcd(cell, W_OP)
        assert m.det == pytest.approx(1.0, abs=1e-12)
        assert m.a == m.d

    @pytest.mark.parametrize("m_cells, n_cells", [(1, 1), (3, 5), (12, 25)])
    def test_line_composition(self, cell, m_cells, n_cells):
        got = crlh.line_abcd(cell, W_OP, m_cells + n_cells).to_array()
        ref = (crlh.line_abcd(cell, W_OP, m_cells) @ crlh.line_abcd(cell, W_OP, n_cells)).to_array()
        np.testing.assert_allclose(got, ref, atol=1e-10)

    def test_matched_line_is_pure_phase(self, cell):
        # Terminating in the Bloch impedance of the T-cell gives zero reflection.
        m = crlh.cell_abcd(cell, W_OP)
        z_bloch = np.sqrt(m.b / m.c)
        s = netalg.abcd_to_s(crlh.line_abcd(cell, W_OP, 10), z_bloch.real)
        assert abs(s.s11) < 1e-10
        assert np.angle(s.s21) == pytest.approx(np.angle(np.exp(1j * 10 * BETA_P_6GHZ)), abs=1e-9)

    def test_homogeneous_line_phase(self, cell):
        m = crlh.homogeneous_line_abcd(cell, W_OP, 2.2)
        z0 = crlh.characteristic_impedance(cell, W_OP)
        s = netalg.abcd_to_s(m, z0)
        assert abs(s.s11) < 1e-12
        assert np.angle(s.s21) == pytest.approx(2.2 * BETA_P_6GHZ, rel=1e-12)

    def test_unknown_beta_model(self, cell):
        with pytest.raises(ValueError):
            crlh.homogeneous_line_abcd(cell, W_OP, 1, beta_model="exact")

    def test_negative_length(self):
        with pytest.raises(ValueError):
            crlh.homogeneous_abcd(1.0, 50.0, -1.0)


class TestSpectra:
    def test_single_point_matches_direct_call(self, cell):
        spec = crlh.line_spectrum(cell, [6e9], 40, 50.0)[0]
        direct = netalg.abcd_to_s(crlh.line_abcd(cell, W_OP, 40), 50.0)
        assert spec.s21 == direct.s21
        assert spec.frequency_hz == 6e9

    def test_passband_transmission(self, cell):
        freqs = np.linspace(5.5e9, 6.5e9, 11)
        out = crlh.line_spectrum(cell, freqs, 40, 50.0)
        s21_db = [20 * math.log10(abs(s.s21)) for s in out]
        assert min(s21_db) > -0.5

    def test_callable_termination(self, cell):
        out = crlh.line_spectrum(cell, [6e9], 40, lambda w: crlh.characteristic_impedance(cell, w))
        assert abs(out[0].s11) < 0.05

    @pytest.mark.parametrize("freqs", [[], [6e9, 5e9], [6e9, 6e9]])
    def test_grid_validation(self, cell, freqs):
        with pytest.raises(ValueError):
            crlh.line_spectrum(cell, freqs, 40, 50.0)

    @pytest.mark.parametrize("beta_model", ["bloch", "long-wavelength"])
    def test_homogeneous_tracks_lattice(self, cell, beta_model):
        freqs = np.linspace(5.5e9, 6.5e9, 101)
        lat = crlh.line_spectrum(cell, freqs, 40, 50.0)
        hom = crlh.homogeneous_spectrum(cell, freqs, 40, 50.0, beta_model)
        diff = [abs(20 * math.log10(abs(a.s21)) - 20 * math.log10(abs(b.s21))) for a, b in zip(lat, hom)]
        assert max(diff) < 0.5
