"""
End-to-end checks of the reference designs and their sidelobe behaviour.

Each class reproduces one headline result: exact complementarity, the
16-pulse design table, the max-SNR and quad designs, cleared Doppler bands
for the single-channel and MIMO maps, and weak-target visibility.
"""

import math
import time

import numpy as np
import pytest

from pqtrain.models.ambiguity import DopplerGrid
from pqtrain.models.designs import Design, DArySpectrumInput
from pqtrain.services.ambiguity import (
    cross_ambiguity,
    cross_ambiguity_dary,
    cross_ambiguity_oracle,
    mimo_cross_ambiguity,
)
from pqtrain.services.designs import binomial_design, max_snr_design
from pqtrain.services.formats import read_scene
from pqtrain.services.scene import build_scene, visibility_report
from pqtrain.services.spectra import basis_matrix, dary_moment, design_null_order
from pqtrain.services.waveforms import check_complementary, golay_pair, paraunitary, paraunitary_gram

MAXSNR16_8_P = (0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 1, 0)
MAXSNR16_8_Q = tuple(v * 1e-2 for v in (
    0.69, 4.29, 9.48, 6.23, 6.56, 7.70, 7.13, 7.92,
    7.92, 7.13, 7.70, 6.56, 6.23, 9.48, 4.29, 0.69,
))

# Off-diagonal level of the 4x4 MIMO map, relative to the diagonal peak.
# Channels 1 and 3 of the quad design carry a second-order null, so the
# level grows like theta^3; inside |theta| <= 0.03 it is bounded by -70 dB.
MIMO4_BAND = (-0.03, 0.03)
MIMO4_OFFDIAG_DB = -60.0

# Over the full |theta| <= pi/12 band the worst off-diagonal measured -26.8 dB.
MIMO4_WIDE_BAND = (-math.pi / 12, math.pi / 12)
MIMO4_WIDE_OFFDIAG_DB = -25.0


def off_zero_delay_db(amb, lo, hi):
    """Largest |chi(k != 0, theta)| in the band, in dB relative to |chi(0, 0)|."""
    return amb.max_sidelobe_db(lo, hi)


class TestComplementarity:
    """Golay pairs are exactly complementary at every power-of-two length."""

    def test_lengths_two_to_1024(self):
        """Test zero residual for every length 2..1024 within 5 s."""
        start = time.perf_counter()
        for m in range(1, 11):
            assert check_complementary(golay_pair(2 ** m)) == 0
        assert time.perf_counter() - start < 5.0


class TestDesignTable:
    """Null order and SNR gain of the four 16-pulse designs."""

    @pytest.fixture(scope='class')
    def rows(self, conventional16, ptm16, maxsnr16_8, binomial16):
        return [conventional16, ptm16, maxsnr16_8[0], binomial16]

    def test_null_orders(self, rows):
        """Test the declared and verified orders of the four designs."""
        assert [d.declared_null_order for d in rows] == [0, 3, 8, 14]
        verified = [design_null_order(d) for d in rows]
        assert verified[0] == 0 and verified[1] == 3 and verified[3] == 14
        assert verified[2] >= 8

    def test_snr_gains(self, rows):
        """Test the four SNR gains to two decimals."""
        gains = [d.snr_gain for d in rows]
        assert gains == pytest.approx([16.0, 16.0, 13.76, 6.92], abs=0.01)


class TestMaxSnrReference:
    """max_snr_design(16, 8) returns the reference design."""

    def test_design(self):
        """Test the N=16, M=8 design and its run time."""
        start = time.perf_counter()
        design, _, report = max_snr_design(16, 8)
        elapsed = time.perf_counter() - start
        assert design.P == MAXSNR16_8_P
        assert np.max(np.abs(np.asarray(design.Q) - np.asarray(MAXSNR16_8_Q))) <= 1e-4
        assert report.max_residual <= 1e-8
        assert elapsed < 1.0


class TestClearedBands:
    """Range sidelobes stay below -80 dB inside each design's Doppler band."""

    def test_ptm(self, ptm16, golay64):
        """Test PTM-16 over |theta| <= 0.1."""
        amb = cross_ambiguity(ptm16, golay64, DopplerGrid.uniform(-0.1, 0.1, 1024))
        assert off_zero_delay_db(amb, -0.1, 0.1) < -80.0

    def test_binomial(self, binomial16, golay64):
        """Test binomial-16 over |theta| <= 1."""
        amb = cross_ambiguity(binomial16, golay64, DopplerGrid.uniform(-1.0, 1.0, 1024))
        assert off_zero_delay_db(amb, -1.0, 1.0) < -80.0

    def test_max_snr(self, maxsnr16_8, golay64):
        """Test the max-SNR design over |theta| <= 0.5."""
        amb = cross_ambiguity(maxsnr16_8[0], golay64, DopplerGrid.uniform(-0.5, 0.5, 1024))
        assert off_zero_delay_db(amb, -0.5, 0.5) < -80.0

    def test_conventional_does_not_clear(self, conventional16, golay64):
        """Test that the conventional design stays above -60 dB."""
        amb = cross_ambiguity(conventional16, golay64, DopplerGrid.uniform(-0.1, 0.1, 1024))
        assert off_zero_delay_db(amb, -0.1, 0.1) > -60.0


class TestOracleEquivalence:
    """Factored maps agree with the direct double sum on random designs."""

    @pytest.fixture(scope='class')
    def suite(self):
        rng = np.random.default_rng(2024)
        cases = []
        for _ in range(20):
            N = int(rng.integers(2, 17))
            L = 2 ** int(rng.integers(1, 7))
            P = tuple(int(p) for p in rng.integers(0, 2, size=N))
            Q = tuple(float(q) for q in rng.uniform(0.05, 1.0, size=N))
            cases.append((Design(P=P, Q=Q), golay_pair(L)))
        return cases

    def test_factored_matches_direct(self, suite):
        """Test the factored map against the direct sum."""
        grid = DopplerGrid.periodic(128)
        for design, pair in suite:
            fast = cross_ambiguity(design, pair, grid)
            slow = cross_ambiguity_oracle(design, pair, grid)
            assert np.max(np.abs(fast.values - slow.values)) <= 1e-10 * fast.reference

    def test_dary_formula_specializes_to_binary(self, suite):
        """Test the D-ary map with D=2 against the binary map."""
        grid = DopplerGrid.periodic(128)
        for design, pair in suite:
            binary = cross_ambiguity(design, pair, grid)
            dary = cross_ambiguity_dary(design, pair.as_set(), grid)
            assert np.max(np.abs(binary.values - dary.values)) <= 1e-12 * binary.reference


class TestQuadReference:
    """The product of two N=4 binomial factors over a complementary quad."""

    def test_sequences(self, quad_design):
        """Test P and Q of the quad design."""
        assert quad_design.P == (0, 1, 0, 1, 2, 3, 2, 3, 0, 1, 0, 1, 2, 3, 2, 3)
        assert quad_design.Q == (1, 3, 3, 1, 3, 9, 9, 3, 3, 9, 9, 3, 1, 3, 3, 1)

    @pytest.mark.parametrize('r', [1, 2, 3])
    def test_channel_moments_vanish(self, quad_design, r):
        """Test that channel moments vanish to order 2."""
        spec = DArySpectrumInput(P=quad_design.P, Q=quad_design.Q, D=4, r=r)
        scale = sum(quad_design.Q)
        for m in range(3):
            assert abs(dary_moment(spec, m)) <= 1e-10 * scale * 16 ** m


class TestMimo:
    """Diagonal and off-diagonal behaviour of the paraunitary MIMO maps."""

    @pytest.fixture(scope='class')
    def mimo2(self, ptm16, golay64):
        grid = DopplerGrid.uniform(-0.1, 0.1, 101)
        return mimo_cross_ambiguity(ptm16, paraunitary(1, golay64), grid)

    def test_diagonal_band(self, mimo2):
        """Test the diagonal entries over |theta| <= 0.1."""
        for i in range(2):
            assert mimo2.entry(i, i).max_sidelobe_db(-0.1, 0.1) < -80.0

    def test_off_diagonal_band(self, mimo2):
        """Test the off-diagonal entries over |theta| <= 0.1."""
        for i, j in ((0, 1), (1, 0)):
            entry = mimo2.entry(i, j)
            assert np.max(entry.magnitude_db()) < -80.0

    def test_origin_gram(self, ptm16, golay64):
        """Test the origin value and the zero-lag Gram."""
        S = paraunitary(1, golay64)
        grid = DopplerGrid.periodic(16)
        mimo = mimo_cross_ambiguity(ptm16, S, grid)
        origin = mimo.stacked()[:, :, S.L - 1, grid.index_of(0.0)]
        expected = S.L * sum(ptm16.Q) * np.eye(2)
        assert np.max(np.abs(origin - expected)) <= 1e-12 * S.L * sum(ptm16.Q)
        assert np.array_equal(paraunitary_gram(S, 0), 2 * S.L * np.eye(2))

    def test_quad_off_diagonals(self, quad_design):
        """Test the 4x4 off-diagonals over the narrow band."""
        S = paraunitary(2, golay_pair(16))
        grid = DopplerGrid.uniform(*MIMO4_BAND, 61)
        mimo = mimo_cross_ambiguity(quad_design, S, grid)
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert np.max(mimo.entry(i, j).magnitude_db()) <= MIMO4_OFFDIAG_DB

    def test_quad_off_diagonals_wide_band(self, quad_design):
        """Test the 4x4 off-diagonals over |theta| <= pi/12 against the recorded level."""
        S = paraunitary(2, golay_pair(16))
        grid = DopplerGrid.uniform(*MIMO4_WIDE_BAND, 61)
        mimo = mimo_cross_ambiguity(quad_design, S, grid)
        worst = max(np.max(mimo.entry(i, j).magnitude_db())
                    for i in range(4) for j in range(4) if i != j)
        assert worst <= MIMO4_WIDE_OFFDIAG_DB
        assert worst > MIMO4_OFFDIAG_DB


class TestSubspaceAlgebra:
    """V_M B_M = 0 in integer arithmetic."""

    @pytest.mark.parametrize('N', range(2, 65))
    def test_every_order(self, N):
        """Test V B = 0 exactly for every 0 <= M <= N-2."""
        for M in range(N - 1):
            basis = basis_matrix(N, M)
            assert basis.dimension == N - M - 1
            assert not np.any(basis.V.dot(basis.B) != 0)

    def test_top_order_is_binomial(self):
        """Test that the single column at N=64, M=62 is the binomial vector."""
        basis = basis_matrix(64, 62)
        assert basis.dimension == 1
        assert tuple(basis.B[:, 0]) == binomial_design(64).r.r


class TestDemoScene:
    """Weak movers stay visible under PTM and are masked under the conventional design."""

    @pytest.fixture(scope='class')
    def grid(self):
        return DopplerGrid.periodic(1024)

    @pytest.fixture
    def targets(self, demo_scene_path):
        return read_scene(demo_scene_path)

    def weak(self, targets, report):
        return [v for v in report if targets[v.index].power_db < 0]

    def test_ptm(self, targets, ptm16, golay64, grid):
        """Test that PTM-16 leaves both movers visible."""
        report = visibility_report(build_scene(targets, ptm16, golay64, grid), (-0.1, 0.1))
        weak = self.weak(targets, report)
        assert len(weak) == 2
        assert all(v.margin_db > 0 for v in weak)

    def test_conventional(self, targets, conventional16, golay64, grid):
        """Test that the conventional design masks a mover."""
        report = visibility_report(build_scene(targets, conventional16, golay64, grid), (-0.1, 0.1))
        assert any(v.margin_db < 0 for v in self.weak(targets, report))
