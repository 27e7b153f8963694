"""Tests for the scene service - superposed target responses and visibility margins."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from pqtrain.errors import InvalidArgumentError
from pqtrain.models.ambiguity import DopplerGrid
from pqtrain.models.scene import PointTarget, Scene
from pqtrain.models.waveforms import GolayPair, UnimodularSeq
from pqtrain.services.ambiguity import cross_ambiguity, cross_ambiguity_dary
from pqtrain.services.formats import read_scene
from pqtrain.services.scene import build_scene, render_scene, snap_target, visibility_report
from pqtrain.services.waveforms import complementary_set


@pytest.fixture(scope='module')
def grid():
    return DopplerGrid.periodic(256)


@pytest.fixture
def demo_targets(demo_scene_path):
    return read_scene(demo_scene_path)


def weak(report):
    return [v for v in report if v.peak_db < report[0].peak_db - 20]


class TestSingleTarget:
    """One target reproduces the shifted ambiguity map."""

    def test_origin_is_ambiguity_map(self, ptm16, golay16, grid):
        """Test that a target at the origin renders the plain ambiguity map."""
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=0.0)], ptm16, golay16, grid)
        rendered = render_scene(scene, normalize=False)
        expected = cross_ambiguity(ptm16, golay16, grid)
        assert np.array_equal(rendered.values, expected.values)

    def test_normalized_origin_has_zero_db_peak(self, ptm16, golay16, grid):
        """Test that normalizing puts the peak at 0 dB."""
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=0.0)], ptm16, golay16, grid)
        rendered = render_scene(scene)
        expected = cross_ambiguity(ptm16, golay16, grid)
        assert rendered.reference == pytest.approx(expected.reference, rel=1e-15)
        assert np.max(rendered.magnitude_db()) == pytest.approx(0.0, abs=1e-12)

    def test_exact_shift(self, binomial16, golay16, grid):
        """Test that delay and Doppler shifts move the map exactly."""
        theta = grid.thetas[grid.count // 2 + 10]
        scene = build_scene([PointTarget(delay_bin=5, doppler_theta=theta)], binomial16, golay16, grid)
        rendered = render_scene(scene, normalize=False).values
        base = np.roll(cross_ambiguity(binomial16, golay16, grid).values, 10, axis=1)
        assert np.array_equal(rendered[5:], base[:-5])
        assert not np.any(rendered[:5])

    def test_negative_delay_truncates_top(self, ptm16, golay16, grid):
        """Test that a negative delay drops rows at the top."""
        scene = build_scene([PointTarget(delay_bin=-3, doppler_theta=0.0)], ptm16, golay16, grid)
        rendered = render_scene(scene, normalize=False).values
        base = cross_ambiguity(ptm16, golay16, grid).values
        assert np.array_equal(rendered[:-3], base[3:])
        assert not np.any(rendered[-3:])

    def test_doppler_wraps(self, ptm16, golay16, grid):
        """Test that a Doppler shift wraps around the periodic grid."""
        theta = grid.thetas[-1]
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=theta)], ptm16, golay16, grid)
        rendered = render_scene(scene, normalize=False)
        peak = np.unravel_index(np.argmax(np.abs(rendered.values)), rendered.values.shape)
        assert peak == (rendered.row_index(0), grid.count - 1)

    def test_non_periodic_grid_evaluates_offsets(self, ptm16, golay16):
        """Test that band grids evaluate chi at the offsets directly."""
        uniform = DopplerGrid.uniform(-0.5, 0.5, 21)
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=0.0)], ptm16, golay16, uniform)
        rendered = render_scene(scene, normalize=False)
        expected = cross_ambiguity(ptm16, golay16, uniform)
        assert np.allclose(rendered.values, expected.values, atol=1e-9 * expected.reference)

    def test_dary_scene(self, quad_design, grid):
        """Test a single target with a D-ary design."""
        quad = complementary_set(4, 16)
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=0.0)], quad_design, quad, grid)
        rendered = render_scene(scene, normalize=False)
        expected = cross_ambiguity_dary(quad_design, quad, grid)
        assert np.array_equal(rendered.values, expected.values)

    def test_single_target_margin_is_infinite(self, ptm16, golay16, grid):
        """Test that a lone target has nothing interfering."""
        scene = build_scene([PointTarget(delay_bin=2, doppler_theta=0.0)], ptm16, golay16, grid)
        (entry,) = visibility_report(scene, (-0.1, 0.1))
        assert math.isinf(entry.margin_db)
        assert entry.visible


class TestSuperposition:
    """Linearity and snapping."""

    def test_doubling_amplitudes_adds_six_db(self, ptm16, golay16, grid):
        """Test that doubling every amplitude adds 6 dB."""
        targets = [PointTarget(delay_bin=-4, doppler_theta=0.0),
                   PointTarget(delay_bin=6, doppler_theta=0.3, power_db=-20.0)]
        doubled = [t.model_copy(update={'power_db': t.power_db + 20 * math.log10(2)}) for t in targets]
        once = render_scene(build_scene(targets, ptm16, golay16, grid), normalize=False)
        twice = render_scene(build_scene(doubled, ptm16, golay16, grid), normalize=False)
        assert np.allclose(twice.values, 2 * once.values, rtol=1e-12, atol=1e-9)
        mask = np.abs(once.values) > 1e-3
        shift = twice.magnitude_db()[mask] - once.magnitude_db()[mask]
        assert np.allclose(shift, 20 * math.log10(2), atol=1e-6)

    def test_shared_delay_masks_weak_mover(self, ptm16, golay64):
        """Test that a strong reflector in the same delay bin masks a weak mover."""
        grid = DopplerGrid.periodic(1024)
        targets = [PointTarget(delay_bin=0, doppler_theta=0.0),
                   PointTarget(delay_bin=0, doppler_theta=0.098, power_db=-50.0)]
        report = visibility_report(build_scene(targets, ptm16, golay64, grid), (-0.1, 0.1))
        mover = next(v for v in report if v.index == 1)
        assert mover.margin_db < -40.0
        assert not mover.visible

    def test_separate_delay_leaves_weak_mover_visible(self, ptm16, golay64):
        """Test that the same mover at a different delay stays visible."""
        grid = DopplerGrid.periodic(1024)
        targets = [PointTarget(delay_bin=0, doppler_theta=0.0),
                   PointTarget(delay_bin=8, doppler_theta=0.098, power_db=-50.0)]
        report = visibility_report(build_scene(targets, ptm16, golay64, grid), (-0.1, 0.1))
        mover = next(v for v in report if v.index == 1)
        assert mover.margin_db > 0.0

    def test_targets_snap_to_nearest_bin(self, grid):
        """Test that theta snaps to the nearest grid column."""
        step = 2 * math.pi / grid.count
        target = PointTarget(delay_bin=0, doppler_theta=3.4 * step)
        assert snap_target(grid, target, 16) == grid.count // 2 + 3

    def test_delay_outside_map(self, ptm16, golay16, grid):
        """Test that a delay beyond L-1 is rejected."""
        scene = build_scene([PointTarget(delay_bin=16, doppler_theta=0.0)], ptm16, golay16, grid)
        with pytest.raises(InvalidArgumentError):
            render_scene(scene)

    def test_theta_outside_grid_span(self, ptm16, golay16):
        """Test that theta outside a band grid is rejected."""
        uniform = DopplerGrid.uniform(-0.5, 0.5, 11)
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=0.8)], ptm16, golay16, uniform)
        with pytest.raises(InvalidArgumentError):
            render_scene(scene)

    def test_non_complementary_waveform(self, ptm16, grid):
        """Test that a non-complementary pair is rejected."""
        ones = UnimodularSeq(phases=(0, 0, 0, 0))
        scene = build_scene([PointTarget(delay_bin=0, doppler_theta=0.0)], ptm16,
                            GolayPair(x=ones, y=ones), grid)
        with pytest.raises(InvalidArgumentError):
            render_scene(scene)

    def test_waveform_must_fit_design(self, quad_design, golay16, grid):
        """Test that a Golay pair cannot drive a D-ary design."""
        with pytest.raises(InvalidArgumentError):
            build_scene([PointTarget(delay_bin=0, doppler_theta=0.0)], quad_design, golay16, grid)

    def test_scene_needs_targets(self, ptm16, golay16, grid):
        """Test that a scene needs at least one target."""
        with pytest.raises(ValidationError):
            Scene(targets=[], design=ptm16, waveform=golay16, grid=grid)

    def test_target_theta_must_be_finite(self):
        """Test that a NaN Doppler phase is rejected."""
        with pytest.raises(ValidationError):
            PointTarget(delay_bin=0, doppler_theta=float('nan'))


class TestDemoScene:
    """Masking and visibility on the shipped demo scene."""

    @pytest.fixture(scope='class')
    def wide_grid(self):
        return DopplerGrid.periodic(1024)

    def test_demo_file_has_three_strong_and_two_weak(self, demo_targets):
        """Test the contents of the shipped demo scene."""
        assert len(demo_targets) == 5
        assert sum(t.power_db == 0.0 for t in demo_targets) == 3

    def test_ptm_reveals_weak_targets(self, demo_targets, ptm16, golay64, wide_grid):
        """Test that PTM-16 leaves every demo target visible."""
        scene = build_scene(demo_targets, ptm16, golay64, wide_grid)
        report = visibility_report(scene, (-0.1, 0.1))
        assert len(report) == 5
        assert all(v.visible for v in report)
        assert len(weak(report)) == 2

    def test_ptm_margin_for_thirty_db_targets(self, demo_targets, ptm16, golay64, wide_grid):
        """Test PTM margins with the movers raised to -30 dB."""
        targets = [t if t.power_db == 0.0 else t.model_copy(update={'power_db': -30.0})
                   for t in demo_targets]
        report = visibility_report(build_scene(targets, ptm16, golay64, wide_grid), (-0.1, 0.1))
        assert all(v.margin_db >= 10.0 for v in weak(report))

    def test_conventional_masks_a_weak_target(self, demo_targets, conventional16, golay64, wide_grid):
        """Test that the conventional design hides a mover."""
        scene = build_scene(demo_targets, conventional16, golay64, wide_grid)
        report = visibility_report(scene, (-0.1, 0.1))
        assert any(not v.visible for v in weak(report))

    def test_binomial_clears_wide_band(self, demo_targets, binomial16, golay64, wide_grid):
        """Test that binomial-16 keeps targets visible over |theta| <= 1."""
        report = visibility_report(build_scene(demo_targets, binomial16, golay64, wide_grid), (-1.0, 1.0))
        assert all(v.visible for v in report)

    def test_max_snr_clears_half_radian(self, demo_targets, maxsnr16_8, golay64, wide_grid):
        """Test that the max-SNR design keeps targets visible over |theta| <= 0.5."""
        design = maxsnr16_8[0]
        report = visibility_report(build_scene(demo_targets, design, golay64, wide_grid), (-0.5, 0.5))
        assert all(v.visible for v in report)

    def test_render_peak_is_zero_db(self, demo_targets, ptm16, golay64, wide_grid):
        """Test that the rendered demo peaks at 0 dB."""
        rendered = render_scene(build_scene(demo_targets, ptm16, golay64, wide_grid))
        assert np.max(rendered.magnitude_db()) == pytest.approx(0.0, abs=1e-12)

    def test_empty_band(self, demo_targets, ptm16, golay64, wide_grid):
        """Test that a band with no grid points is rejected."""
        scene = build_scene(demo_targets, ptm16, golay64, wide_grid)
        with pytest.raises(InvalidArgumentError):
            visibility_report(scene, (3.5, 4.0))
