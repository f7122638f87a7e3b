import colorsys

import numpy as np
import pytest

from chromaloc import colorspace as cs


class TestRgbToHsv:
    def test_pure_red(self):
        h, s, v = cs.rgb_to_hsv(np.array([1.0, 0.0, 0.0]))
        assert (h, s, v) == (0.0, 1.0, 1.0)

    def test_black_hue_convention(self):
        h, s, v = cs.rgb_to_hsv(np.array([0.0, 0.0, 0.0]))
        assert (h, s, v) == (0.0, 0.0, 0.0)

    def test_dark_yellow(self):
        # colorsys oracle: (0.502, 0.502, 0) -> h=60, s=1, v=0.502
        h, s, v = cs.rgb_to_hsv(np.array([0.502, 0.502, 0.0]))
        assert h == pytest.approx(60.0, abs=1e-9)
        assert s == pytest.approx(1.0, abs=1e-9)
        assert v == pytest.approx(0.502, abs=1e-9)

    def test_agrees_with_colorsys(self):
        rng = np.random.default_rng(7)
        rgb = rng.random((500, 3))
        ours = cs.rgb_to_hsv(rgb)
        for i in range(rgb.shape[0]):
            h, s, v = colorsys.rgb_to_hsv(*rgb[i])
            assert ours[i, 0] == pytest.approx((h * 360.0) % 360.0, abs=1e-9)
            assert ours[i, 1] == pytest.approx(s, abs=1e-9)
            assert ours[i, 2] == pytest.approx(v, abs=1e-9)

    def test_hue_range(self):
        rng = np.random.default_rng(8)
        hsv = cs.rgb_to_hsv(rng.random((2000, 3)))
        assert np.all(hsv[:, 0] >= 0.0) and np.all(hsv[:, 0] < 360.0)
        assert np.all(hsv[:, 1:] >= 0.0) and np.all(hsv[:, 1:] <= 1.0)


class TestRgbToLab:
    def test_white_is_neutral_l100(self):
        lab = cs.rgb_to_lab(np.array([1.0, 1.0, 1.0]))
        assert np.allclose(lab, [100.0, 0.0, 0.0], atol=1e-6)

    def test_black_is_origin(self):
        assert np.allclose(cs.rgb_to_lab(np.zeros(3)), [0.0, 0.0, 0.0], atol=1e-9)

    def test_mid_grey(self):
        # frozen from skimage.color.rgb2lab: (0.4667,)*3 -> L 50.037814
        lab = cs.rgb_to_lab(np.array([0.4667, 0.4667, 0.4667]))
        assert lab[0] == pytest.approx(50.037814, abs=0.05)
        assert abs(lab[1]) < 1e-4 and abs(lab[2]) < 1e-4

    def test_greys_stay_neutral(self):
        greys = np.linspace(0.0, 1.0, 101)[:, None].repeat(3, axis=1)
        lab = cs.rgb_to_lab(greys)
        assert np.all(np.abs(lab[:, 1]) < 1e-4)
        assert np.all(np.abs(lab[:, 2]) < 1e-4)

    def test_agrees_with_skimage(self):
        skcolor = pytest.importorskip("skimage.color")
        rng = np.random.default_rng(11)
        rgb = rng.random((300, 3))
        ours = cs.rgb_to_lab(rgb)
        ref = skcolor.rgb2lab(rgb.reshape(1, -1, 3)).reshape(-1, 3)
        # Small disagreement expected: the reference white differs in the
        # 7th decimal between implementations.
        assert np.max(np.abs(ours - ref)) < 0.05


class TestDeltaE:
    def test_identity(self):
        assert cs.delta_e((50.0, 10.0, -10.0), (50.0, 10.0, -10.0)) == 0.0

    def test_black_white(self):
        assert cs.delta_e((0.0, 0.0, 0.0), (100.0, 0.0, 0.0)) == 100.0

    def test_plain_arithmetic(self):
        d = cs.delta_e((50.0, 10.0, -10.0), (50.0, -10.0, 10.0))
        assert d == pytest.approx(np.sqrt(800.0), abs=1e-12)

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            x, y, z = rng.uniform([-0, -128, -128], [100, 127, 127], size=(3, 3))
            dxy = cs.delta_e(x, y)
            assert dxy >= 0.0
            assert dxy == pytest.approx(cs.delta_e(y, x), abs=1e-12)
            assert cs.delta_e(x, x) == 0.0
            assert dxy <= cs.delta_e(x, z) + cs.delta_e(z, y) + 1e-9


def _reference_bin(h, s, v):
    """Independent scalar quantizer built straight from the threshold rules."""
    if v < 0.2:
        return 0
    if v >= 0.85 and s < 0.2:
        return 2
    if s < 0.2:
        return 1
    bounds = [16, 26, 40, 70, 85, 145, 160, 220, 262, 278, 335]
    if h >= 335 or h < 16:
        sector = 0
    else:
        sector = next(i for i in range(1, 11) if bounds[i - 1] <= h < bounds[i])
    quadrant = (2 if s >= 0.65 else 0) + (1 if v >= 0.7 else 0)
    return 3 + sector * 4 + quadrant


class TestQuantize:
    def test_black_ignores_hue_and_saturation(self):
        assert cs.quantize(np.array([200.0, 0.9, 0.1])) == cs.BIN_BLACK

    def test_grey_ignores_hue_and_value(self):
        assert cs.quantize(np.array([30.0, 0.1, 0.5])) == cs.BIN_GREY

    def test_white(self):
        assert cs.quantize(np.array([123.0, 0.05, 0.9])) == cs.BIN_WHITE

    def test_sector3_quadrant3(self):
        # h=50 in [40,70) is sector 3; s,v above both splits is quadrant 3
        assert cs.quantize(np.array([50.0, 0.9, 0.9])) == 3 + 3 * 4 + 3

    def test_matches_reference_quantizer(self):
        rng = np.random.default_rng(5)
        hsv = np.stack(
            [rng.uniform(0, 360, 4000), rng.random(4000), rng.random(4000)], axis=-1
        )
        got = cs.quantize(hsv)
        for i in range(hsv.shape[0]):
            assert got[i] == _reference_bin(*hsv[i]), hsv[i]

    def test_grid_sweep_totality_and_count(self):
        h = np.linspace(0, 360, 100, endpoint=False)
        s = np.linspace(0, 1, 100)
        v = np.linspace(0, 1, 100)
        grid = np.stack(np.meshgrid(h, s, v, indexing="ij"), axis=-1).reshape(-1, 3)
        bins = cs.quantize(grid)
        assert bins.min() >= 0 and bins.max() < cs.BIN_COUNT
        assert len(np.unique(bins)) == cs.BIN_COUNT  # every bin reachable, none extra

    def test_hue_circularity(self):
        lo = cs.quantize(np.array([0.1, 0.8, 0.8]))
        hi = cs.quantize(np.array([359.9, 0.8, 0.8]))
        assert lo == hi
        assert cs.describe_bin(int(lo)).hue_sector == 0

    @pytest.mark.parametrize("hue", [0.0, 45.0, 123.0, 250.0, 359.0])
    def test_achromatic_classes_ignore_hue(self, hue):
        assert cs.quantize(np.array([hue, 0.5, 0.1])) == cs.BIN_BLACK
        assert cs.quantize(np.array([hue, 0.15, 0.5])) == cs.BIN_GREY
        assert cs.quantize(np.array([hue, 0.1, 0.9])) == cs.BIN_WHITE


class TestBinLayout:
    def test_bin_count(self):
        assert cs.bin_count() == 47

    def test_describe_roundtrip(self):
        for i in range(cs.BIN_COUNT):
            info = cs.describe_bin(i)
            assert info.index == i
            if info.kind == "chromatic":
                assert i == cs.CHROMATIC_BASE + info.hue_sector * 4 + info.quadrant

    def test_describe_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            cs.describe_bin(47)

    def test_representatives_land_in_their_bin(self):
        for i in range(cs.BIN_COUNT):
            hsv = np.array(cs.bin_representative_hsv(i))
            assert cs.quantize(hsv) == i
