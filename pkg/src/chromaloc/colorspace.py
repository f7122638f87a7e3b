"""Color math: RGB/HSV/Lab conversions and the 47-bin HSV quantizer.

Colors are numpy arrays whose last axis holds the three channels, so every
function here works on a single color (shape ``(3,)``) or a whole image
(shape ``(H, W, 3)``) alike.  RGB channels live in [0, 1], hue in degrees
[0, 360), and Lab in the usual L in [0, 100] / a, b roughly [-128, 127].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Achromatic thresholds: black below V 0.2, grey below S 0.2, white needs
# V >= 0.85 on top of the grey saturation bound.
BLACK_V_MAX = 0.2
GREY_S_MAX = 0.2
WHITE_V_MIN = 0.85

# Chromatic subregion borders splitting each hue sector into four quadrants.
QUADRANT_S_SPLIT = 0.65
QUADRANT_V_SPLIT = 0.7

# Hue sector boundaries in degrees.  Eleven boundaries on the hue circle give
# eleven sectors; sector 0 wraps around zero ([335, 360) U [0, 16)).
HUE_BOUNDARIES = np.array(
    [16.0, 26.0, 40.0, 70.0, 85.0, 145.0, 160.0, 220.0, 262.0, 278.0, 335.0]
)
HUE_SECTORS = len(HUE_BOUNDARIES)

# Bin layout: 0=black, 1=grey, 2=white, then 4 quadrants per hue sector.
BIN_BLACK = 0
BIN_GREY = 1
BIN_WHITE = 2
CHROMATIC_BASE = 3
BIN_COUNT = 3 + HUE_SECTORS * 4

# sRGB -> XYZ (D65, 2 degree observer).  The reference white is taken as the
# row sums so that pure greys map exactly onto the neutral Lab axis.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_XYZ = _RGB_TO_XYZ.sum(axis=1)

_LAB_EPS = 216.0 / 24389.0
_LAB_KAPPA = 24389.0 / 27.0


def bin_count() -> int:
    """Total number of quantized colors."""
    return BIN_COUNT


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Convert RGB in [0,1] to HSV with hue in degrees [0, 360).

    Hue is 0 by convention wherever the color is achromatic (max == min).
    """
    rgb = np.asarray(rgb, dtype=float)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    delta = maxc - minc

    safe_delta = np.where(delta > 0, delta, 1.0)
    h = np.select(
        [delta == 0, maxc == r, maxc == g],
        [
            np.zeros_like(maxc),
            ((g - b) / safe_delta) % 6.0,
            (b - r) / safe_delta + 2.0,
        ],
        default=(r - g) / safe_delta + 4.0,
    )
    h = (h * 60.0) % 360.0

    safe_max = np.where(maxc > 0, maxc, 1.0)
    s = np.where(maxc > 0, delta / safe_max, 0.0)
    return np.stack([h, s, maxc], axis=-1)


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert sRGB in [0,1] to CIE L*a*b* (D65/2 degree reference white)."""
    rgb = np.asarray(rgb, dtype=float)
    linear = np.where(
        rgb > 0.04045,
        ((rgb + 0.055) / 1.055) ** 2.4,
        rgb / 12.92,
    )
    xyz = linear @ _RGB_TO_XYZ.T
    t = xyz / _WHITE_XYZ
    f = np.where(t > _LAB_EPS, np.cbrt(t), (_LAB_KAPPA * t + 16.0) / 116.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    return np.stack(
        [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1
    )


def delta_e(lab1: np.ndarray, lab2: np.ndarray) -> float | np.ndarray:
    """Euclidean color difference in Lab (CIE 1976 delta E)."""
    diff = np.asarray(lab1, dtype=float) - np.asarray(lab2, dtype=float)
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return float(dist) if dist.ndim == 0 else dist


def quantize(hsv: np.ndarray) -> int | np.ndarray:
    """Map HSV colors onto the 47 quantized bins.

    Classification priority: black (v < 0.2), then white (v >= 0.85 and
    s < 0.2), then grey (s < 0.2), otherwise chromatic with the bin picked
    by hue sector and the (s, v) quadrant.  Every input lands in exactly
    one bin.
    """
    hsv = np.asarray(hsv, dtype=float)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]

    sector = np.searchsorted(HUE_BOUNDARIES, h, side="right") % HUE_SECTORS
    quadrant = 2 * (s >= QUADRANT_S_SPLIT).astype(np.intp) + (
        v >= QUADRANT_V_SPLIT
    ).astype(np.intp)
    chromatic = CHROMATIC_BASE + sector * 4 + quadrant

    bins = np.select(
        [v < BLACK_V_MAX, (v >= WHITE_V_MIN) & (s < GREY_S_MAX), s < GREY_S_MAX],
        [BIN_BLACK, BIN_WHITE, BIN_GREY],
        default=chromatic,
    )
    return int(bins) if bins.ndim == 0 else bins


@dataclass(frozen=True)
class BinInfo:
    """Human-readable description of one quantized bin."""

    index: int
    kind: str  # "black" | "grey" | "white" | "chromatic"
    hue_sector: int | None = None
    quadrant: int | None = None


def describe_bin(index: int) -> BinInfo:
    """Decode a bin index back into its class / sector / quadrant."""
    if not 0 <= index < BIN_COUNT:
        raise ValueError(f"bin index {index} outside [0, {BIN_COUNT - 1}]")
    if index == BIN_BLACK:
        return BinInfo(index, "black")
    if index == BIN_GREY:
        return BinInfo(index, "grey")
    if index == BIN_WHITE:
        return BinInfo(index, "white")
    sector, quadrant = divmod(index - CHROMATIC_BASE, 4)
    return BinInfo(index, "chromatic", sector, quadrant)


def bin_representative_hsv(index: int) -> tuple[float, float, float]:
    """An HSV color that quantizes to the given bin (handy for synthesis)."""
    info = describe_bin(index)
    if info.kind == "black":
        return (0.0, 0.0, 0.1)
    if info.kind == "grey":
        return (0.0, 0.1, 0.5)
    if info.kind == "white":
        return (0.0, 0.1, 0.95)
    lo = HUE_BOUNDARIES[info.hue_sector - 1] if info.hue_sector > 0 else 335.0
    hi = HUE_BOUNDARIES[info.hue_sector]
    if info.hue_sector == 0:
        hue = ((lo + hi + 360.0) / 2.0) % 360.0  # sector 0 wraps through 0
    else:
        hue = (lo + hi) / 2.0
    s = 0.9 if info.quadrant >= 2 else 0.4
    v = 0.9 if info.quadrant % 2 else 0.45
    return (float(hue), s, v)
