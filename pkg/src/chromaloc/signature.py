"""Per-image retrieval signatures: histogram plus dominant color locations.

An image is a float64 numpy array of shape ``(H, W, 3)`` with RGB channels
in [0, 1].  Its signature couples the normalized 47-bin histogram with the
mass centers of the most frequent colors, stored in normalized [0, 1]^2
coordinates so the feature survives scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import colorspace

DEFAULT_MAX_SIDE = 256
DEFAULT_LOCATIONS = 5

# All reals stored in a signature are rounded to this many significant
# digits -- the precision of the index text format -- so that persisting a
# signature loses nothing and rankings survive a save/load cycle bit-for-bit.
STORED_DIGITS = 9


@dataclass(frozen=True)
class SignatureParams:
    """Extraction knobs; shared by every record of one index."""

    max_side: int = DEFAULT_MAX_SIDE
    n_locations: int = DEFAULT_LOCATIONS

    def __post_init__(self):
        if self.max_side < 16:
            raise ValueError(f"max_side must be >= 16, got {self.max_side}")
        if self.n_locations < 1:
            raise ValueError(f"n_locations must be >= 1, got {self.n_locations}")


@dataclass(frozen=True)
class ColorLocation:
    """Mass center of one dominant color.

    ``x``/``y`` are the mean pixel position normalized to [0, 1], and
    ``lab`` is the Lab color of the bin's mean RGB.
    """

    bin_index: int
    weight: float
    x: float
    y: float
    lab: tuple[float, float, float]


@dataclass(eq=False)
class Signature:
    """Retrieval record for one image."""

    image_id: str
    width: int
    height: int
    histogram: np.ndarray  # shape (47,), sums to 1
    locations: tuple[ColorLocation, ...] = field(default_factory=tuple)


def _require_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=float)
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError(f"expected a (H, W, 3) image, got shape {image.shape}")
    return image


def area_resize(image: np.ndarray, new_w: int, new_h: int) -> np.ndarray:
    """Box-filter resample to ``new_w`` x ``new_h``.

    Each output pixel is the exact area average of the source region it
    covers (fractional edge coverage included), so constant regions stay
    constant and downscaling is a true low-pass reduction.
    """
    image = _require_image(image)
    if new_w < 1 or new_h < 1:
        raise ValueError("target size must be positive")
    out = _box_resample_axis(image, new_h, axis=0)
    out = _box_resample_axis(out, new_w, axis=1)
    return out


def _box_resample_axis(image: np.ndarray, new_len: int, axis: int) -> np.ndarray:
    old_len = image.shape[axis]
    if old_len == new_len:
        return image
    # Row i of the weight matrix holds each source cell's overlap with the
    # output interval [i, i+1) * old/new, normalized to sum to 1.
    scale = old_len / new_len
    starts = np.arange(new_len) * scale
    stops = starts + scale
    src = np.arange(old_len)
    overlap = np.minimum(stops[:, None], src[None, :] + 1.0) - np.maximum(
        starts[:, None], src[None, :]
    )
    weights = np.clip(overlap, 0.0, None) / scale
    moved = np.moveaxis(image, axis, 0)
    out = np.tensordot(weights, moved, axes=([1], [0]))
    return np.moveaxis(out, 0, axis)


def preprocess(image: np.ndarray, max_side: int = DEFAULT_MAX_SIDE) -> np.ndarray:
    """Shrink the image so its longer side is at most ``max_side``.

    Uses area averaging, preserving aspect ratio; images already small
    enough pass through untouched.
    """
    image = _require_image(image)
    if max_side < 16:
        raise ValueError(f"max_side must be >= 16, got {max_side}")
    h, w = image.shape[:2]
    longest = max(w, h)
    if longest <= max_side:
        return image
    scale = max_side / longest
    new_w = max(1, round(w * scale))
    new_h = max(1, round(h * scale))
    return area_resize(image, new_w, new_h)


def compute_histogram(image: np.ndarray) -> np.ndarray:
    """Normalized share of pixels per quantized bin; sums to 1."""
    image = _require_image(image)
    bins = colorspace.quantize(colorspace.rgb_to_hsv(image))
    counts = np.bincount(np.ravel(bins), minlength=colorspace.BIN_COUNT)
    return counts / image.shape[0] / image.shape[1]


def compute_locations(
    image: np.ndarray, histogram: np.ndarray, n: int = DEFAULT_LOCATIONS
) -> list[ColorLocation]:
    """Mass centers of the ``n`` heaviest bins (ties to the lower bin index).

    The center is the arithmetic mean of member pixel coordinates,
    normalized by (dim - 1) so corners map to 0 and 1; a 1-pixel dimension
    yields 0.5.  Bins with zero weight never produce a location.
    """
    image = _require_image(image)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    h, w = image.shape[:2]
    labels = np.ravel(colorspace.quantize(colorspace.rgb_to_hsv(image)))
    nbins = colorspace.BIN_COUNT

    counts = np.bincount(labels, minlength=nbins).astype(float)
    xs = np.tile(np.arange(w, dtype=float), h)
    ys = np.repeat(np.arange(h, dtype=float), w)
    sum_x = np.bincount(labels, weights=xs, minlength=nbins)
    sum_y = np.bincount(labels, weights=ys, minlength=nbins)
    flat = image.reshape(-1, 3)
    sum_rgb = np.stack(
        [np.bincount(labels, weights=flat[:, c], minlength=nbins) for c in range(3)],
        axis=1,
    )

    # Heaviest first, equal weights broken by lower bin index.
    order = np.lexsort((np.arange(nbins), -np.asarray(histogram, dtype=float)))
    locations = []
    for b in order[:n]:
        if histogram[b] <= 0:
            break
        cx = 0.5 if w == 1 else sum_x[b] / counts[b] / (w - 1)
        cy = 0.5 if h == 1 else sum_y[b] / counts[b] / (h - 1)
        lab = colorspace.rgb_to_lab(sum_rgb[b] / counts[b])
        locations.append(
            ColorLocation(
                bin_index=int(b),
                weight=float(histogram[b]),
                x=float(cx),
                y=float(cy),
                lab=(float(lab[0]), float(lab[1]), float(lab[2])),
            )
        )
    return locations


def _round_sig(value: float, digits: int = STORED_DIGITS) -> float:
    return float(f"{value:.{digits}g}")


def _canonical(location: ColorLocation) -> ColorLocation:
    return replace(
        location,
        weight=_round_sig(location.weight),
        x=_round_sig(location.x),
        y=_round_sig(location.y),
        lab=tuple(_round_sig(c) for c in location.lab),
    )


def extract_signature(
    image: np.ndarray,
    params: SignatureParams = SignatureParams(),
    image_id: str = "",
) -> Signature:
    """Full pipeline: preprocess, histogram, dominant color locations.

    The source dimensions recorded are those of the original image, not the
    reduced one.  Stored reals are rounded to the index format's precision.
    """
    image = _require_image(image)
    src_h, src_w = image.shape[:2]
    reduced = preprocess(image, params.max_side)
    histogram = compute_histogram(reduced)
    locations = compute_locations(reduced, histogram, params.n_locations)
    rounded = np.array([_round_sig(wt) for wt in histogram])
    return Signature(
        image_id=image_id,
        width=src_w,
        height=src_h,
        histogram=rounded,
        locations=tuple(_canonical(loc) for loc in locations),
    )
