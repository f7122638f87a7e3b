"""Deterministic synthetic image collection for retrieval benchmarks.

Each group is a base card of a few colored shapes on a uniform background,
plus variants produced by scaling, right-angle rotation and brightness
shifts -- the transformations the retrieval features must absorb.  Layout
distractors reuse a base card's shapes and colors with permuted positions:
their histograms are identical to the base card's, so only the spatial
color locations can tell them apart.  They are written as singleton groups.

Shape geometry is kept on even pixel coordinates and colors are sampled
away from quantization thresholds, so rotations and brightness shifts
preserve every pixel's bin and a 2x downscale stays nearly exact.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .evaluation import GroundTruth, save_ground_truth
from .signature import area_resize

PERTURBATIONS = ("scale", "rotate90", "brightness", "layout_distractor")

# Hue sector midpoints with >= 3 degree margins to every sector boundary.
_SECTOR_HUES = (352.0, 21.0, 33.0, 55.0, 77.0, 115.0, 152.0, 190.0, 241.0, 270.0, 306.0)

_GRID_COLS = 3
_GRID_ROWS = 2

BRIGHTNESS_FACTOR = 0.1  # variants shift V by +-10%


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 42
    groups: int = 6
    variants_per_group: int = 10
    image_size: int = 192
    perturbations: frozenset[str] = frozenset(PERTURBATIONS)

    def __post_init__(self):
        if self.groups < 2:
            raise ValueError("need at least 2 groups")
        if self.variants_per_group < 2:
            raise ValueError("need at least 2 variants per group")
        if self.image_size < 48 or self.image_size % 2:
            raise ValueError("image_size must be even and >= 48")
        unknown = self.perturbations - set(PERTURBATIONS)
        if unknown:
            raise ValueError(f"unknown perturbations: {sorted(unknown)}")


@dataclass(frozen=True)
class ShapeSpec:
    cell: int  # grid cell index, row-major
    kind: str  # "rect" | "disc"
    half_w: int  # half extents in pixels (radius for discs)
    half_h: int
    color: tuple[float, float, float]


@dataclass(frozen=True)
class CardSpec:
    size: int
    background: tuple[float, float, float]
    shapes: tuple[ShapeSpec, ...]


def _even(value: float) -> int:
    return max(2, 2 * int(round(value / 2.0)))


def _safe_chromatic(rng: np.random.Generator, sector: int) -> tuple[float, float, float]:
    """A color whose bin survives +-10% brightness and 8-bit rounding."""
    hue = _SECTOR_HUES[sector]
    s = rng.uniform(0.32, 0.58) if rng.random() < 0.5 else rng.uniform(0.72, 0.93)
    # Low V quadrant: 0.9v stays above black, 1.1v below the 0.7 split.
    # High V quadrant: 0.9v stays above the split, 1.1v below clipping.
    v = rng.uniform(0.30, 0.60) if rng.random() < 0.5 else rng.uniform(0.79, 0.88)
    return colorsys.hsv_to_rgb(hue / 360.0, s, v)


def _neutral_background(rng: np.random.Generator) -> tuple[float, float, float]:
    # Exactly equal channels: mixes of background and shape along a disc's
    # edge then keep the shape's hue, so stray mass cannot reach another
    # shape's bin.  Dark levels land in the black bin, mid levels in grey;
    # both survive +-10% brightness.
    level = rng.uniform(0.06, 0.16) if rng.random() < 0.3 else rng.uniform(0.30, 0.68)
    return (level, level, level)


def make_card_spec(rng: np.random.Generator, size: int = 192) -> CardSpec:
    """Random card: 4-5 shapes with distinct hue sectors in distinct cells.

    At least four shapes so background plus shapes always fill the five
    location slots: the tiny mixed-boundary colors a downscale introduces
    must never crack the top five, or they would count as missing colors.
    Cards with discs get a neutral background (see _neutral_background);
    all-rectangle cards stay mixing-free on even coordinates, so they may
    take a chromatic background from a sector no shape uses.
    """
    n_shapes = int(rng.integers(4, 6))
    cells = rng.permutation(_GRID_COLS * _GRID_ROWS)[:n_shapes]
    sectors = rng.permutation(len(_SECTOR_HUES))
    kinds = ["disc" if rng.random() < 0.4 else "rect" for _ in range(n_shapes)]
    if "disc" in kinds or rng.random() < 0.3:
        background = _neutral_background(rng)
    else:
        background = _safe_chromatic(rng, int(sectors[n_shapes]))
    cell_w = size // _GRID_COLS
    cell_h = size // _GRID_ROWS
    shapes = []
    for j in range(n_shapes):
        # Strictly decreasing sizes keep the location weight order stable
        # across every variant; even the smallest shape stays well above
        # any resampling-artifact bin.
        frac = 0.78 - 0.10 * j
        kind = kinds[j]
        if kind == "disc":
            r = _even(frac * min(cell_w, cell_h) / 2.0)
            half_w = half_h = r
        else:
            half_w = _even(frac * cell_w / 2.0)
            half_h = _even(frac * cell_h / 2.0)
        shapes.append(
            ShapeSpec(
                cell=int(cells[j]),
                kind=kind,
                half_w=half_w,
                half_h=half_h,
                color=_safe_chromatic(rng, int(sectors[j])),
            )
        )
    return CardSpec(size=size, background=background, shapes=tuple(shapes))


def render_card(card: CardSpec) -> np.ndarray:
    """Rasterize a card spec into a float RGB image."""
    size = card.size
    image = np.empty((size, size, 3), dtype=float)
    image[:] = card.background
    cell_w = size // _GRID_COLS
    cell_h = size // _GRID_ROWS
    for shape in card.shapes:
        row, col = divmod(shape.cell, _GRID_COLS)
        cx = col * cell_w + cell_w // 2
        cy = row * cell_h + cell_h // 2
        if shape.kind == "rect":
            image[cy - shape.half_h : cy + shape.half_h, cx - shape.half_w : cx + shape.half_w] = shape.color
        else:
            yy, xx = np.ogrid[:size, :size]
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= shape.half_w**2
            image[mask] = shape.color
    return image


def permuted_layout(card: CardSpec) -> CardSpec:
    """Same shapes and colors, cells cycled by one: the layout distractor.

    Pixel counts per color are untouched (shapes only translate between
    cells), so the histogram matches the source card's exactly while every
    mass center moves.
    """
    cells = [s.cell for s in card.shapes]
    shifted = cells[1:] + cells[:1]
    shapes = tuple(
        ShapeSpec(cell=c, kind=s.kind, half_w=s.half_w, half_h=s.half_h, color=s.color)
        for s, c in zip(card.shapes, shifted)
    )
    return CardSpec(size=card.size, background=card.background, shapes=shapes)


def _apply_ops(image: np.ndarray, ops: tuple[str, ...]) -> np.ndarray:
    out = image
    for op in ops:
        if op == "rot90":
            out = np.rot90(out, 1)
        elif op == "rot180":
            out = np.rot90(out, 2)
        elif op == "bright+":
            out = np.clip(out * (1.0 + BRIGHTNESS_FACTOR), 0.0, 1.0)
        elif op == "bright-":
            out = out * (1.0 - BRIGHTNESS_FACTOR)
        elif op == "scale":
            out = area_resize(out, out.shape[1] // 2, out.shape[0] // 2)
        else:
            raise ValueError(f"unknown op {op!r}")
    return np.ascontiguousarray(out)


_RECIPES: tuple[tuple[str, ...], ...] = (
    (),
    ("rot90",),
    ("rot180",),
    ("bright+",),
    ("bright-",),
    ("scale",),
    ("scale", "rot90"),
    ("rot90", "bright+"),
    ("rot180", "bright-"),
    ("scale", "rot180"),
    ("scale", "bright+"),
    ("rot90", "bright-"),
)

_OP_NEEDS = {
    "rot90": "rotate90",
    "rot180": "rotate90",
    "bright+": "brightness",
    "bright-": "brightness",
    "scale": "scale",
}


def _enabled_recipes(perturbations: frozenset[str]) -> list[tuple[str, ...]]:
    return [
        recipe
        for recipe in _RECIPES
        if all(_OP_NEEDS[op] in perturbations for op in recipe)
    ]


def save_png(image: np.ndarray, path: str | Path) -> None:
    """Quantize to 8-bit and write a PNG (bit-deterministic for equal input)."""
    data = np.clip(np.rint(np.asarray(image) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, "RGB").save(path, format="PNG")


def generate_collection(spec: SynthSpec, out_dir: str | Path) -> GroundTruth:
    """Write the PNG collection plus ``groundtruth.csv``; returns the labels.

    Fully determined by the spec: the same seed always produces byte
    identical files.  Variant recipes cycle when a group needs more
    variants than there are distinct recipes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    recipes = _enabled_recipes(spec.perturbations)
    gt: GroundTruth = {}
    for g in range(spec.groups):
        card = make_card_spec(rng, spec.image_size)
        base = render_card(card)
        group = f"group{g:02d}"
        for i in range(spec.variants_per_group):
            name = f"{group}_v{i:02d}.png"
            save_png(_apply_ops(base, recipes[i % len(recipes)]), out / name)
            gt[name] = group
        if "layout_distractor" in spec.perturbations:
            name = f"distractor{g:02d}.png"
            save_png(render_card(permuted_layout(card)), out / name)
            gt[name] = f"distractor{g:02d}"
    save_ground_truth(gt, out / "groundtruth.csv")
    return gt
