"""Persistent signature index and the linear-scan query engine.

The on-disk format is line-oriented text.  Header::

    CHROMALOC 1 <max_side> <n_locations>

then one tab-separated record per line: image_id, width, height, the 47
histogram weights, the location count, and per location the bin index,
weight, x, y, L, a, b.  Reals carry 9 significant digits, which is exactly
the precision signatures are stored at, so a save/load round trip is
lossless.  image_ids are paths relative to the indexed root, always with
forward slashes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .colorspace import BIN_COUNT
from .matching import DistanceParams, combined_distance
from .signature import ColorLocation, Signature, SignatureParams, extract_signature

FORMAT_MAGIC = "CHROMALOC"
FORMAT_VERSION = 1  # also pins the 47-bin quantizer layout
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class IndexFormatError(ValueError):
    """Index file cannot be parsed."""


class UnsupportedVersionError(IndexFormatError):
    """Index file written by an unknown format version."""


class IncompatibleIndexError(ValueError):
    """Query parameters do not fit the index fingerprint."""


@dataclass
class Index:
    """All signatures of one collection, extracted with one parameter set."""

    params: SignatureParams
    records: list[Signature] = field(default_factory=list)


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG/JPEG file into a float RGB array in [0, 1]."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        return np.asarray(rgb, dtype=float) / 255.0


def build_index(
    root_dir: str | Path, params: SignatureParams = SignatureParams()
) -> tuple[Index, list[str]]:
    """Extract a signature for every decodable image under ``root_dir``.

    Returns the index plus the relative paths of files that looked like
    images but failed to decode.  Record order is deterministic (sorted by
    image_id).  Raises if the directory is unreadable or yields no records.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"not a readable directory: {root}")
    candidates = sorted(
        p for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    records: list[Signature] = []
    skipped: list[str] = []
    for path in candidates:
        image_id = path.relative_to(root).as_posix()
        try:
            image = load_image(path)
        except (UnidentifiedImageError, OSError, ValueError):
            skipped.append(image_id)
            continue
        records.append(extract_signature(image, params, image_id=image_id))
    if not records:
        raise FileNotFoundError(f"no decodable images under {root}")
    records.sort(key=lambda r: r.image_id)
    return Index(params=params, records=records), skipped


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def save_index(index: Index, out_path: str | Path) -> None:
    """Write the index in the versioned text format."""
    lines = [f"{FORMAT_MAGIC} {FORMAT_VERSION} {index.params.max_side} {index.params.n_locations}"]
    for rec in index.records:
        parts = [rec.image_id, str(rec.width), str(rec.height)]
        parts.extend(_fmt(w) for w in rec.histogram)
        parts.append(str(len(rec.locations)))
        for loc in rec.locations:
            parts.append(str(loc.bin_index))
            parts.extend(_fmt(v) for v in (loc.weight, loc.x, loc.y, *loc.lab))
        lines.append("\t".join(parts))
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_index(in_path: str | Path) -> Index:
    """Read an index file, validating magic, version and record layout."""
    path = Path(in_path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise IndexFormatError(f"{path}: empty index file")

    header = lines[0].split()
    if len(header) != 4 or header[0] != FORMAT_MAGIC:
        raise IndexFormatError(f"{path}: line 1: bad header {lines[0]!r}")
    try:
        version, max_side, n_locations = (int(x) for x in header[1:])
    except ValueError as exc:
        raise IndexFormatError(f"{path}: line 1: non-integer header field") from exc
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: unsupported index version {version} (expected {FORMAT_VERSION})"
        )

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(_parse_record(line))
        except (ValueError, IndexError) as exc:
            raise IndexFormatError(f"{path}: line {lineno}: {exc}") from exc
    return Index(
        params=SignatureParams(max_side=max_side, n_locations=n_locations),
        records=records,
    )


def _parse_record(line: str) -> Signature:
    fields = line.split("\t")
    if len(fields) < 3 + BIN_COUNT + 1:
        raise ValueError(f"truncated record ({len(fields)} fields)")
    image_id = fields[0]
    width, height = int(fields[1]), int(fields[2])
    histogram = np.array([float(x) for x in fields[3 : 3 + BIN_COUNT]])
    pos = 3 + BIN_COUNT
    n_locs = int(fields[pos])
    pos += 1
    if len(fields) != pos + 7 * n_locs:
        raise ValueError(
            f"expected {pos + 7 * n_locs} fields for {n_locs} locations, got {len(fields)}"
        )
    locations = []
    for _ in range(n_locs):
        chunk = fields[pos : pos + 7]
        locations.append(
            ColorLocation(
                bin_index=int(chunk[0]),
                weight=float(chunk[1]),
                x=float(chunk[2]),
                y=float(chunk[3]),
                lab=(float(chunk[4]), float(chunk[5]), float(chunk[6])),
            )
        )
        pos += 7
    return Signature(
        image_id=image_id, width=width, height=height,
        histogram=histogram, locations=tuple(locations),
    )


def rank_signature(
    index: Index, probe: Signature, dparams: DistanceParams
) -> list[tuple[str, float]]:
    """Distances from ``probe`` to every record, ascending, ties by id."""
    if dparams.n_locations > index.params.n_locations:
        raise IncompatibleIndexError(
            f"query wants {dparams.n_locations} locations but the index "
            f"stores only {index.params.n_locations}"
        )
    scored = [
        (rec.image_id, combined_distance(probe, rec, dparams))
        for rec in index.records
    ]
    scored.sort(key=lambda item: (item[1], item[0]))
    return scored


def query(
    index: Index,
    probe_image: np.ndarray,
    dparams: DistanceParams = DistanceParams(),
    top_k: int = 15,
) -> list[tuple[str, float]]:
    """Rank every record against a probe image; return the closest top_k."""
    if not index.records:
        raise ValueError("cannot query an empty index")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    probe = extract_signature(probe_image, index.params, image_id="<query>")
    return rank_signature(index, probe, dparams)[:top_k]
