"""Distances between signatures.

The combined distance blends a classic histogram distance with a spatial
term: dominant color locations are paired by color, a similarity transform
is fitted from the first two pairs (absorbing rotation, scale and
translation between the two images), and the remaining pairs are scored by
how far the transformed query center lands from the matched center plus how
much the colors differ.  Colors missing from one image are charged a large
fixed penalty that pushes the candidate to the end of the ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .colorspace import delta_e
from .signature import ColorLocation, Signature

HistMetric = Literal["intersection", "chi-square"]

MISSING_COLOR_PENALTY = 10000.0
# Pairs whose mean colors differ by more than this are never matched; the
# query location counts as missing instead.
MAX_PAIR_DELTA_E = 60.0
# Diagonal of the normalized [0,1]^2 coordinate square.
MAX_POINT_DIST = math.sqrt(2.0)
_HIST_SUM_TOL = 1e-6


class DegenerateGeometryError(ValueError):
    """Transform fit attempted from two coincident points."""


@dataclass(frozen=True)
class DistanceParams:
    """Knobs of the combined distance.

    ``k`` weights the histogram term against the location term (k = 1 is the
    plain histogram baseline).  ``color_norm`` divides the Lab difference in
    the per-location term so point and color contributions share a scale;
    set it to 1.0 for the raw, unnormalized color difference.
    """

    k: float = 0.5
    hist_metric: HistMetric = "intersection"
    n_locations: int = 5
    missing_penalty: float = MISSING_COLOR_PENALTY
    color_norm: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"k must be in [0, 1], got {self.k}")
        if self.hist_metric not in ("intersection", "chi-square"):
            raise ValueError(f"unknown histogram metric {self.hist_metric!r}")
        if self.n_locations < 1:
            raise ValueError("n_locations must be >= 1")
        if self.color_norm <= 0:
            raise ValueError("color_norm must be positive")


@dataclass(frozen=True)
class SimilarityTransform:
    """Rotation + uniform scale + translation on [0,1]^2 points.

    Maps (x, y) to (a*x - b*y + tx, b*x + a*y + ty).
    """

    a: float
    b: float
    tx: float
    ty: float

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x - self.b * y + self.tx, self.b * x + self.a * y + self.ty)

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def translation(cls, dx: float, dy: float) -> "SimilarityTransform":
        return cls(1.0, 0.0, dx, dy)


@dataclass
class LocationPairing:
    """Greedy color assignment of query locations onto base locations."""

    pairs: list[tuple[ColorLocation, ColorLocation]]
    unmatched_query_count: int


@dataclass
class LocationComparison:
    """Breakdown of the spatial distance between two signatures.

    ``point_terms`` and ``color_terms`` carry the two addends of the
    per-location characteristic value for each compared pair (pairs beyond
    the two consumed by transform fitting).
    """

    pairing: LocationPairing
    transform: SimilarityTransform
    point_terms: list[float]
    color_terms: list[float]
    penalty: float

    @property
    def total(self) -> float:
        return sum(self.point_terms) + sum(self.color_terms) + self.penalty


def hist_distance(
    h1: np.ndarray, h2: np.ndarray, metric: HistMetric = "intersection"
) -> float:
    """Distance in [0, 1] between two normalized histograms.

    intersection: 1 - sum(min(h1, h2)).  chi-square: half the summed
    squared differences over sums, empty bins skipped.
    """
    h1 = _checked_histogram(h1)
    h2 = _checked_histogram(h2)
    if metric == "intersection":
        # Clamp: rounded stored weights may sum a hair above 1.
        return max(0.0, float(1.0 - np.minimum(h1, h2).sum()))
    if metric == "chi-square":
        tot = h1 + h2
        mask = tot > 0
        diff = h1[mask] - h2[mask]
        return float(0.5 * np.sum(diff * diff / tot[mask]))
    raise ValueError(f"unknown histogram metric {metric!r}")


def _checked_histogram(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if np.any(h < 0) or abs(h.sum() - 1.0) > _HIST_SUM_TOL:
        raise ValueError("histogram is not normalized")
    return h


def match_locations(
    query: list[ColorLocation] | tuple[ColorLocation, ...],
    base: list[ColorLocation] | tuple[ColorLocation, ...],
) -> LocationPairing:
    """Pair each query location with the closest-colored unused base location.

    Greedy in query order (heaviest color first).  A query location whose
    best remaining color match is worse than MAX_PAIR_DELTA_E stays
    unmatched.
    """
    pairs: list[tuple[ColorLocation, ColorLocation]] = []
    unmatched = 0
    used = [False] * len(base)
    for q in query:
        best_j = -1
        best_de = float("inf")
        for j, b in enumerate(base):
            if used[j]:
                continue
            de = delta_e(q.lab, b.lab)
            if de < best_de:
                best_de = de
                best_j = j
        if best_j >= 0 and best_de <= MAX_PAIR_DELTA_E:
            used[best_j] = True
            pairs.append((q, base[best_j]))
        else:
            unmatched += 1
    return LocationPairing(pairs=pairs, unmatched_query_count=unmatched)


def fit_transform(
    p1: tuple[float, float],
    p2: tuple[float, float],
    q1: tuple[float, float],
    q2: tuple[float, float],
) -> SimilarityTransform:
    """The unique similarity taking p1 to q1 and p2 to q2.

    Two point pairs give four equations, exactly determining the four
    degrees of freedom (rotation, uniform scale, translation).
    """
    dx = p2[0] - p1[0]
    dy = p2[1] - p1[1]
    denom = dx * dx + dy * dy
    if denom <= 1e-12:  # separation below 1e-6
        raise DegenerateGeometryError(f"source points coincide: {p1}, {p2}")
    ux = q2[0] - q1[0]
    uy = q2[1] - q1[1]
    # Complex division (ux + i uy) / (dx + i dy) yields the rotation-scale.
    a = (ux * dx + uy * dy) / denom
    b = (uy * dx - ux * dy) / denom
    tx = q1[0] - (a * p1[0] - b * p1[1])
    ty = q1[1] - (b * p1[0] + a * p1[1])
    return SimilarityTransform(a, b, tx, ty)


def location_term(
    hyp: tuple[float, float],
    actual: tuple[float, float],
    lab1: tuple[float, float, float],
    lab2: tuple[float, float, float],
    params: DistanceParams = DistanceParams(),
) -> float:
    """Characteristic value for one color location.

    Twice the point distance over the maximum possible distance, plus the
    color difference scaled by ``color_norm``.
    """
    d_point = math.hypot(hyp[0] - actual[0], hyp[1] - actual[1])
    return 2.0 * d_point / MAX_POINT_DIST + delta_e(lab1, lab2) / params.color_norm


def compare_locations(
    query_sig: Signature, base_sig: Signature, params: DistanceParams = DistanceParams()
) -> LocationComparison:
    """Pair, align and score the color locations of two signatures.

    The transform is fitted from the first two pairs (query -> base).  With
    a single pair the fallback is the translation taking that pair's query
    center onto its base center; coincident source centers fall back the
    same way.  Each unmatched query location charges the missing penalty.
    """
    q_locs = list(query_sig.locations[: params.n_locations])
    b_locs = list(base_sig.locations[: params.n_locations])
    pairing = match_locations(q_locs, b_locs)
    pairs = pairing.pairs

    if not pairs:
        transform = SimilarityTransform.identity()
    elif len(pairs) == 1:
        q, b = pairs[0]
        transform = SimilarityTransform.translation(b.x - q.x, b.y - q.y)
    else:
        (qa, ba), (qb, bb) = pairs[0], pairs[1]
        try:
            transform = fit_transform((qa.x, qa.y), (qb.x, qb.y), (ba.x, ba.y), (bb.x, bb.y))
        except DegenerateGeometryError:
            transform = SimilarityTransform.translation(ba.x - qa.x, ba.y - qa.y)

    point_terms: list[float] = []
    color_terms: list[float] = []
    for q, b in pairs[2:]:
        hyp = transform.apply(q.x, q.y)
        d_point = math.hypot(hyp[0] - b.x, hyp[1] - b.y)
        point_terms.append(2.0 * d_point / MAX_POINT_DIST)
        color_terms.append(delta_e(q.lab, b.lab) / params.color_norm)

    penalty = pairing.unmatched_query_count * params.missing_penalty
    return LocationComparison(
        pairing=pairing,
        transform=transform,
        point_terms=point_terms,
        color_terms=color_terms,
        penalty=penalty,
    )


def location_distance(
    query_sig: Signature, base_sig: Signature, params: DistanceParams = DistanceParams()
) -> float:
    """Spatial color-location distance (the color-location half of the blend)."""
    return compare_locations(query_sig, base_sig, params).total


def combined_distance(
    query_sig: Signature, base_sig: Signature, params: DistanceParams = DistanceParams()
) -> float:
    """k-weighted blend of histogram distance and color-location distance."""
    k = params.k
    hist_part = (
        hist_distance(query_sig.histogram, base_sig.histogram, params.hist_metric)
        if k > 0.0
        else 0.0
    )
    loc_part = location_distance(query_sig, base_sig, params) if k < 1.0 else 0.0
    return k * hist_part + (1.0 - k) * loc_part
