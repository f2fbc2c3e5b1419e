"""Dense image/mask primitives, pixel-distance guidance maps, and the IoU metric.

Images are (H, W, 3) uint8 arrays, masks are (H, W) bool arrays, and
guidance channels are (H, W) float64 arrays with values in [0, 255].
Click coordinates are integer (x, y) pairs with origin at the top-left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import ndimage


class ChannelKind(str, Enum):
    EUCLIDEAN_POS = "euclidean_pos"
    EUCLIDEAN_NEG = "euclidean_neg"
    GAUSSIAN_POS = "gaussian_pos"
    GAUSSIAN_NEG = "gaussian_neg"
    SP_POS = "sp_pos"
    SP_NEG = "sp_neg"
    OBJECT = "object"
    SP_POS_SCALED = "sp_pos_scaled"
    SP_NEG_SCALED = "sp_neg_scaled"
    OBJECT_SCALED = "object_scaled"
    PREV_MASK = "prev_mask"


@dataclass(frozen=True)
class GuidanceChannel:
    """A single named guidance channel; values stored as floats in [0, 255]."""

    kind: ChannelKind
    values: np.ndarray  # (H, W) float64

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("channel values must be a 2-D grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("channel values must be finite")
        if v.min() < 0.0 or v.max() > 255.0:
            raise ValueError("channel values must lie in [0, 255]")
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def to_uint8(self) -> np.ndarray:
        """Quantize to 8-bit for serialization/display."""
        return np.clip(np.rint(self.values), 0, 255).astype(np.uint8)


def validate_image(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("image must be an (H, W, 3) uint8 array")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img


def validate_mask(mask: np.ndarray, shape=None) -> np.ndarray:
    m = np.asarray(mask)
    if m.ndim != 2 or m.dtype != np.bool_:
        raise ValueError("mask must be an (H, W) bool array")
    if shape is not None and m.shape != tuple(shape):
        raise ValueError(f"mask shape {m.shape} does not match expected {tuple(shape)}")
    return m


def check_clicks_in_bounds(clicks, width: int, height: int) -> None:
    for (x, y) in clicks:
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(
                f"click ({x}, {y}) out of bounds for {width}x{height} grid"
            )


def _min_click_distance(clicks, width: int, height: int) -> np.ndarray:
    """Per-pixel Euclidean distance to the nearest click (inf when no clicks)."""
    ys, xs = np.mgrid[0:height, 0:width]
    dist = np.full((height, width), np.inf)
    for (cx, cy) in clicks:
        d = np.hypot(xs - cx, ys - cy)
        np.minimum(dist, d, out=dist)
    return dist


def euclidean_guidance(clicks, width: int, height: int,
                       kind: ChannelKind = ChannelKind.EUCLIDEAN_POS) -> GuidanceChannel:
    """Distance-to-nearest-click map, clamped at 255; all 255 when no clicks."""
    check_clicks_in_bounds(clicks, width, height)
    if not clicks:
        return GuidanceChannel(kind, np.full((height, width), 255.0))
    dist = _min_click_distance(clicks, width, height)
    return GuidanceChannel(kind, np.minimum(dist, 255.0))


def gaussian_guidance(clicks, sigma: float, width: int, height: int,
                      kind: ChannelKind = ChannelKind.GAUSSIAN_POS) -> GuidanceChannel:
    """Gaussian click-presence map: 255 at a click, decaying with distance.

    Responses from multiple clicks combine with max; no clicks gives all
    zeros (the channel encodes presence, so absence is 0).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    check_clicks_in_bounds(clicks, width, height)
    if not clicks:
        return GuidanceChannel(kind, np.zeros((height, width)))
    dist = _min_click_distance(clicks, width, height)
    values = 255.0 * np.exp(-(dist ** 2) / (2.0 * sigma * sigma))
    return GuidanceChannel(kind, values)


def prev_mask_channel(mask: np.ndarray) -> GuidanceChannel:
    """Euclidean distance transform of the mask foreground, clamped at 255."""
    m = validate_mask(mask)
    if not m.any():
        return GuidanceChannel(ChannelKind.PREV_MASK,
                               np.full(m.shape, 255.0))
    # distance_transform_edt measures distance to the nearest zero element,
    # so invert: background pixels get distance to nearest foreground.
    dist = ndimage.distance_transform_edt(~m)
    return GuidanceChannel(ChannelKind.PREV_MASK, np.minimum(dist, 255.0))


def rescale_to_255(raw: np.ndarray, invert: bool = False,
                   kind: ChannelKind = ChannelKind.SP_POS) -> GuidanceChannel:
    """Linearly map a non-negative grid onto [0, 255] (all-zero input stays zero)."""
    v = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("raw values must be finite")
    if v.size and v.min() < 0:
        raise ValueError("raw values must be non-negative")
    vmax = v.max() if v.size else 0.0
    scaled = np.zeros_like(v) if vmax == 0 else 255.0 * v / vmax
    if invert:
        scaled = 255.0 - scaled
    # guard against float round-off nudging values past the bounds
    return GuidanceChannel(kind, np.clip(scaled, 0.0, 255.0))


def miou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Intersection over union of two binary masks; both empty counts as 1.0."""
    p = validate_mask(pred)
    g = validate_mask(gt, shape=p.shape)
    union = int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(p & g))
    return inter / union


@dataclass(frozen=True)
class GuidanceStack:
    """Ordered set of guidance channels sharing one image's dimensions.

    Carries the click lists it was assembled from so downstream consumers
    (e.g. the reference segmenter) can recover click placement.
    """

    channels: tuple
    positives: tuple = field(default_factory=tuple)
    negatives: tuple = field(default_factory=tuple)

    def __post_init__(self):
        kinds = [c.kind for c in self.channels]
        if len(set(kinds)) != len(kinds):
            raise ValueError("duplicate channel kinds in stack layout")
        shapes = {c.values.shape for c in self.channels}
        if len(shapes) > 1:
            raise ValueError("all channels in a stack must share dimensions")

    @property
    def layout(self) -> tuple:
        return tuple(c.kind for c in self.channels)

    def get(self, kind: ChannelKind) -> GuidanceChannel:
        for c in self.channels:
            if c.kind == kind:
                return c
        raise KeyError(kind)

    def get_first(self, *kinds: ChannelKind):
        """First channel present among the given kinds, else None."""
        for k in kinds:
            for c in self.channels:
                if c.kind == k:
                    return c
        return None
