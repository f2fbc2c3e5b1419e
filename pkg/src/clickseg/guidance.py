"""Structure-based click guidance: superpixel-distance channels, proposal
counting channels, their scale-aware variants, and stack assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ChannelKind,
    GuidanceChannel,
    GuidanceStack,
    check_clicks_in_bounds,
    euclidean_guidance,
    gaussian_guidance,
    prev_mask_channel,
    rescale_to_255,
)
from .proposals import ProposalSet
from .superpixels import SuperpixelPartition


@dataclass(frozen=True)
class ClickSet:
    """Ordered positive and negative click lists; order matters because the
    first positive/negative pair drives scale estimation."""

    positives: tuple = ()
    negatives: tuple = ()

    def with_click(self, x: int, y: int, positive: bool) -> "ClickSet":
        if positive:
            return ClickSet(self.positives + ((x, y),), self.negatives)
        return ClickSet(self.positives, self.negatives + ((x, y),))

    def __len__(self) -> int:
        return len(self.positives) + len(self.negatives)


@dataclass(frozen=True)
class ScaleEstimate:
    s: float                  # object scale, pixels
    f: float = 2.0            # superpixel-distance truncation factor
    f1: float = 0.0           # proposal area ratio lower bound
    f2: float = 1.5           # proposal area ratio upper bound (may be inf)

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("scale must be positive")
        if self.f1 < 0 or self.f2 < self.f1:
            raise ValueError("need 0 <= f1 <= f2")


def superpixel_guidance_raw(partition: SuperpixelPartition, clicks) -> np.ndarray:
    """Per-pixel minimum centroid-to-centroid distance to a clicked
    superpixel, before any truncation or rescaling. None when no clicks."""
    check_clicks_in_bounds(clicks, partition.width, partition.height)
    if not clicks:
        return None
    clicked = sorted({partition.pixel_to_superpixel(x, y) for x, y in clicks})
    diffs = partition.centroids[None, :, :] - partition.centroids[clicked][:, None, :]
    per_sp = np.sqrt((diffs ** 2).sum(axis=2)).min(axis=0)  # (count,)
    return per_sp[partition.labels]


def superpixel_guidance(partition: SuperpixelPartition, clicks,
                        kind: ChannelKind = ChannelKind.SP_POS) -> GuidanceChannel:
    """Centroid-distance map propagated to whole superpixels, rescaled to
    [0,255]; no clicks gives all 255."""
    raw = superpixel_guidance_raw(partition, clicks)
    if raw is None:
        return GuidanceChannel(kind, np.full((partition.height, partition.width), 255.0))
    return rescale_to_255(raw, kind=kind)


def scale_truncate_sp(raw: np.ndarray, scale: ScaleEstimate | None,
                      kind: ChannelKind = ChannelKind.SP_POS_SCALED,
                      literal_max: bool = False,
                      shape=None) -> GuidanceChannel:
    """Scale-aware superpixel channel: saturate raw distances at f*s, then
    rescale. literal_max applies the printed-formula variant max(raw, f*s)
    instead of saturation. Missing scale falls back to the untruncated map."""
    if raw is None:
        if shape is None:
            raise ValueError("shape required for the no-click channel")
        return GuidanceChannel(kind, np.full(shape, 255.0))
    if scale is None:
        return rescale_to_255(raw, kind=kind)
    cap = scale.f * scale.s
    if literal_max:
        adjusted = np.maximum(raw, cap)
    else:
        adjusted = np.minimum(raw, cap)
    return rescale_to_255(adjusted, kind=kind)


def object_guidance_raw(pset: ProposalSet, positives,
                        f1: float = 0.0, f2: float = math.inf,
                        s: float = 1.0) -> np.ndarray:
    """Per-pixel count of proposals that contain a positive click and whose
    area ratio area/s^2 lies within [f1, f2]."""
    part = pset.source_partition
    check_clicks_in_bounds(positives, part.width, part.height)
    counts = np.zeros((part.height, part.width), dtype=np.int32)
    for (x, y) in positives:
        for idx in pset.proposals_at(x, y):
            p = pset.proposals[idx]
            if f1 <= p.area / (s * s) <= f2:
                counts += p.support
    return counts


def object_guidance(pset: ProposalSet, positives,
                    kind: ChannelKind = ChannelKind.OBJECT) -> GuidanceChannel:
    """Proposal-count channel rescaled to [0,255]; no positives gives all 0."""
    counts = object_guidance_raw(pset, positives)
    return rescale_to_255(counts.astype(np.float64), kind=kind)


def scale_filtered_object(pset: ProposalSet, positives,
                          scale: ScaleEstimate | None,
                          kind: ChannelKind = ChannelKind.OBJECT_SCALED) -> GuidanceChannel:
    """Scale-aware object channel: only proposals within the accepted area
    ratio band contribute. Missing scale falls back to the unfiltered map."""
    if scale is None:
        return object_guidance(pset, positives, kind=kind)
    counts = object_guidance_raw(pset, positives, f1=scale.f1, f2=scale.f2,
                                 s=scale.s)
    return rescale_to_255(counts.astype(np.float64), kind=kind)


DEFAULT_LAYOUT = (ChannelKind.SP_POS_SCALED, ChannelKind.SP_NEG_SCALED,
                  ChannelKind.OBJECT_SCALED, ChannelKind.PREV_MASK)

_SCALE_KINDS = {ChannelKind.SP_POS_SCALED, ChannelKind.SP_NEG_SCALED,
                ChannelKind.OBJECT_SCALED}


def assemble_stack(image: np.ndarray, partition: SuperpixelPartition | None,
                   pset: ProposalSet | None, clicks: ClickSet,
                   scale: ScaleEstimate | None = None,
                   prev_mask: np.ndarray | None = None,
                   layout=DEFAULT_LAYOUT,
                   allow_scale_fallback: bool = False,
                   sigma: float = 10.0) -> GuidanceStack:
    """Compute the requested channel layout into a GuidanceStack."""
    h, w = image.shape[:2]
    if scale is None and not allow_scale_fallback:
        missing = [k for k in layout if k in _SCALE_KINDS]
        if missing:
            raise ValueError(
                f"layout requests scale-aware channels {missing} without a scale "
                "estimate (set allow_scale_fallback to degrade gracefully)"
            )
    shape = (h, w)
    channels = []
    for kind in layout:
        if kind == ChannelKind.EUCLIDEAN_POS:
            c = euclidean_guidance(clicks.positives, w, h, kind=kind)
        elif kind == ChannelKind.EUCLIDEAN_NEG:
            c = euclidean_guidance(clicks.negatives, w, h, kind=kind)
        elif kind == ChannelKind.GAUSSIAN_POS:
            c = gaussian_guidance(clicks.positives, sigma, w, h, kind=kind)
        elif kind == ChannelKind.GAUSSIAN_NEG:
            c = gaussian_guidance(clicks.negatives, sigma, w, h, kind=kind)
        elif kind == ChannelKind.SP_POS:
            c = superpixel_guidance(partition, clicks.positives, kind=kind)
        elif kind == ChannelKind.SP_NEG:
            c = superpixel_guidance(partition, clicks.negatives, kind=kind)
        elif kind == ChannelKind.SP_POS_SCALED:
            raw = superpixel_guidance_raw(partition, clicks.positives)
            c = scale_truncate_sp(raw, scale, kind=kind, shape=shape)
        elif kind == ChannelKind.SP_NEG_SCALED:
            raw = superpixel_guidance_raw(partition, clicks.negatives)
            c = scale_truncate_sp(raw, scale, kind=kind, shape=shape)
        elif kind == ChannelKind.OBJECT:
            c = object_guidance(pset, clicks.positives, kind=kind)
        elif kind == ChannelKind.OBJECT_SCALED:
            c = scale_filtered_object(pset, clicks.positives, scale, kind=kind)
        elif kind == ChannelKind.PREV_MASK:
            mask = prev_mask if prev_mask is not None \
                else np.zeros(shape, dtype=bool)
            c = prev_mask_channel(mask)
        else:
            raise ValueError(f"unknown channel kind: {kind}")
        if c.values.shape != shape:
            raise ValueError("channel dimensions do not match the image")
        channels.append(c)
    return GuidanceStack(channels=tuple(channels),
                         positives=tuple(clicks.positives),
                         negatives=tuple(clicks.negatives))
