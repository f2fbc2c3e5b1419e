"""Region proposals by greedy hierarchical merging over the superpixel
adjacency graph, ranked-free: every singleton and every intermediate merged
region is emitted as a proposal with its full pixel support."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from skimage import color as skcolor

from .core import validate_image
from .superpixels import SuperpixelPartition


@dataclass(frozen=True)
class Proposal:
    support: np.ndarray          # (H, W) bool
    area: int
    superpixel_ids: frozenset    # ids from the generating partition

    def contains(self, x: int, y: int) -> bool:
        return bool(self.support[y, x])


@dataclass(frozen=True)
class ProposalSet:
    proposals: tuple
    source_partition: SuperpixelPartition

    def __len__(self) -> int:
        return len(self.proposals)

    def proposals_at(self, x: int, y: int) -> list:
        """Indices of every proposal whose support contains pixel (x, y)."""
        h, w = self.source_partition.labels.shape
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"pixel ({x}, {y}) out of bounds")
        sp = int(self.source_partition.labels[y, x])
        return [i for i, p in enumerate(self.proposals) if sp in p.superpixel_ids]


def mean_lab_colors(image: np.ndarray, partition: SuperpixelPartition) -> np.ndarray:
    """Per-superpixel mean CIELAB color, (count, 3)."""
    img = validate_image(image)
    lab = skcolor.rgb2lab(img)
    flat = partition.labels.ravel()
    means = np.empty((partition.count, 3))
    for ch in range(3):
        s = np.bincount(flat, weights=lab[:, :, ch].ravel(),
                        minlength=partition.count)
        means[:, ch] = s / partition.sizes
    return means


def generate_proposals(image: np.ndarray, partition: SuperpixelPartition,
                       max_proposals: int | None = None) -> ProposalSet:
    """Single-linkage agglomerative merge by mean-CIELAB similarity.

    Emits all singleton superpixels first, then merged regions in merge
    order, truncated to max_proposals (default 2*count, the full binary
    merge tree). Ties break on smaller combined area, then lower region id.
    """
    img = validate_image(image)
    if img.shape[:2] != partition.labels.shape:
        raise ValueError("image and partition dimensions do not match")
    if max_proposals is None:
        max_proposals = 2 * partition.count
    if max_proposals < partition.count:
        raise ValueError("max_proposals must be at least the superpixel count")

    count = partition.count
    means = mean_lab_colors(img, partition)
    sizes = partition.sizes.astype(np.float64)

    # region state; merged regions get fresh ids count, count+1, ...
    region_members: dict = {i: frozenset([i]) for i in range(count)}
    region_mean = {i: means[i] for i in range(count)}
    region_size = {i: float(sizes[i]) for i in range(count)}
    region_neigh = {i: set(partition.adjacency[i]) for i in range(count)}
    active = set(range(count))

    def push_edges(heap, rid):
        for nb in sorted(region_neigh[rid]):
            if nb in active and nb != rid:
                d = float(np.linalg.norm(region_mean[rid] - region_mean[nb]))
                a, b = min(rid, nb), max(rid, nb)
                heapq.heappush(heap, (d, region_size[a] + region_size[b], a, b))

    heap: list = []
    for i in range(count):
        for nb in sorted(region_neigh[i]):
            if nb > i:
                d = float(np.linalg.norm(region_mean[i] - region_mean[nb]))
                heapq.heappush(heap, (d, region_size[i] + region_size[nb], i, nb))

    labels = partition.labels
    proposals = []
    for i in range(count):
        support = labels == i
        proposals.append(Proposal(support=support,
                                  area=int(partition.sizes[i]),
                                  superpixel_ids=frozenset([i])))

    next_id = count
    while len(proposals) < max_proposals and len(active) > 1 and heap:
        d, comb, a, b = heapq.heappop(heap)
        if a not in active or b not in active:
            continue
        members = region_members[a] | region_members[b]
        size = region_size[a] + region_size[b]
        mean = (region_mean[a] * region_size[a] +
                region_mean[b] * region_size[b]) / size
        neigh = (region_neigh[a] | region_neigh[b]) - {a, b}
        active.discard(a)
        active.discard(b)
        rid = next_id
        next_id += 1
        region_members[rid] = members
        region_mean[rid] = mean
        region_size[rid] = size
        region_neigh[rid] = neigh
        for nb in neigh:
            if nb in active:
                region_neigh[nb].discard(a)
                region_neigh[nb].discard(b)
                region_neigh[nb].add(rid)
        active.add(rid)
        push_edges(heap, rid)

        support = np.isin(labels, list(members))
        proposals.append(Proposal(support=support,
                                  area=int(support.sum()),
                                  superpixel_ids=members))

    return ProposalSet(proposals=tuple(proposals), source_partition=partition)
