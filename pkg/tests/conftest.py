import math

import numpy as np
import pytest

from clickseg.proposals import Proposal, ProposalSet
from clickseg.superpixels import partition_from_labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, w, h):
    return rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)


def random_partition(rng, w, h, max_regions=6):
    """Random connected partition grown by seeded flood fill; independent of
    the SLIC implementation."""
    n_seeds = int(rng.integers(1, max_regions + 1))
    labels = np.full((h, w), -1, dtype=np.int32)
    seeds = []
    while len(seeds) < n_seeds:
        x, y = int(rng.integers(w)), int(rng.integers(h))
        if labels[y, x] < 0:
            labels[y, x] = len(seeds)
            seeds.append((x, y))
    frontier = [list(s) for s in seeds]
    active = list(range(len(seeds)))
    while active:
        i = active[int(rng.integers(len(active)))]
        grew = False
        ys, xs = np.nonzero(labels == i)
        order = rng.permutation(len(xs))
        for j in order:
            x, y = int(xs[j]), int(ys[j])
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and labels[ny, nx] < 0:
                    labels[ny, nx] = i
                    grew = True
                    break
            if grew:
                break
        if not grew:
            active.remove(i)
    return partition_from_labels(labels)


def brute_centroids(labels):
    """Centroid per label id computed by explicit pixel loops."""
    h, w = labels.shape
    count = labels.max() + 1
    sx = [0.0] * count
    sy = [0.0] * count
    n = [0] * count
    for y in range(h):
        for x in range(w):
            li = int(labels[y, x])
            sx[li] += x
            sy[li] += y
            n[li] += 1
    return [(sx[i] / n[i], sy[i] / n[i]) for i in range(count)]


def brute_sp_raw(partition, clicks):
    """Direct per-pixel evaluation of the superpixel distance map."""
    labels = partition.labels
    h, w = labels.shape
    cents = brute_centroids(labels)
    clicked = sorted({int(labels[y, x]) for x, y in clicks})
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            sp = int(labels[y, x])
            out[y, x] = min(
                math.sqrt((cents[sp][0] - cents[c][0]) ** 2
                          + (cents[sp][1] - cents[c][1]) ** 2)
                for c in clicked)
    return out


def brute_object_raw(pset, positives, f1=0.0, f2=math.inf, s=1.0):
    """Direct per-pixel double summation of the proposal-count map."""
    h, w = pset.source_partition.labels.shape
    out = np.zeros((h, w), dtype=np.int64)
    for (cx, cy) in positives:
        for p in pset.proposals:
            if not p.support[cy, cx]:
                continue
            if not (f1 <= p.area / (s * s) <= f2):
                continue
            for y in range(h):
                for x in range(w):
                    if p.support[y, x]:
                        out[y, x] += 1
    return out


def brute_rescale(raw):
    m = raw.max()
    if m == 0:
        return np.zeros_like(raw, dtype=float)
    return 255.0 * raw / m


def enumerate_proposals(partition, rng, n_extra=4):
    """A proposal set of all singletons plus a few random unions of adjacent
    superpixels, built without the production merge code."""
    labels = partition.labels
    props = []
    for i in range(partition.count):
        support = labels == i
        props.append(Proposal(support=support, area=int(support.sum()),
                              superpixel_ids=frozenset([i])))
    for _ in range(n_extra):
        start = int(rng.integers(partition.count))
        members = {start}
        for _ in range(int(rng.integers(1, 4))):
            frontier = set()
            for m in members:
                frontier |= set(partition.adjacency[m])
            frontier -= members
            if not frontier:
                break
            members.add(int(rng.choice(sorted(frontier))))
        support = np.isin(labels, sorted(members))
        prop = Proposal(support=support, area=int(support.sum()),
                        superpixel_ids=frozenset(members))
        if all(p.superpixel_ids != prop.superpixel_ids for p in props):
            props.append(prop)
    return ProposalSet(proposals=tuple(props), source_partition=partition)
