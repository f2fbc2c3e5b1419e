"""SLIC superpixel partitioning with deterministic grid initialization and
connectivity enforcement, plus the partition bookkeeping (labels, centroids,
sizes, adjacency) the guidance transforms consume."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage import color as skcolor
from skimage import measure

from .core import validate_image


@dataclass(frozen=True)
class SuperpixelPartition:
    labels: np.ndarray      # (H, W) int32, ids in [0, count)
    count: int
    centroids: np.ndarray   # (count, 2) float64, (x, y)
    sizes: np.ndarray       # (count,) int64
    adjacency: tuple        # per-id frozenset of neighbor ids

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def pixel_to_superpixel(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"pixel ({x}, {y}) out of bounds")
        return int(self.labels[y, x])


def partition_from_labels(labels: np.ndarray) -> SuperpixelPartition:
    """Build the bookkeeping for a label grid with consecutive ids from 0."""
    labels = np.asarray(labels, dtype=np.int32)
    h, w = labels.shape
    count = int(labels.max()) + 1
    sizes = np.bincount(labels.ravel(), minlength=count).astype(np.int64)
    if np.any(sizes == 0):
        raise ValueError("label ids must be consecutive from 0")
    ys, xs = np.mgrid[0:h, 0:w]
    sx = np.bincount(labels.ravel(), weights=xs.ravel(), minlength=count)
    sy = np.bincount(labels.ravel(), weights=ys.ravel(), minlength=count)
    centroids = np.stack([sx / sizes, sy / sizes], axis=1)

    neigh = [set() for _ in range(count)]
    a, b = labels[:, :-1], labels[:, 1:]
    for la, lb in zip(a[a != b].tolist(), b[a != b].tolist()):
        neigh[la].add(lb)
        neigh[lb].add(la)
    a, b = labels[:-1, :], labels[1:, :]
    for la, lb in zip(a[a != b].tolist(), b[a != b].tolist()):
        neigh[la].add(lb)
        neigh[lb].add(la)
    return SuperpixelPartition(
        labels=labels,
        count=count,
        centroids=centroids,
        sizes=sizes,
        adjacency=tuple(frozenset(s) for s in neigh),
    )


def _grid_centers(w: int, h: int, k: int) -> np.ndarray:
    """Seed-free grid initialization: ~k centers as (x, y) floats."""
    step = np.sqrt(w * h / k)
    nx = max(1, int(round(w / step)))
    ny = max(1, int(round(h / step)))
    # nudge the grid toward exactly k cells when rounding drifts
    while nx * ny < k and (nx < w or ny < h):
        if (nx + 1) * ny <= k * 1.2 and nx < w:
            nx += 1
        elif nx * (ny + 1) <= k * 1.2 and ny < h:
            ny += 1
        else:
            break
    cx = (np.arange(nx) + 0.5) * (w / nx)
    cy = (np.arange(ny) + 0.5) * (h / ny)
    gx, gy = np.meshgrid(cx, cy)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def slic(image: np.ndarray, k: int, compactness: float = 10.0,
         iterations: int = 10) -> SuperpixelPartition:
    """Partition an image into ~k superpixels (CIELAB + spatial distance).

    Deterministic for fixed inputs: centers start on a regular grid and all
    updates are order-independent. The returned partition always satisfies
    completeness, 4-connectivity, size-sum, and the centroid formula.
    """
    img = validate_image(image)
    h, w = img.shape[:2]
    n = h * w
    if not (1 <= k <= n):
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if compactness <= 0:
        raise ValueError("compactness must be positive")

    lab = skcolor.rgb2lab(img)
    if k == n:
        labels = np.arange(n, dtype=np.int32).reshape(h, w)
        return partition_from_labels(labels)
    if k == 1:
        return partition_from_labels(np.zeros((h, w), dtype=np.int32))

    centers_xy = _grid_centers(w, h, k)
    m = centers_xy.shape[0]
    step = max(1.0, np.sqrt(n / m))
    ix = np.clip(np.rint(centers_xy[:, 0]).astype(int), 0, w - 1)
    iy = np.clip(np.rint(centers_xy[:, 1]).astype(int), 0, h - 1)
    centers_lab = lab[iy, ix]

    ys, xs = np.mgrid[0:h, 0:w]
    labels = np.zeros((h, w), dtype=np.int32)
    half = int(np.ceil(2 * step))
    inv_s2 = (compactness / step) ** 2

    for _ in range(iterations):
        best = np.full((h, w), np.inf)
        labels.fill(-1)
        for ci in range(m):
            cx, cy = centers_xy[ci]
            x0 = max(0, int(cx) - half)
            x1 = min(w, int(cx) + half + 1)
            y0 = max(0, int(cy) - half)
            y1 = min(h, int(cy) + half + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            dlab = lab[y0:y1, x0:x1] - centers_lab[ci]
            d_color = np.einsum("ijk,ijk->ij", dlab, dlab)
            d_space = (xs[y0:y1, x0:x1] - cx) ** 2 + (ys[y0:y1, x0:x1] - cy) ** 2
            d = d_color + d_space * inv_s2
            window = best[y0:y1, x0:x1]
            better = d < window
            window[better] = d[better]
            labels[y0:y1, x0:x1][better] = ci
        # pixels outside every window: assign to nearest center spatially
        orphan = labels < 0
        if orphan.any():
            oy, ox = np.nonzero(orphan)
            d = (ox[:, None] - centers_xy[None, :, 0]) ** 2 + \
                (oy[:, None] - centers_xy[None, :, 1]) ** 2
            labels[oy, ox] = np.argmin(d, axis=1)

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=m)
        nonempty = counts > 0
        sx = np.bincount(flat, weights=xs.ravel(), minlength=m)
        sy = np.bincount(flat, weights=ys.ravel(), minlength=m)
        centers_xy[nonempty, 0] = sx[nonempty] / counts[nonempty]
        centers_xy[nonempty, 1] = sy[nonempty] / counts[nonempty]
        for ch in range(3):
            sc = np.bincount(flat, weights=lab[:, :, ch].ravel(), minlength=m)
            centers_lab[nonempty, ch] = sc[nonempty] / counts[nonempty]

    labels = _enforce_connectivity(labels, min_size=max(1, n // (4 * k)),
                                   min_count=int(np.ceil(0.8 * k)))
    return partition_from_labels(labels)


def _enforce_connectivity(labels: np.ndarray, min_size: int,
                          min_count: int = 1) -> np.ndarray:
    """Make every superpixel 4-connected.

    Each cluster keeps its largest connected component; every other
    fragment is absorbed into a neighboring component (preferring kept
    components, then the largest neighbor). Kept components smaller than
    min_size are likewise absorbed, but never below min_count surviving
    superpixels so the requested count stays roughly honored.
    """
    # background=-1: no label value is treated as background
    comp = measure.label(labels, connectivity=1, background=-1)
    comp -= 1  # to 0-based component ids
    ncomp = int(comp.max()) + 1
    sizes = np.bincount(comp.ravel(), minlength=ncomp).astype(np.int64)

    # largest component of each original cluster is the keeper
    flat_comp = comp.ravel()
    flat_lab = labels.ravel()
    # map component -> original cluster via any member pixel
    rep = np.zeros(ncomp, dtype=np.int64)
    seen = np.zeros(ncomp, dtype=bool)
    for ci, li in zip(flat_comp.tolist(), flat_lab.tolist()):
        if not seen[ci]:
            seen[ci] = True
            rep[ci] = li
    keeper = np.zeros(ncomp, dtype=bool)
    best_for_label: dict = {}
    for ci in range(ncomp):
        li = int(rep[ci])
        cur = best_for_label.get(li)
        if cur is None or sizes[ci] > sizes[cur]:
            best_for_label[li] = ci
    for ci in best_for_label.values():
        keeper[ci] = True

    # component adjacency
    neigh = [set() for _ in range(ncomp)]
    a, b = comp[:, :-1], comp[:, 1:]
    for la, lb in zip(a[a != b].tolist(), b[a != b].tolist()):
        neigh[la].add(lb)
        neigh[lb].add(la)
    a, b = comp[:-1, :], comp[1:, :]
    for la, lb in zip(a[a != b].tolist(), b[a != b].tolist()):
        neigh[la].add(lb)
        neigh[lb].add(la)

    parent = np.arange(ncomp)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    def merge_into_neighbor(root):
        nbrs = {find(nb) for nb in neigh[root]} - {root}
        if not nbrs:
            return False
        target = max(sorted(nbrs),
                     key=lambda r: (keeper[r], sizes[r], -r))
        parent[root] = target
        sizes[target] += sizes[root]
        neigh[target] |= neigh[root]
        return True

    # absorb fragments (non-keepers), smallest first; repeat until stable
    changed = True
    while changed:
        changed = False
        for ci in sorted(range(ncomp), key=lambda i: (sizes[i], i)):
            root = find(ci)
            if root != ci or keeper[root]:
                continue
            if merge_into_neighbor(root):
                changed = True

    # absorb degenerate keepers below min_size, keeping at least min_count
    n_active = sum(1 for ci in range(ncomp) if find(ci) == ci)
    for ci in sorted(range(ncomp), key=lambda i: (sizes[i], i)):
        if n_active <= min_count:
            break
        root = find(ci)
        if root != ci or not keeper[root] or sizes[root] >= min_size:
            continue
        if merge_into_neighbor(root):
            n_active -= 1

    roots = np.array([find(i) for i in range(ncomp)])
    uniq, newids = np.unique(roots, return_inverse=True)
    return newids[comp].astype(np.int32)
