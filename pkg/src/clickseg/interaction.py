"""Simulated-user clicking, scale estimation, the segmenter contract, a
classical reference segmenter, and the iterative click/predict session loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np
from scipy import ndimage

from .core import ChannelKind, GuidanceStack, miou, validate_mask
from .guidance import ClickSet, ScaleEstimate, assemble_stack
from .proposals import ProposalSet, generate_proposals, mean_lab_colors
from .superpixels import SuperpixelPartition, slic

FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class SamplingConfig:
    """Hyperparameter choice sets for simulated click sampling; the sampler
    draws one value per set each time it runs."""

    n_pos: tuple = (2, 3, 4, 5)
    n_neg1: tuple = (5, 10)
    n_neg2: tuple = (3, 5)
    d_in1: tuple = (15, 20, 40)
    d_in2: tuple = (7, 10, 20)
    d_out1: tuple = (15, 40, 60)
    d_out2: tuple = (10, 15, 25)
    replace_prob: float = 0.3
    n_iter: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        for dists in (self.d_in1, self.d_in2, self.d_out1, self.d_out2):
            if any(d <= 0 for d in dists):
                raise ValueError("all distance choices must be positive")
        if not (0.0 <= self.replace_prob <= 1.0):
            raise ValueError("replace_prob must lie in [0, 1]")


@dataclass
class SessionState:
    clicks: ClickSet = field(default_factory=ClickSet)
    scale: Optional[ScaleEstimate] = None
    prev_mask: Optional[np.ndarray] = None
    click_budget_used: int = 0
    trace: list = field(default_factory=list)  # (x, y, polarity, miou_after)
    zero_click_miou: Optional[float] = None


class Segmenter(Protocol):
    """Anything that deterministically maps (image, guidance stack) to a
    binary mask of the same dimensions."""

    def predict(self, image: np.ndarray, stack: GuidanceStack) -> np.ndarray: ...


def estimate_scale(first_pos, first_neg, f: float = 2.0, f1: float = 0.0,
                   f2: float = 1.5) -> ScaleEstimate:
    """Object scale from the first positive/negative pair: s = sqrt(pi) * d."""
    d = math.hypot(first_pos[0] - first_neg[0], first_pos[1] - first_neg[1])
    if d == 0:
        raise ValueError("coincident clicks give a degenerate scale")
    return ScaleEstimate(s=math.sqrt(math.pi) * d, f=f, f1=f1, f2=f2)


def scale_from_mask(gt: np.ndarray, f: float = 2.0, f1: float = 0.0,
                    f2: float = 1.5) -> ScaleEstimate:
    """Ground-truth scale for oracle experiments: sqrt of foreground area."""
    area = int(np.count_nonzero(validate_mask(gt)))
    if area == 0:
        raise ValueError("empty ground truth has no scale")
    return ScaleEstimate(s=math.sqrt(area), f=f, f1=f1, f2=f2)


def boundary_distance(mask: np.ndarray) -> np.ndarray:
    """Distance of each foreground pixel to the nearest background pixel
    (image border counts as background)."""
    m = validate_mask(mask)
    padded = np.pad(m, 1, constant_values=False)
    return ndimage.distance_transform_edt(padded)[1:-1, 1:-1]


def max_boundary_distance_point(mask: np.ndarray) -> tuple:
    """(x, y) of the foreground pixel deepest inside the mask; scan-order
    first on ties."""
    dist = boundary_distance(mask)
    if not mask.any():
        raise ValueError("mask has no foreground")
    idx = int(np.argmax(dist))
    y, x = divmod(idx, mask.shape[1])
    return (x, y)


def _pick_spaced(candidates: np.ndarray, n: int, min_dist: float,
                 rng: np.random.Generator) -> list:
    """Randomly pick up to n candidate (x, y) points pairwise >= min_dist apart."""
    picked = []
    order = rng.permutation(len(candidates))
    for i in order:
        x, y = int(candidates[i][0]), int(candidates[i][1])
        if all(math.hypot(x - px, y - py) >= min_dist for px, py in picked):
            picked.append((x, y))
            if len(picked) == n:
                break
    return picked


def sample_positive_clicks(gt: np.ndarray, cfg: SamplingConfig,
                           rng: np.random.Generator) -> list:
    """Positive clicks inside the object, away from its boundary and from
    each other; constraints are halved until satisfiable on small objects."""
    m = validate_mask(gt)
    if not m.any():
        raise ValueError("cannot sample positive clicks on an empty object")
    n = int(rng.choice(cfg.n_pos))
    d1 = float(rng.choice(cfg.d_in1))
    d2 = float(rng.choice(cfg.d_in2))
    dist = boundary_distance(m)

    while True:
        ys, xs = np.nonzero(dist >= d1)
        if len(xs) > 0:
            candidates = np.stack([xs, ys], axis=1)
            picked = _pick_spaced(candidates, n, d2, rng)
            if picked:
                return picked
        if d1 < 0.5 and d2 < 0.5:
            break
        d1 /= 2.0
        d2 /= 2.0
    return [max_boundary_distance_point(m)]


def sample_negative_clicks(gt: np.ndarray, other_instances, strategy: int,
                           cfg: SamplingConfig, rng: np.random.Generator) -> list:
    """Strategy 1: background clicks away from the object boundary and from
    each other. Strategy 2: clicks on each of the other (negative) objects.
    Returns an empty list (not an error) when no valid candidates exist."""
    m = validate_mask(gt)
    if strategy == 1:
        n = int(rng.choice(cfg.n_neg1))
        d1 = float(rng.choice(cfg.d_out1))
        d2 = float(rng.choice(cfg.d_out2))
        background = ~m
        if not background.any():
            return []
        # distance from each background pixel to the object
        dist_to_obj = ndimage.distance_transform_edt(background) if m.any() \
            else np.full(m.shape, np.inf)
        while True:
            ys, xs = np.nonzero(background & (dist_to_obj >= d1))
            if len(xs) > 0:
                candidates = np.stack([xs, ys], axis=1)
                picked = _pick_spaced(candidates, n, d2, rng)
                if picked:
                    return picked
            if d1 < 0.5 and d2 < 0.5:
                break
            d1 /= 2.0
            d2 /= 2.0
        ys, xs = np.nonzero(background)
        i = int(rng.integers(len(xs)))
        return [(int(xs[i]), int(ys[i]))]
    if strategy == 2:
        clicks = []
        n = int(rng.choice(cfg.n_neg2))
        for inst in other_instances:
            inst = validate_mask(inst, shape=m.shape)
            if not inst.any():
                continue
            dist = boundary_distance(inst)
            ys, xs = np.nonzero(inst)
            candidates = np.stack([xs, ys], axis=1)
            weights_order = np.argsort(-dist[ys, xs], kind="stable")
            picked = _pick_spaced(candidates[weights_order], n, 1.0, rng)
            clicks.extend(picked)
        return clicks
    raise ValueError("strategy must be 1 or 2")


def correction_click(pred: np.ndarray, gt: np.ndarray) -> tuple:
    """((x, y), positive) at the pixel of the largest misclassified 4-connected
    region closest to that region's centroid."""
    p = validate_mask(pred)
    g = validate_mask(gt, shape=p.shape)
    err = p ^ g
    if not err.any():
        raise ValueError("prediction equals ground truth; no correction needed")
    comp, ncomp = ndimage.label(err, structure=FOUR_CONN)
    sizes = np.bincount(comp.ravel())[1:]  # skip background
    largest = int(np.argmax(sizes)) + 1   # ties: lowest label id (scan order)
    ys, xs = np.nonzero(comp == largest)
    cx, cy = xs.mean(), ys.mean()
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    i = int(np.argmin(d2))               # ties: scan order
    x, y = int(xs[i]), int(ys[i])
    positive = bool(g[y, x])             # false negative wants a positive click
    return (x, y), positive


def sample_correction_clicks(pred: np.ndarray, gt: np.ndarray,
                             cfg: SamplingConfig, rng: np.random.Generator,
                             existing: ClickSet) -> ClickSet:
    """Training-style iterative sampling: up to n_iter error-driven clicks,
    each replacing an existing click of its polarity with probability
    replace_prob, otherwise appended."""
    positives = list(existing.positives)
    negatives = list(existing.negatives)
    current = pred.copy()
    for _ in range(cfg.n_iter):
        if np.array_equal(current, gt):
            break
        (x, y), pos = correction_click(current, gt)
        target = positives if pos else negatives
        if target and rng.random() < cfg.replace_prob:
            target[int(rng.integers(len(target)))] = (x, y)
        else:
            target.append((x, y))
        current[y, x] = bool(gt[y, x])  # mark handled so later clicks spread out
    return ClickSet(tuple(positives), tuple(negatives))


class ReferenceSegmenter:
    """Deterministic classical segmenter over a fixed superpixel partition.

    Per-superpixel score combines the guidance channels with a color
    similarity term toward the clicked superpixels; clicked superpixels are
    forced to their click polarity. Weights are configuration, not a claim
    about any learned model.
    """

    def __init__(self, partition: SuperpixelPartition, lab_means: np.ndarray,
                 weights=(1.0, 1.0, 1.0), color_tau: float = 20.0):
        self.partition = partition
        self.lab_means = lab_means
        self.weights = weights
        self.color_tau = color_tau

    def _channel_mean_per_sp(self, channel) -> np.ndarray:
        flat = self.partition.labels.ravel()
        s = np.bincount(flat, weights=channel.values.ravel(),
                        minlength=self.partition.count)
        return s / self.partition.sizes

    def _similarity(self, clicked_sps) -> np.ndarray:
        if not clicked_sps:
            return np.zeros(self.partition.count)
        d = np.linalg.norm(
            self.lab_means[:, None, :] - self.lab_means[list(clicked_sps)][None, :, :],
            axis=2).min(axis=1)
        return np.exp(-d / self.color_tau)

    def predict(self, image: np.ndarray, stack: GuidanceStack) -> np.ndarray:
        part = self.partition
        pos_ch = stack.get_first(ChannelKind.SP_POS_SCALED, ChannelKind.SP_POS,
                                 ChannelKind.EUCLIDEAN_POS)
        neg_ch = stack.get_first(ChannelKind.SP_NEG_SCALED, ChannelKind.SP_NEG,
                                 ChannelKind.EUCLIDEAN_NEG)
        if pos_ch is None or neg_ch is None:
            raise ValueError(
                "reference segmenter needs distance-style positive and "
                "negative channels in the stack"
            )
        obj_ch = stack.get_first(ChannelKind.OBJECT_SCALED, ChannelKind.OBJECT)
        w1, w2, w3 = self.weights
        pos = self._channel_mean_per_sp(pos_ch)
        neg = self._channel_mean_per_sp(neg_ch)
        score = w1 * (neg - pos) / 255.0
        if obj_ch is not None:
            score = score + w2 * self._channel_mean_per_sp(obj_ch) / 255.0
        pos_sps = {part.pixel_to_superpixel(x, y) for x, y in stack.positives}
        neg_sps = {part.pixel_to_superpixel(x, y) for x, y in stack.negatives}
        score = score + w3 * (self._similarity(sorted(pos_sps)) -
                              self._similarity(sorted(neg_sps)))
        fg = score > 0.0
        for sp in pos_sps:
            fg[sp] = True
        for sp in neg_sps:
            fg[sp] = False
        return fg[part.labels]


def make_reference_segmenter(image: np.ndarray,
                             partition: SuperpixelPartition,
                             weights=(1.0, 1.0, 1.0)) -> ReferenceSegmenter:
    return ReferenceSegmenter(partition, mean_lab_colors(image, partition),
                              weights=weights)


def run_session(image: np.ndarray, gt: np.ndarray, segmenter,
                budget: int = 20, iou_target: float = 0.90,
                cfg: Optional[SamplingConfig] = None,
                layout=None,
                partition: Optional[SuperpixelPartition] = None,
                pset: Optional[ProposalSet] = None,
                k: int = 64,
                zero_click_prediction: bool = True,
                scale_params=(2.0, 0.0, 1.5),
                scale_mode: str = "clicks") -> SessionState:
    """Iterative click/predict loop with the deterministic evaluation policy:
    first click at the object's innermost point, then correction clicks at
    the largest-error center, guidance recomputed after every click.

    scale_mode selects how the object-scale measure s is obtained: "clicks"
    estimates it from the first positive/negative pair, while "gt" reads it
    from the ground-truth mask (the oracle setting used for ablations, where
    the simulated correction clicks are not representative of a user's
    boundary-hugging negative clicks)."""
    from .guidance import DEFAULT_LAYOUT
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if scale_mode not in ("clicks", "gt"):
        raise ValueError("scale_mode must be 'clicks' or 'gt'")
    if cfg is None:
        cfg = SamplingConfig()
    if layout is None:
        layout = DEFAULT_LAYOUT
    g = validate_mask(gt, shape=image.shape[:2])
    if partition is None:
        partition = slic(image, k=min(k, g.size))
    if pset is None:
        pset = generate_proposals(image, partition)

    state = SessionState()
    pred = np.zeros_like(g)
    if scale_mode == "gt" and g.any():
        f, f1, f2 = scale_params
        state.scale = scale_from_mask(g, f=f, f1=f1, f2=f2)

    def predict_now():
        stack = assemble_stack(image, partition, pset, state.clicks,
                               scale=state.scale, prev_mask=state.prev_mask,
                               layout=layout, allow_scale_fallback=True)
        out = segmenter.predict(image, stack)
        return validate_mask(out, shape=g.shape)

    if zero_click_prediction:
        pred = predict_now()
        state.zero_click_miou = miou(pred, g)
        state.prev_mask = pred
        if state.zero_click_miou >= iou_target:
            return state

    while state.click_budget_used < budget:
        if state.click_budget_used == 0:
            x, y = max_boundary_distance_point(g)
            positive = True
        else:
            if np.array_equal(pred, g):
                break
            (x, y), positive = correction_click(pred, g)
        state.clicks = state.clicks.with_click(x, y, positive)
        state.click_budget_used += 1
        if state.scale is None and state.clicks.positives and state.clicks.negatives:
            p0, n0 = state.clicks.positives[0], state.clicks.negatives[0]
            if p0 != n0:
                f, f1, f2 = scale_params
                state.scale = estimate_scale(p0, n0, f=f, f1=f1, f2=f2)
        try:
            pred = predict_now()
        except Exception:
            break  # segmenter failure: keep the partial trace
        score = miou(pred, g)
        state.trace.append({"index": state.click_budget_used, "x": x, "y": y,
                            "polarity": "pos" if positive else "neg",
                            "miou": score})
        state.prev_mask = pred
        if score >= iou_target:
            break
    return state
