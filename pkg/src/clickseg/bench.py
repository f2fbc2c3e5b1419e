"""Dataset loading, synthetic dataset generation, the clicks@mIoU benchmark
protocol, and parameter sweeps (guidance layout, superpixel count, f2)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .core import ChannelKind, miou
from .guidance import DEFAULT_LAYOUT, ScaleEstimate
from .interaction import SamplingConfig, make_reference_segmenter, run_session
from .io import read_image_png, read_mask_png, write_image_png, write_mask_png
from .proposals import generate_proposals
from .superpixels import slic

MAX_CLICKS = 20

LAYOUTS = {
    "euclidean": (ChannelKind.EUCLIDEAN_POS, ChannelKind.EUCLIDEAN_NEG),
    "sp": (ChannelKind.SP_POS, ChannelKind.SP_NEG),
    "sp_obj": (ChannelKind.SP_POS, ChannelKind.SP_NEG, ChannelKind.OBJECT),
    "sp_obj_iter": (ChannelKind.SP_POS, ChannelKind.SP_NEG,
                    ChannelKind.OBJECT, ChannelKind.PREV_MASK),
    "sp_obj_scaled": DEFAULT_LAYOUT,
}


@dataclass(frozen=True)
class DatasetInstance:
    id: str
    image_path: Path
    mask_path: Path
    other_mask_paths: tuple = ()

    def load(self):
        image = read_image_png(self.image_path)
        gt = read_mask_png(self.mask_path)
        others = [read_mask_png(p) for p in self.other_mask_paths]
        return image, gt, others


@dataclass
class BenchmarkReport:
    per_instance_noc: dict          # id -> clicks to reach threshold (20 cap)
    mean_noc: float
    curve: list                     # mean mIoU at click counts 1..20
    zero_click_successes: int
    config: dict
    errors: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "per_instance_noc": self.per_instance_noc,
            "mean_noc": self.mean_noc,
            "miou_vs_clicks": self.curve,
            "zero_click_successes": self.zero_click_successes,
            "config": self.config,
            "errors": self.errors,
        }, indent=2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["instance", "noc"])
            for iid in sorted(self.per_instance_noc):
                writer.writerow([iid, self.per_instance_noc[iid]])
            writer.writerow([])
            writer.writerow(["clicks", "mean_miou"])
            for i, v in enumerate(self.curve, start=1):
                writer.writerow([i, v])


def load_dataset(root) -> list:
    """Instances from root/images/*.png + root/masks/<same name>.png, with
    optional root/instances/<name>/*.png sibling masks. Raises one ValueError
    itemizing every invalid instance."""
    root = Path(root)
    images_dir = root / "images"
    masks_dir = root / "masks"
    if not images_dir.is_dir():
        return []
    instances = []
    problems = []
    for img_path in sorted(images_dir.glob("*.png")):
        name = img_path.stem
        mask_path = masks_dir / img_path.name
        if not mask_path.exists():
            problems.append(f"{name}: missing mask {mask_path}")
            continue
        image = read_image_png(img_path)
        raw_mask = np.asarray(Image.open(mask_path).convert("L"))
        if raw_mask.shape != image.shape[:2]:
            problems.append(
                f"{name}: mask {raw_mask.shape} does not match image {image.shape[:2]}")
            continue
        if not np.isin(raw_mask, (0, 255)).all():
            problems.append(f"{name}: mask is not binary (values other than 0/255)")
            continue
        others = tuple(sorted((root / "instances" / name).glob("*.png"))) \
            if (root / "instances" / name).is_dir() else ()
        instances.append(DatasetInstance(id=name, image_path=img_path,
                                         mask_path=mask_path,
                                         other_mask_paths=others))
    if problems:
        raise ValueError("dataset load errors:\n" + "\n".join(problems))
    return instances


def _rasterize_shape(rng: np.random.Generator, size: int, small: bool):
    """One random shape mask on a size x size grid plus its fill color."""
    mask = np.zeros((size, size), dtype=bool)
    ys, xs = np.mgrid[0:size, 0:size]
    if small:
        extent = int(rng.integers(8, 28))   # keeps foreground under 32x32
    else:
        extent = int(rng.integers(32, 80))
    cx = int(rng.integers(extent // 2 + 2, size - extent // 2 - 2))
    cy = int(rng.integers(extent // 2 + 2, size - extent // 2 - 2))
    kind = int(rng.integers(3))
    if kind == 0:  # disc
        r = extent / 2
        mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    elif kind == 1:  # rectangle
        w = extent
        h = max(4, int(extent * float(rng.uniform(0.5, 1.0))))
        mask = (np.abs(xs - cx) <= w // 2) & (np.abs(ys - cy) <= h // 2)
    else:  # L-shape
        w = extent
        arm = max(3, w // 3)
        box = (np.abs(xs - cx) <= w // 2) & (np.abs(ys - cy) <= w // 2)
        notch = (xs > cx - w // 2 + arm) & (ys < cy + w // 2 - arm)
        mask = box & ~notch
    color = rng.integers(130, 256, size=3).astype(np.uint8)
    return mask, color


def make_synthetic_dataset(n: int, seed: int, out) -> list:
    """n deterministic 128x128 images with 1-3 colored shapes on a textured
    background; the first shape is the target instance, the rest are written
    as negative instances. Every 4th image carries a small (<32x32) target."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out = Path(out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    size = 128
    instances = []
    for i in range(n):
        name = f"synth_{i:04d}"
        base = rng.integers(0, 90, size=3).astype(np.uint8)
        noise = rng.integers(0, 15, size=(size, size, 3)).astype(np.uint8)
        image = np.clip(base[None, None, :].astype(int) + noise, 0, 255).astype(np.uint8)
        n_shapes = int(rng.integers(1, 4))
        shape_masks = []
        occupied = np.zeros((size, size), dtype=bool)
        for j in range(n_shapes):
            small = (j == 0 and i % 4 == 3)
            for _ in range(20):
                mask, color = _rasterize_shape(rng, size, small)
                if not (mask & occupied).any() and mask.any():
                    break
            else:
                continue
            shade = rng.integers(0, 10, size=(size, size, 1))
            paint = np.clip(color[None, None, :].astype(int) + shade, 0, 255)
            image = np.where(mask[:, :, None], paint, image).astype(np.uint8)
            occupied |= mask
            shape_masks.append(mask)
        if not shape_masks:  # retry degenerate image with a guaranteed disc
            mask, color = _rasterize_shape(rng, size, small=(i % 4 == 3))
            image = np.where(mask[:, :, None], color[None, None, :], image).astype(np.uint8)
            shape_masks = [mask]
        write_image_png(out / "images" / f"{name}.png", image)
        write_mask_png(out / "masks" / f"{name}.png", shape_masks[0])
        others = []
        if len(shape_masks) > 1:
            inst_dir = out / "instances" / name
            inst_dir.mkdir(parents=True, exist_ok=True)
            for j, m in enumerate(shape_masks[1:]):
                p = inst_dir / f"{j}.png"
                write_mask_png(p, m)
                others.append(p)
        instances.append(DatasetInstance(id=name,
                                         image_path=out / "images" / f"{name}.png",
                                         mask_path=out / "masks" / f"{name}.png",
                                         other_mask_paths=tuple(others)))
    return instances


def run_benchmark(dataset, layout_name: str = "sp_obj_scaled",
                  threshold: float = 0.90, seed: int = 0, k: int = 64,
                  f: float = 2.0, f1: float = 0.0, f2: float = 1.5,
                  segmenter_factory=None,
                  cfg: SamplingConfig | None = None,
                  scale_mode: str = "gt") -> BenchmarkReport:
    """clicks@mIoU protocol: per-instance sessions capped at 20 clicks,
    NoC = clicks to reach the threshold (20 when never reached). The scale
    measure defaults to the ground-truth setting used for ablation studies
    (sqrt of the instance's pixel count)."""
    if not dataset:
        raise ValueError("dataset must be non-empty")
    layout = LAYOUTS[layout_name] if isinstance(layout_name, str) else layout_name
    if cfg is None:
        cfg = SamplingConfig(rng_seed=seed)
    per_noc = {}
    curves = []
    zero_successes = 0
    errors = {}
    for inst in sorted(dataset, key=lambda d: d.id):
        try:
            image, gt, _others = inst.load()
            partition = slic(image, k=min(k, gt.size))
            pset = generate_proposals(image, partition)
            if segmenter_factory is None:
                segmenter = make_reference_segmenter(image, partition)
            else:
                segmenter = segmenter_factory(image, partition, pset)
            state = run_session(image, gt, segmenter, budget=MAX_CLICKS,
                                iou_target=threshold, cfg=cfg, layout=layout,
                                partition=partition, pset=pset,
                                scale_params=(f, f1, f2), scale_mode=scale_mode)
        except Exception as exc:  # record and continue with other instances
            errors[inst.id] = str(exc)
            continue
        if state.zero_click_miou is not None and state.zero_click_miou >= threshold:
            zero_successes += 1
            per_noc[inst.id] = 0
            curves.append([state.zero_click_miou] * MAX_CLICKS)
            continue
        noc = MAX_CLICKS
        for rec in state.trace:
            if rec["miou"] >= threshold:
                noc = rec["index"]
                break
        per_noc[inst.id] = noc
        curve = []
        last = state.zero_click_miou or 0.0
        by_index = {rec["index"]: rec["miou"] for rec in state.trace}
        for i in range(1, MAX_CLICKS + 1):
            last = by_index.get(i, last)
            curve.append(last)
        curves.append(curve)
    mean_noc = float(np.mean(list(per_noc.values()))) if per_noc else float("nan")
    mean_curve = list(np.mean(np.array(curves), axis=0)) if curves else [0.0] * MAX_CLICKS
    config = {"layout": layout_name if isinstance(layout_name, str) else "custom",
              "k": k, "f": f, "f1": f1,
              "f2": "inf" if math.isinf(f2) else f2,
              "scale_mode": scale_mode,
              "threshold": threshold, "seed": seed,
              "noc_cap": MAX_CLICKS,
              "noc_for_unreached": MAX_CLICKS}
    return BenchmarkReport(per_instance_noc=per_noc, mean_noc=mean_noc,
                           curve=[float(v) for v in mean_curve],
                           zero_click_successes=zero_successes,
                           config=config, errors=errors)


def sweep(dataset, parameter: str, values, threshold: float = 0.90,
          seed: int = 0, k: int = 64, layout_name: str = "sp_obj_scaled") -> list:
    """One benchmark report per parameter value, all sharing the same seed."""
    if not values:
        raise ValueError("sweep needs at least one value")
    reports = []
    for v in values:
        if parameter == "layout":
            rep = run_benchmark(dataset, layout_name=v, threshold=threshold,
                                seed=seed, k=k)
        elif parameter == "k":
            rep = run_benchmark(dataset, layout_name=layout_name,
                                threshold=threshold, seed=seed, k=int(v))
        elif parameter == "f2":
            f2 = float("inf") if v in ("inf", math.inf) else float(v)
            rep = run_benchmark(dataset, layout_name=layout_name,
                                threshold=threshold, seed=seed, k=k, f2=f2)
        else:
            raise ValueError("parameter must be one of layout, k, f2")
        reports.append(rep)
    return reports
