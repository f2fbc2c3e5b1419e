"""File formats: PNG for images, PGM (P5) for masks and quantized channels,
16-bit PGM + JSON sidecar for superpixel label grids, and RLE-in-JSON for
proposal supports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .core import GuidanceChannel


def read_image_png(path) -> np.ndarray:
    img = Image.open(path).convert("RGB")
    return np.asarray(img, dtype=np.uint8)


def write_image_png(path, image: np.ndarray) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def read_mask_png(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"))
    return arr > 127


def write_mask_png(path, mask: np.ndarray) -> None:
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def write_pgm(path, values: np.ndarray) -> None:
    """Write an 8-bit or 16-bit binary PGM (P5)."""
    v = np.asarray(values)
    if v.dtype == np.uint8:
        maxval = 255
        payload = v.tobytes()
    elif v.dtype == np.uint16:
        maxval = 65535
        payload = v.astype(">u2").tobytes()
    else:
        raise ValueError("PGM values must be uint8 or uint16")
    h, w = v.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(payload)


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    # header: magic, width, height, maxval, separated by whitespace/comments
    tokens = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM (P5) file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    i += 1  # single whitespace after maxval
    if maxval <= 255:
        arr = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=i)
    else:
        arr = np.frombuffer(data, dtype=">u2", count=w * h, offset=i).astype(np.uint16)
    return arr.reshape(h, w)


def write_mask_pgm(path, mask: np.ndarray) -> None:
    write_pgm(path, np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8))


def read_mask_pgm(path) -> np.ndarray:
    return read_pgm(path) > 127


def write_channel_pgm(path, channel: GuidanceChannel) -> None:
    write_pgm(path, channel.to_uint8())


def channel_to_png_bytes(channel: GuidanceChannel) -> bytes:
    import io as _io
    buf = _io.BytesIO()
    Image.fromarray(channel.to_uint8(), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_to_png_bytes(mask: np.ndarray) -> bytes:
    import io as _io
    buf = _io.BytesIO()
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def write_partition(path_prefix, partition) -> None:
    """Label grid as 16-bit PGM plus a JSON sidecar with the bookkeeping."""
    prefix = Path(path_prefix)
    if partition.count > 65535:
        raise ValueError("too many superpixels for a 16-bit label grid")
    write_pgm(prefix.with_suffix(".pgm"), partition.labels.astype(np.uint16))
    sidecar = {
        "count": partition.count,
        "centroids": [[float(x), float(y)] for x, y in partition.centroids],
        "sizes": [int(s) for s in partition.sizes],
    }
    prefix.with_suffix(".json").write_text(json.dumps(sidecar))


def rle_encode(mask: np.ndarray) -> list:
    """Row-major run lengths, starting with a background run (possibly 0)."""
    flat = np.asarray(mask, dtype=bool).ravel()
    runs = []
    val = False
    run = 0
    for bit in flat:
        if bit == val:
            run += 1
        else:
            runs.append(run)
            val = bit
            run = 1
    runs.append(run)
    return runs


def rle_decode(runs, shape) -> np.ndarray:
    total = int(np.prod(shape))
    flat = np.zeros(total, dtype=bool)
    pos = 0
    val = False
    for run in runs:
        if val:
            flat[pos:pos + run] = True
        pos += run
        val = not val
    if pos != total:
        raise ValueError("run lengths do not cover the grid")
    return flat.reshape(shape)


def proposals_to_json(pset) -> str:
    h, w = pset.source_partition.labels.shape
    payload = {
        "width": w,
        "height": h,
        "proposals": [
            {"area": p.area, "rle": rle_encode(p.support)} for p in pset.proposals
        ],
    }
    return json.dumps(payload)
