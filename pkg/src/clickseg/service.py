"""HTTP session API for the browser UI: upload an image, post clicks, fetch
the predicted mask and individual guidance channels.

Superpixels and proposals are computed once per session at upload; each
click only recomputes guidance and the prediction. Undo replays the
remaining click sequence from scratch so the previous-mask channel chain
stays identical to a fresh session with the same clicks.
"""

from __future__ import annotations

import io as _io
import secrets
import threading
import time

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from PIL import Image

from .core import ChannelKind
from .guidance import DEFAULT_LAYOUT, ClickSet, assemble_stack
from .interaction import estimate_scale, make_reference_segmenter
from .io import channel_to_png_bytes, mask_to_png_bytes
from .proposals import generate_proposals
from .superpixels import slic

DEFAULT_K = 1000
DEFAULT_MAX_BYTES = 8 * 1024 * 1024


class Session:
    """Single-writer per-session state; the lock serializes click posts."""

    def __init__(self, sid, image, partition, pset, segmenter):
        self.id = sid
        self.created_at = time.time()
        self.image = image
        self.partition = partition
        self.pset = pset
        self.segmenter = segmenter
        self.click_log = []  # (x, y, positive) in arrival order
        self.mask = np.zeros(image.shape[:2], dtype=bool)
        self.prev_mask = None
        self.scale = None
        self.lock = threading.Lock()

    @property
    def clicks(self) -> ClickSet:
        pos = tuple((x, y) for x, y, p in self.click_log if p)
        neg = tuple((x, y) for x, y, p in self.click_log if not p)
        return ClickSet(pos, neg)

    def _update_scale(self):
        c = self.clicks
        self.scale = None
        if c.positives and c.negatives and c.positives[0] != c.negatives[0]:
            self.scale = estimate_scale(c.positives[0], c.negatives[0])

    def _predict_once(self):
        stack = assemble_stack(self.image, self.partition, self.pset,
                               self.clicks, scale=self.scale,
                               prev_mask=self.prev_mask,
                               layout=DEFAULT_LAYOUT,
                               allow_scale_fallback=True)
        self.mask = self.segmenter.predict(self.image, stack)
        self.prev_mask = self.mask

    def add_click(self, x, y, positive):
        self.click_log.append((x, y, positive))
        self._update_scale()
        self._predict_once()

    def undo(self):
        if not self.click_log:
            raise ValueError("no clicks to undo")
        log = self.click_log[:-1]
        self.click_log = []
        self.mask = np.zeros(self.image.shape[:2], dtype=bool)
        self.prev_mask = None
        self._update_scale()
        for (x, y, positive) in log:
            self.add_click(x, y, positive)

    def channel(self, kind: ChannelKind):
        stack = assemble_stack(self.image, self.partition, self.pset,
                               self.clicks, scale=self.scale,
                               prev_mask=self.prev_mask,
                               layout=(kind,), allow_scale_fallback=True)
        return stack.channels[0]

    def summary(self):
        h, w = self.image.shape[:2]
        return {
            "id": self.id,
            "created_at": self.created_at,
            "width": w,
            "height": h,
            "clicks": [{"x": x, "y": y,
                        "polarity": "pos" if p else "neg"}
                       for x, y, p in self.click_log],
            "scale": None if self.scale is None else {
                "s": self.scale.s, "f": self.scale.f,
                "f1": self.scale.f1, "f2": self.scale.f2,
            },
        }


def create_app(k: int = DEFAULT_K, compactness: float = 10.0,
               max_bytes: int = DEFAULT_MAX_BYTES,
               idle_timeout: float = 3600.0) -> FastAPI:
    app = FastAPI(title="clickseg session service")
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()

    def get_session(sid: str) -> Session:
        with sessions_lock:
            sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return sess

    def expire_idle():
        now = time.time()
        with sessions_lock:
            stale = [sid for sid, s in sessions.items()
                     if now - s.created_at > idle_timeout]
            for sid in stale:
                del sessions[sid]

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.body()
        if len(body) > max_bytes:
            raise HTTPException(status_code=413, detail="payload too large")
        try:
            img = Image.open(_io.BytesIO(body))
            img.verify()
            img = Image.open(_io.BytesIO(body)).convert("RGB")
        except Exception:
            raise HTTPException(status_code=400, detail="could not decode PNG")
        image = np.asarray(img, dtype=np.uint8)
        expire_idle()
        n = image.shape[0] * image.shape[1]
        partition = slic(image, k=min(k, n), compactness=compactness)
        pset = generate_proposals(image, partition)
        segmenter = make_reference_segmenter(image, partition)
        sid = secrets.token_hex(8)
        sess = Session(sid, image, partition, pset, segmenter)
        with sessions_lock:
            sessions[sid] = sess
        return {"id": sid, "width": image.shape[1], "height": image.shape[0]}

    @app.get("/sessions/{sid}")
    def session_info(sid: str):
        return get_session(sid).summary()

    @app.post("/sessions/{sid}/clicks")
    async def post_click(sid: str, payload: dict):
        sess = get_session(sid)
        try:
            x, y = int(payload["x"]), int(payload["y"])
            polarity = payload["polarity"]
        except (KeyError, TypeError, ValueError):
            raise HTTPException(status_code=422,
                                detail="payload needs integer x, y and polarity")
        if polarity not in ("pos", "neg"):
            raise HTTPException(status_code=422, detail="polarity must be pos or neg")
        h, w = sess.image.shape[:2]
        if not (0 <= x < w and 0 <= y < h):
            raise HTTPException(status_code=422, detail="click out of bounds")
        with sess.lock:
            sess.add_click(x, y, polarity == "pos")
            return {"clicks": len(sess.click_log),
                    "mask_url": f"/sessions/{sid}/mask"}

    @app.delete("/sessions/{sid}/clicks/last")
    def undo_click(sid: str):
        sess = get_session(sid)
        with sess.lock:
            try:
                sess.undo()
            except ValueError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return {"clicks": len(sess.click_log)}

    @app.get("/sessions/{sid}/mask")
    def get_mask(sid: str):
        sess = get_session(sid)
        return Response(content=mask_to_png_bytes(sess.mask),
                        media_type="image/png")

    @app.get("/sessions/{sid}/channels/{kind}")
    def get_channel(sid: str, kind: str):
        sess = get_session(sid)
        try:
            ck = ChannelKind(kind)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"unknown channel kind {kind}")
        channel = sess.channel(ck)
        return Response(content=channel_to_png_bytes(channel),
                        media_type="image/png")

    return app
