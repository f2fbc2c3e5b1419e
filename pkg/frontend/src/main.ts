/**
 * DOM wiring for the interactive segmentation workbench.
 *
 * Layout: a file picker, the main canvas (image + overlay + markers), a
 * channel inspector canvas beside it, polarity toggle, undo button, and an
 * overlay opacity slider. Plain click = positive, Shift/Alt+click =
 * negative (or flip the toggle).
 */

import { SessionClient } from "./api";
import { SessionController } from "./controller";
import { DrawRect, drawMarkers, drawOverlay } from "./overlay";
import { canvasToImage, polarityFor, setNegativeMode, setOpacity, setOverlay } from "./state";
import { CHANNEL_KINDS } from "./types";

const SERVER_URL = (window as any).CLICKSEG_SERVER ?? "http://localhost:8000";

const client = new SessionClient(SERVER_URL);
const controller = new SessionController(client, showToast);

let imageBitmap: ImageBitmap | null = null;
let overlayBitmap: ImageBitmap | null = null;
let channelBitmap: ImageBitmap | null = null;

const canvas = document.getElementById("view") as HTMLCanvasElement;
const channelCanvas = document.getElementById("channel-view") as HTMLCanvasElement;
const fileInput = document.getElementById("image-file") as HTMLInputElement;
const undoButton = document.getElementById("undo") as HTMLButtonElement;
const negToggle = document.getElementById("negative-mode") as HTMLInputElement;
const opacitySlider = document.getElementById("opacity") as HTMLInputElement;
const channelSelect = document.getElementById("channel-kind") as HTMLSelectElement;
const toast = document.getElementById("toast") as HTMLDivElement;

for (const kind of CHANNEL_KINDS) {
  const opt = document.createElement("option");
  opt.value = kind;
  opt.textContent = kind;
  channelSelect.appendChild(opt);
}

function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  window.setTimeout(() => toast.classList.remove("visible"), 4000);
}

/** Rectangle the image occupies on the canvas (letterboxed, centered). */
function imageRect(): DrawRect {
  const { imageWidth, imageHeight } = controller.state;
  if (!imageWidth || !imageHeight) return { x: 0, y: 0, width: 0, height: 0 };
  const scale = Math.min(canvas.width / imageWidth, canvas.height / imageHeight);
  const width = imageWidth * scale;
  const height = imageHeight * scale;
  return { x: (canvas.width - width) / 2, y: (canvas.height - height) / 2, width, height };
}

function render(): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const rect = imageRect();
  if (imageBitmap) ctx.drawImage(imageBitmap, rect.x, rect.y, rect.width, rect.height);
  if (overlayBitmap) drawOverlay(ctx, overlayBitmap, rect, controller.state.overlayOpacity);
  drawMarkers(ctx, controller.state.markers, rect,
    controller.state.imageWidth, controller.state.imageHeight);

  const cctx = channelCanvas.getContext("2d");
  if (cctx) {
    cctx.clearRect(0, 0, channelCanvas.width, channelCanvas.height);
    if (channelBitmap) {
      cctx.drawImage(channelBitmap, 0, 0, channelCanvas.width, channelCanvas.height);
    }
  }
}

async function bitmapFromPng(bytes: ArrayBuffer): Promise<ImageBitmap> {
  return createImageBitmap(new Blob([bytes], { type: "image/png" }));
}

async function refreshOverlays(): Promise<void> {
  const sid = controller.state.sessionId;
  if (!sid) return;
  try {
    overlayBitmap = await bitmapFromPng(await client.fetchMask(sid));
    const kind = channelSelect.value || "sp_pos_scaled";
    channelBitmap = await bitmapFromPng(await client.fetchChannel(sid, kind));
  } catch (err) {
    showToast(String(err));
  }
  render();
}

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  try {
    await controller.openSession(file);
    imageBitmap = await createImageBitmap(file);
    await refreshOverlays();
  } catch (err) {
    showToast(String(err));
  }
});

canvas.addEventListener("click", async (ev: MouseEvent) => {
  if (!controller.state.sessionId) return;
  const bounds = canvas.getBoundingClientRect();
  const pixel = canvasToImage(
    ((ev.clientX - bounds.left) / bounds.width) * canvas.width,
    ((ev.clientY - bounds.top) / bounds.height) * canvas.height,
    imageRect(), controller.state.imageWidth, controller.state.imageHeight);
  if (!pixel) return; // clicks outside the image area are ignored
  const polarity = polarityFor(controller.state, ev.shiftKey || ev.altKey);
  await controller.placeClick(pixel.x, pixel.y, polarity);
  await refreshOverlays();
});

undoButton.addEventListener("click", async () => {
  await controller.undo();
  await refreshOverlays();
});

negToggle.addEventListener("change", () => {
  controller.state = setNegativeMode(controller.state, negToggle.checked);
});

opacitySlider.addEventListener("input", () => {
  controller.state = setOpacity(controller.state, Number(opacitySlider.value) / 100);
  render();
});

channelSelect.addEventListener("change", async () => {
  controller.state = setOverlay(controller.state,
    { kind: "channel", channel: channelSelect.value as any });
  await refreshOverlays();
});
