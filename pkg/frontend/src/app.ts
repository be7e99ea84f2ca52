import { ApiClient } from "./api.js";
import { InspectorController } from "./controller.js";
import { magnifierSourceRect } from "./magnifier.js";
import { ModelViewer } from "./viewer.js";
import { parseObj } from "./obj.js";
import type { Mode } from "./modes.js";
import type { Pixel } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

/** Wire the controller to the DOM. */
export async function boot(baseUrl = ""): Promise<InspectorController> {
  const api = new ApiClient(baseUrl);
  const controller = new InspectorController(api);
  const canvas = el<HTMLCanvasElement>("model-canvas");
  const imageCanvas = el<HTMLCanvasElement>("image-canvas");
  const toastBox = el<HTMLDivElement>("toasts");
  const readout = el<HTMLDivElement>("readout");
  const viewer = new ModelViewer(canvas, controller.camera);

  let keyframeImage: HTMLImageElement | null = null;
  let shownKeyframe: number | null = null;

  function markers() {
    const out: { p: [number, number, number]; label?: string; color: string }[] = [];
    if (controller.lastPick) {
      out.push({ p: controller.lastPick.vertex, color: "#ffcc00" });
    }
    controller.wizard.modelPoints.forEach((p, i) =>
      out.push({ p, label: String(i + 1), color: "#4fc3f7" }),
    );
    return out;
  }

  function drawImagePanel() {
    const ctx = imageCanvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, imageCanvas.width, imageCanvas.height);
    if (!keyframeImage) return;
    ctx.drawImage(keyframeImage, 0, 0);
    ctx.fillStyle = "#4fc3f7";
    controller.wizard.imagePoints.forEach(([u, v], i) => {
      ctx.beginPath();
      ctx.arc(u, v, 5, 0, Math.PI * 2);
      ctx.fill();
      ctx.fillText(String(i + 1), u + 7, v - 7);
    });
    if (controller.pendingMeasureClick) {
      const [u, v] = controller.pendingMeasureClick;
      ctx.strokeStyle = "#ff5252";
      ctx.beginPath();
      ctx.arc(u, v, 5, 0, Math.PI * 2);
      ctx.stroke();
    }
    if (controller.lastMeasure) {
      const { p1, p2 } = controller.lastMeasure;
      ctx.strokeStyle = "#ff5252";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(p1[0], p1[1]);
      ctx.lineTo(p2[0], p2[1]);
      ctx.stroke();
      const corners = controller.lastMeasure.scale_used.window_corners;
      ctx.strokeStyle = "rgba(80,255,120,0.8)";
      ctx.beginPath();
      corners.forEach(([u, v], i) => (i ? ctx.lineTo(u, v) : ctx.moveTo(u, v)));
      ctx.closePath();
      ctx.stroke();
    }
    if (controller.magnifierActive() && controller.cursor) {
      drawMagnifier(ctx, controller.cursor);
    }
  }

  function drawMagnifier(ctx: CanvasRenderingContext2D, cursor: Pixel) {
    if (!keyframeImage) return;
    const cfg = controller.magnifier;
    const src = magnifierSourceRect(cursor[0], cursor[1], cfg);
    ctx.save();
    ctx.beginPath();
    ctx.arc(cursor[0], cursor[1], cfg.radiusPx, 0, Math.PI * 2);
    ctx.clip();
    ctx.drawImage(
      keyframeImage,
      src.x,
      src.y,
      src.size,
      src.size,
      cursor[0] - cfg.radiusPx,
      cursor[1] - cfg.radiusPx,
      2 * cfg.radiusPx,
      2 * cfg.radiusPx,
    );
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.stroke();
    // crosshair at the exact click position
    ctx.beginPath();
    ctx.moveTo(cursor[0] - 8, cursor[1]);
    ctx.lineTo(cursor[0] + 8, cursor[1]);
    ctx.moveTo(cursor[0], cursor[1] - 8);
    ctx.lineTo(cursor[0], cursor[1] + 8);
    ctx.strokeStyle = "#ff5252";
    ctx.lineWidth = 1;
    ctx.stroke();
    ctx.restore();
  }

  function refreshKeyframeImage() {
    if (controller.displayedKeyframe === shownKeyframe) return;
    shownKeyframe = controller.displayedKeyframe;
    if (shownKeyframe === null) {
      keyframeImage = null;
      return;
    }
    const img = new Image();
    img.onload = () => {
      keyframeImage = img;
      imageCanvas.width = img.naturalWidth;
      imageCanvas.height = img.naturalHeight;
      drawImagePanel();
    };
    img.src = controller.keyframeImageUrl(shownKeyframe);
  }

  function renderReadout() {
    const lines: string[] = [`mode: ${controller.view.mode}`];
    if (controller.displayedKeyframe !== null) lines.push(`keyframe: ${controller.displayedKeyframe}`);
    if (controller.lastMeasure) {
      lines.push(
        `distance: ${controller.lastMeasure.meters.toFixed(4)} m ` +
          `(window #${controller.lastMeasure.scale_used.index}, ` +
          `${controller.lastMeasure.scale_used.pixels_per_meter.toFixed(2)} px/m)`,
      );
    }
    if (controller.alignmentResidual !== null) {
      lines.push(`alignment residual: ${controller.alignmentResidual.toExponential(3)} m`);
    }
    if (controller.view.mode === "register") {
      const w = controller.wizard;
      lines.push(
        w.phase === "model"
          ? `wizard: click model corner ${w.modelPoints.length + 1} of 4`
          : w.phase === "image"
            ? `wizard: click image corner ${w.imagePoints.length + 1} of 4`
            : `wizard: ${w.phase}`,
      );
    }
    readout.textContent = lines.join("  |  ");
  }

  function renderToasts() {
    toastBox.innerHTML = "";
    for (const toast of controller.toasts.slice(-3)) {
      const div = document.createElement("div");
      div.className = `toast ${toast.kind}`;
      div.textContent = toast.text;
      toastBox.appendChild(div);
    }
  }

  async function enterTextureBrowse() {
    try {
      const text = await api.modelObj(true);
      const mesh = parseObj(text);
      const groups = [...new Set(mesh.groups)].filter(Boolean);
      const images = new Map<string, { img: CanvasImageSource; width: number; height: number }>();
      await Promise.all(
        groups.map(
          (g) =>
            new Promise<void>((resolve) => {
              const img = new Image();
              img.onload = () => {
                images.set(g, { img, width: img.naturalWidth, height: img.naturalHeight });
                resolve();
              };
              img.onerror = () => resolve(); // untextured group: flat shading
              img.src = api.textureUrl(g);
            }),
        ),
      );
      viewer.setTextures(mesh, images);
    } catch (err) {
      controller.toasts.push({ kind: "error", text: String(err) });
    }
  }

  controller.subscribe(() => {
    refreshKeyframeImage();
    viewer.render(controller.mesh, markers(), controller.view.mode === "texture-browse");
    drawImagePanel();
    renderReadout();
    renderToasts();
  });

  for (const mode of ["register", "query", "measure", "texture-browse"] as Mode[]) {
    el<HTMLButtonElement>(`mode-${mode}`).addEventListener("click", async () => {
      if (mode === "texture-browse") await enterTextureBrowse();
      controller.setMode(mode);
    });
  }

  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    void controller.clickModel(ev.clientX - rect.left, ev.clientY - rect.top, canvas.width, canvas.height);
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    controller.camera.zoom(ev.deltaY > 0 ? 1.1 : 0.9);
    viewer.render(controller.mesh, markers(), controller.view.mode === "texture-browse");
  });
  let dragging = false;
  let last: Pixel = [0, 0];
  canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    last = [ev.clientX, ev.clientY];
  });
  window.addEventListener("mouseup", () => (dragging = false));
  canvas.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    controller.camera.orbit((ev.clientX - last[0]) * 0.01, (ev.clientY - last[1]) * 0.01);
    last = [ev.clientX, ev.clientY];
    viewer.render(controller.mesh, markers(), controller.view.mode === "texture-browse");
  });

  imageCanvas.addEventListener("click", (ev) => {
    const rect = imageCanvas.getBoundingClientRect();
    const scaleX = imageCanvas.width / rect.width;
    const scaleY = imageCanvas.height / rect.height;
    void controller.clickImage((ev.clientX - rect.left) * scaleX, (ev.clientY - rect.top) * scaleY);
  });
  imageCanvas.addEventListener("mousemove", (ev) => {
    const rect = imageCanvas.getBoundingClientRect();
    const scaleX = imageCanvas.width / rect.width;
    const scaleY = imageCanvas.height / rect.height;
    controller.moveCursor((ev.clientX - rect.left) * scaleX, (ev.clientY - rect.top) * scaleY);
    drawImagePanel();
  });

  await controller.init();
  return controller;
}
