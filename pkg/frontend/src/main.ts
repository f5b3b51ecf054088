/**
 * Browser entry point: wires pointer events and buttons to an editing
 * session and redraws from service deltas.
 *
 * - click on empty canvas: insert a point
 * - drag a red point: throttled move requests carrying the current revision
 * - Close button: close the curve into a loop
 * - Ctrl+Z: undo
 * - comb checkbox: overlay the curvature comb
 */

import { CombData, ServiceClient } from "./api.js";
import { drawScene, fitTransform, toScreen, toWorld, ViewTransform } from "./render.js";
import { EditorSession } from "./session.js";

const HIT_RADIUS_PX = 10;

function showBanner(text: string | null): void {
  const banner = document.getElementById("banner")!;
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

async function start(): Promise<void> {
  const canvas = document.getElementById("editor") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const combToggle = document.getElementById("comb-toggle") as HTMLInputElement;
  const closeButton = document.getElementById("close-button") as HTMLButtonElement;
  const status = document.getElementById("status")!;

  const client = new ServiceClient("");
  const session = await EditorSession.create(client, "C2");

  let view: ViewTransform = fitTransform([], canvas.width, canvas.height);
  let comb: CombData | null = null;
  let selectedPoint: number | null = null;
  let dragGhost: number[] | null = null;
  let frozen = false;

  function redraw(): void {
    drawScene(ctx, view, session.segments, session.points, {
      comb: combToggle.checked ? comb : null,
      selectedPoint,
      dragGhost,
    });
    if (session.segments.length === 0) {
      ctx.fillStyle = "#666666";
      ctx.font = "14px sans-serif";
      ctx.fillText("Click to place points; a curve appears after the third.", 16, 28);
    }
  }

  async function refreshComb(): Promise<void> {
    if (!combToggle.checked || session.segments.length === 0) {
      comb = null;
      return;
    }
    try {
      comb = await client.getComb(session.docId, 0.1);
    } catch {
      comb = null;
    }
  }

  session.onFrame((frame) => {
    view = fitTransform(frame.points, canvas.width, canvas.height);
    status.textContent =
      `revision ${frame.revision} - ${frame.segments.length} segments` +
      ` - ${frame.topology}`;
    void refreshComb().then(redraw);
  });

  function hitPoint(x: number, y: number): number | null {
    for (let i = 0; i < session.points.length; i++) {
      const s = toScreen(view, session.points[i]);
      if (Math.hypot(s[0] - x, s[1] - y) <= HIT_RADIUS_PX) return i;
    }
    return null;
  }

  async function guard<T>(action: () => Promise<T>): Promise<void> {
    if (frozen) return;
    try {
      await action();
      showBanner(null);
    } catch (error) {
      if (error instanceof TypeError) {
        // network failure: banner + freeze input until the service answers
        frozen = true;
        showBanner("Connection lost - reconnecting...");
        const poll = setInterval(() => {
          void client
            .getDoc(session.docId)
            .then(() => {
              clearInterval(poll);
              frozen = false;
              showBanner(null);
              void session.refetch();
            })
            .catch(() => undefined);
        }, 1000);
      } else {
        showBanner(String(error));
      }
    }
  }

  canvas.addEventListener("pointerdown", (event) => {
    const hit = hitPoint(event.offsetX, event.offsetY);
    if (hit !== null) {
      selectedPoint = hit;
      canvas.setPointerCapture(event.pointerId);
    }
    redraw();
  });

  canvas.addEventListener("pointermove", (event) => {
    if (selectedPoint === null) return;
    const world = toWorld(view, event.offsetX, event.offsetY);
    dragGhost = world;
    redraw();
    void guard(() => session.movePoint(selectedPoint!, world));
  });

  canvas.addEventListener("pointerup", (event) => {
    if (selectedPoint === null) {
      const world = toWorld(view, event.offsetX, event.offsetY);
      void guard(() => session.insertPoint(world));
    }
    selectedPoint = null;
    dragGhost = null;
    redraw();
  });

  closeButton.addEventListener("click", () => {
    void guard(() => session.closeCurve());
  });

  combToggle.addEventListener("change", () => {
    void refreshComb().then(redraw);
  });

  window.addEventListener("keydown", (event) => {
    if (event.ctrlKey && event.key.toLowerCase() === "z") {
      event.preventDefault();
      void guard(() => session.undo());
    }
  });

  redraw();
}

if (typeof document !== "undefined") {
  void start();
}
