/**
 * Canvas rendering: segments as dense polylines, red interpolation points,
 * yellow joint markers, optional pink curvature comb.
 *
 * Geometry is never computed here beyond sampling the service-provided
 * control points for display.
 */

import { CombData, Segment } from "./api.js";

export const CURVE_COLOR = "#222222";
export const POINT_COLOR = "#d62728";
export const JOINT_COLOR = "#e6c719";
export const COMB_COLOR = "#f279c0";

export const SAMPLES_PER_SEGMENT = 64;

/** De Casteljau evaluation of one Bezier segment (display sampling only). */
export function evalBezier(controlPoints: number[][], t: number): [number, number] {
  let xs = controlPoints.map((p) => p[0]);
  let ys = controlPoints.map((p) => p[1]);
  for (let r = xs.length - 1; r > 0; r--) {
    const nx = new Array<number>(r);
    const ny = new Array<number>(r);
    for (let i = 0; i < r; i++) {
      nx[i] = (1 - t) * xs[i] + t * xs[i + 1];
      ny[i] = (1 - t) * ys[i] + t * ys[i + 1];
    }
    xs = nx;
    ys = ny;
  }
  return [xs[0], ys[0]];
}

export function segmentPolyline(segment: Segment, samples = SAMPLES_PER_SEGMENT): number[][] {
  const pts: number[][] = [];
  for (let i = 0; i < samples; i++) {
    pts.push(evalBezier(segment.control_points, i / (samples - 1)));
  }
  return pts;
}

/**
 * Per-segment display-path cache. After a delta touching segment indices S,
 * only the paths for S (plus removals) are rebuilt; untouched segments keep
 * their existing path objects.
 */
export class PathCache<T> {
  private paths: T[] = [];
  /** Indices rebuilt by the most recent update (for tests/diagnostics). */
  lastRebuilt: number[] = [];

  constructor(private readonly build: (segment: Segment) => T) {}

  update(segments: Segment[], changedIndices: number[]): T[] {
    this.lastRebuilt = [];
    for (const i of changedIndices) {
      if (i < segments.length) {
        this.paths[i] = this.build(segments[i]);
        this.lastRebuilt.push(i);
      }
    }
    this.paths.length = segments.length;
    return this.paths;
  }
}

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Fit the document bounding box into the canvas with a margin (y up). */
export function fitTransform(
  points: number[][],
  width: number,
  height: number,
  margin = 40,
): ViewTransform {
  if (points.length === 0) return { scale: 1, offsetX: 0, offsetY: height };
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const lo = [Math.min(...xs), Math.min(...ys)];
  const hi = [Math.max(...xs), Math.max(...ys)];
  const span = Math.max(hi[0] - lo[0], hi[1] - lo[1], 1e-9);
  const scale = (Math.min(width, height) - 2 * margin) / span;
  return {
    scale,
    offsetX: margin - lo[0] * scale,
    offsetY: height - margin + lo[1] * scale,
  };
}

export function toScreen(view: ViewTransform, p: number[]): [number, number] {
  return [p[0] * view.scale + view.offsetX, view.offsetY - p[1] * view.scale];
}

export function toWorld(view: ViewTransform, x: number, y: number): [number, number] {
  return [(x - view.offsetX) / view.scale, (view.offsetY - y) / view.scale];
}

export interface SceneOptions {
  comb?: CombData | null;
  selectedPoint?: number | null;
  dragGhost?: number[] | null;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  segments: Segment[],
  points: number[][],
  options: SceneOptions = {},
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  if (options.comb) {
    ctx.strokeStyle = COMB_COLOR;
    ctx.lineWidth = 1;
    for (let i = 0; i < options.comb.base_points.length; i++) {
      const a = toScreen(view, options.comb.base_points[i]);
      const b = toScreen(view, options.comb.tip_points[i]);
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.stroke();
    }
  }

  ctx.strokeStyle = CURVE_COLOR;
  ctx.lineWidth = 2;
  for (const segment of segments) {
    const poly = segmentPolyline(segment);
    ctx.beginPath();
    poly.forEach((p, i) => {
      const s = toScreen(view, p);
      if (i === 0) ctx.moveTo(s[0], s[1]);
      else ctx.lineTo(s[0], s[1]);
    });
    ctx.stroke();
  }

  ctx.fillStyle = JOINT_COLOR;
  for (let i = 1; i < segments.length; i++) {
    const s = toScreen(view, segments[i].control_points[0]);
    ctx.beginPath();
    ctx.arc(s[0], s[1], 4, 0, 2 * Math.PI);
    ctx.fill();
  }

  points.forEach((p, i) => {
    const s = toScreen(view, p);
    ctx.fillStyle = POINT_COLOR;
    ctx.beginPath();
    ctx.arc(s[0], s[1], i === options.selectedPoint ? 7 : 5, 0, 2 * Math.PI);
    ctx.fill();
  });

  if (options.dragGhost) {
    const s = toScreen(view, options.dragGhost);
    ctx.strokeStyle = POINT_COLOR;
    ctx.setLineDash([3, 3]);
    ctx.beginPath();
    ctx.arc(s[0], s[1], 7, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}
