/**
 * Canvas overlay: grayscale image, contour polyline, seed and helper
 * markers, and the two diameter chords with length labels. Pure function of
 * (view, viewport): zoom and pan are applied per call, so they survive any
 * number of contour updates. The geometry drawn is exactly what the last
 * protocol reply carried.
 */

import type { ViewState } from "./viewstate.js";

export interface Viewport {
  scale: number;
  panX: number;
  panY: number;
}

export const IDENTITY_VIEWPORT: Viewport = { scale: 1, panX: 0, panY: 0 };

/** Structural subset of CanvasRenderingContext2D the renderer needs. */
export interface Canvas2DLike {
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillText(text: string, x: number, y: number): void;
  drawImage?(image: unknown, dx: number, dy: number, dw: number, dh: number): void;
}

function label(px: number, mm: number | null): string {
  return mm !== null ? `${mm.toFixed(1)} mm` : `${px.toFixed(1)} px`;
}

export function renderOverlay(
  ctx: Canvas2DLike,
  view: ViewState,
  viewport: Viewport = IDENTITY_VIEWPORT,
  image?: unknown,
): void {
  const tx = (x: number) => x * viewport.scale + viewport.panX;
  const ty = (y: number) => y * viewport.scale + viewport.panY;

  if (image !== undefined && ctx.drawImage) {
    ctx.drawImage(
      image,
      viewport.panX,
      viewport.panY,
      view.imageWidth * viewport.scale,
      view.imageHeight * viewport.scale,
    );
  }

  if (view.seed === null) {
    return; // image only until a seed exists
  }

  const contour = view.contour;
  if (contour !== null) {
    ctx.strokeStyle = "#ffd400"; // outline
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    const v = contour.vertices;
    ctx.moveTo(tx(v[0][0]), ty(v[0][1]));
    for (let i = 1; i < v.length; i++) {
      ctx.lineTo(tx(v[i][0]), ty(v[i][1]));
    }
    ctx.closePath();
    ctx.stroke();

    ctx.strokeStyle = "#27e0ff";
    ctx.lineWidth = 1.0;
    for (const [p, q] of [contour.endpoints_a, contour.endpoints_b]) {
      ctx.beginPath();
      ctx.moveTo(tx(p[0]), ty(p[1]));
      ctx.lineTo(tx(q[0]), ty(q[1]));
      ctx.stroke();
    }
    ctx.fillStyle = "#27e0ff";
    ctx.font = "12px sans-serif";
    const [a1, a2] = contour.endpoints_a;
    ctx.fillText(
      label(contour.diameter_a_px, contour.diameter_a_mm),
      tx((a1[0] + a2[0]) / 2),
      ty((a1[1] + a2[1]) / 2),
    );
    const [b1, b2] = contour.endpoints_b;
    ctx.fillText(
      label(contour.diameter_b_px, contour.diameter_b_mm),
      tx((b1[0] + b2[0]) / 2),
      ty((b1[1] + b2[1]) / 2),
    );
  }

  // seed crosshair
  ctx.strokeStyle = "#ff3b30";
  ctx.lineWidth = 1.5;
  const [sx, sy] = view.seed;
  const arm = 5;
  ctx.beginPath();
  ctx.moveTo(tx(sx) - arm, ty(sy));
  ctx.lineTo(tx(sx) + arm, ty(sy));
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(tx(sx), ty(sy) - arm);
  ctx.lineTo(tx(sx), ty(sy) + arm);
  ctx.stroke();

  // helper markers
  ctx.fillStyle = "#34c759";
  for (const [hx, hy] of view.helpers) {
    ctx.beginPath();
    ctx.arc(tx(hx), ty(hy), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}
