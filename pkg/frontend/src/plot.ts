// Canvas rendering. Data coordinates are the service's normalized values;
// the affine map to pixels is the only client-side transform and it is
// exactly invertible.

import { DecodeResponse, Point } from './api.js';

// fixed axes so traversal motion is comparable across frames
export const VIEW_LO = -1.05;
export const VIEW_HI = 1.05;

export interface AffineMap {
  toPixel(p: Point): Point;
  toData(p: Point): Point;
}

export function makeAffine(width: number, height: number): AffineMap {
  const span = VIEW_HI - VIEW_LO;
  const sx = width / span;
  const sy = height / span;
  return {
    toPixel: ([x, y]) => [(x - VIEW_LO) * sx, (VIEW_HI - y) * sy],
    toData: ([px, py]) => [px / sx + VIEW_LO, VIEW_HI - py / sy],
  };
}

function polyline(ctx: CanvasRenderingContext2D, pts: Point[], map: AffineMap,
                  stroke: string, width = 1.5): void {
  if (pts.length === 0) {
    return;
  }
  ctx.strokeStyle = stroke;
  ctx.lineWidth = width;
  ctx.beginPath();
  const [x0, y0] = map.toPixel(pts[0]);
  ctx.moveTo(x0, y0);
  for (const p of pts.slice(1)) {
    const [x, y] = map.toPixel(p);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function marker(ctx: CanvasRenderingContext2D, p: Point, map: AffineMap,
                fill: string): void {
  const [x, y] = map.toPixel(p);
  ctx.fillStyle = fill;
  ctx.beginPath();
  ctx.arc(x, y, 4, 0, 2 * Math.PI);
  ctx.fill();
}

/**
 * Draw both trajectories with green start / red end markers, light
 * connecting lines at matched time indices, and a playback cursor.
 */
export function drawEncounter(ctx: CanvasRenderingContext2D, enc: DecodeResponse,
                              width: number, height: number, playbackIndex = -1): void {
  const map = makeAffine(width, height);
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#fcfcfc';
  ctx.fillRect(0, 0, width, height);

  ctx.strokeStyle = '#e4e4e4';
  ctx.lineWidth = 0.5;
  for (let t = 0; t < enc.s1.length; t++) {
    const [ax, ay] = map.toPixel(enc.s1[t]);
    const [bx, by] = map.toPixel(enc.s2[t]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }

  polyline(ctx, enc.s1, map, '#4c78a8');
  polyline(ctx, enc.s2, map, '#f58518');
  for (const seq of [enc.s1, enc.s2]) {
    marker(ctx, seq[0], map, '#2ca02c');
    marker(ctx, seq[seq.length - 1], map, '#d62728');
  }
  if (playbackIndex >= 0 && playbackIndex < enc.s1.length) {
    marker(ctx, enc.s1[playbackIndex], map, '#111111');
    marker(ctx, enc.s2[playbackIndex], map, '#111111');
  }
}

/** Mini profile plot (distance / speed / direction) on its own canvas. */
export function drawProfile(ctx: CanvasRenderingContext2D, values: number[],
                            width: number, height: number, stroke: string): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#fcfcfc';
  ctx.fillRect(0, 0, width, height);
  if (values.length === 0) {
    return;
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo < 1e-12 ? 1e-12 : hi - lo;
  ctx.strokeStyle = stroke;
  ctx.lineWidth = 1.2;
  ctx.beginPath();
  values.forEach((v, t) => {
    const x = (t / Math.max(values.length - 1, 1)) * width;
    const y = height - ((v - lo) / span) * height;
    if (t === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();
}
