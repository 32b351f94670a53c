import { Camera } from "./camera.js";
import { CLOSE_RADIUS_PX } from "./draft.js";
import { ViewModel } from "./state.js";
import { Plan, Pt } from "./types.js";

/** The slice of CanvasRenderingContext2D the renderer touches. Tests drive it
 * with a recording fake; the browser passes the real context. */
export interface Draw2D {
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
  lineCap: "butt" | "round" | "square";
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  setLineDash(segments: number[]): void;
  fillText(text: string, x: number, y: number): void;
}

function gridStep(cam: Camera): number {
  // Smallest "nice" step that keeps gridlines at least 25 px apart.
  const steps = [0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100];
  const minWorld = 25 / cam.scale;
  for (const s of steps) if (s >= minWorld) return s;
  return 200;
}

function polyline(ctx: Draw2D, cam: Camera, pts: Pt[], close = false): void {
  ctx.beginPath();
  pts.forEach((p, i) => {
    const [x, y] = cam.worldToScreen(p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  if (close) ctx.closePath();
}

export function renderGrid(ctx: Draw2D, cam: Camera): void {
  const step = gridStep(cam);
  const [x0, y1] = cam.screenToWorld([0, 0]);
  const [x1, y0] = cam.screenToWorld([cam.width, cam.height]);
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let x = Math.ceil(x0 / step) * step; x <= x1; x += step) {
    ctx.moveTo(...cam.worldToScreen([x, y0]));
    ctx.lineTo(...cam.worldToScreen([x, y1]));
  }
  for (let y = Math.ceil(y0 / step) * step; y <= y1; y += step) {
    ctx.moveTo(...cam.worldToScreen([x0, y]));
    ctx.lineTo(...cam.worldToScreen([x1, y]));
  }
  ctx.strokeStyle = "#dde4da";
  ctx.stroke();
  ctx.fillStyle = "#8a948a";
  ctx.font = "11px sans-serif";
  ctx.fillText(`grid ${step} m`, 8, cam.height - 8);
}

/** Shade the strip the implement has swept. Visual only: the coverage number
 * shown in the readouts always comes from the server. */
export function renderCovered(ctx: Draw2D, cam: Camera, trail: Pt[], widthMeters: number): void {
  if (trail.length < 2) return;
  ctx.globalAlpha = 0.25;
  ctx.strokeStyle = "#4f9d4f";
  ctx.lineWidth = widthMeters * cam.scale;
  ctx.lineCap = "round";
  polyline(ctx, cam, trail);
  ctx.stroke();
  ctx.globalAlpha = 1;
  ctx.lineCap = "butt";
}

export function renderPolygon(ctx: Draw2D, cam: Camera, vertices: Pt[]): void {
  if (vertices.length < 3) return;
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#355e3b";
  polyline(ctx, cam, vertices, true);
  ctx.stroke();
}

export function renderPlan(ctx: Draw2D, cam: Camera, plan: Plan): void {
  ctx.lineWidth = 1.5;
  ctx.strokeStyle = "#2b6cb0";
  ctx.beginPath();
  for (const [a, b] of plan.swaths) {
    ctx.moveTo(...cam.worldToScreen(a));
    ctx.lineTo(...cam.worldToScreen(b));
  }
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.strokeStyle = "#90b4d8";
  ctx.setLineDash([4, 4]);
  polyline(ctx, cam, plan.waypoints);
  ctx.stroke();
  ctx.setLineDash([]);
}

export function renderTrail(ctx: Draw2D, cam: Camera, trail: Pt[]): void {
  if (trail.length < 2) return;
  ctx.lineWidth = 1.5;
  ctx.strokeStyle = "#b05c2b";
  polyline(ctx, cam, trail);
  ctx.stroke();
}

export function renderVehicle(ctx: Draw2D, cam: Camera, pose: [number, number, number]): void {
  const [cx, cy] = cam.worldToScreen([pose[0], pose[1]]);
  ctx.fillStyle = "#b03a2e";
  ctx.beginPath();
  ctx.arc(cx, cy, 6, 0, 2 * Math.PI);
  ctx.fill();
  // Heading tick; screen y points down, so the sine flips.
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#b03a2e";
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(cx + 14 * Math.cos(pose[2]), cy - 14 * Math.sin(pose[2]));
  ctx.stroke();
}

export function renderDraft(ctx: Draw2D, cam: Camera, draft: Pt[]): void {
  if (draft.length === 0) return;
  ctx.lineWidth = 1.5;
  ctx.strokeStyle = "#8c6d1f";
  polyline(ctx, cam, draft);
  ctx.stroke();
  ctx.fillStyle = "#8c6d1f";
  for (const v of draft) {
    const [x, y] = cam.worldToScreen(v);
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (draft.length >= 3) {
    // Halo marking the click target that closes and submits the outline.
    const [x, y] = cam.worldToScreen(draft[0]);
    ctx.lineWidth = 1;
    ctx.strokeStyle = "#c9a227";
    ctx.beginPath();
    ctx.arc(x, y, CLOSE_RADIUS_PX, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

/** Draw the whole scene. Pure: every stroke is a function of the model alone,
 * so identical models produce identical command streams. */
export function renderScene(ctx: Draw2D, vm: ViewModel): void {
  const cam = vm.camera;
  ctx.clearRect(0, 0, cam.width, cam.height);
  renderGrid(ctx, cam);
  if (vm.plan) renderCovered(ctx, cam, vm.trail, vm.plan.implement_width);
  if (vm.polygon) renderPolygon(ctx, cam, vm.polygon);
  if (vm.plan) renderPlan(ctx, cam, vm.plan);
  renderTrail(ctx, cam, vm.trail);
  if (vm.update) renderVehicle(ctx, cam, vm.update.pose);
  if (vm.mode === "draw") renderDraft(ctx, cam, vm.draft);
}
