import { Pt } from "./types.js";

const MIN_SCALE = 2; // px per meter
const MAX_SCALE = 400;

/** Maps world meters (y up) to canvas pixels (y down) and back. */
export class Camera {
  constructor(
    public width: number,
    public height: number,
    public scale = 40, // px per meter
    public cx = 0, // world point at the canvas center
    public cy = 0,
  ) {}

  worldToScreen(p: Pt): Pt {
    return [
      this.width / 2 + (p[0] - this.cx) * this.scale,
      this.height / 2 - (p[1] - this.cy) * this.scale,
    ];
  }

  screenToWorld(p: Pt): Pt {
    return [
      this.cx + (p[0] - this.width / 2) / this.scale,
      this.cy - (p[1] - this.height / 2) / this.scale,
    ];
  }

  /** Zoom by `factor`, keeping the world point under `screen` fixed. */
  zoomAt(screen: Pt, factor: number): void {
    const anchor = this.screenToWorld(screen);
    this.scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, this.scale * factor));
    this.cx = anchor[0] - (screen[0] - this.width / 2) / this.scale;
    this.cy = anchor[1] + (screen[1] - this.height / 2) / this.scale;
  }

  /** Shift the view by a screen-space delta (drag panning). */
  pan(dxPx: number, dyPx: number): void {
    this.cx -= dxPx / this.scale;
    this.cy += dyPx / this.scale;
  }

  /** Frame a world-space bounding box with `marginPx` kept clear on each side. */
  fit(xMin: number, yMin: number, xMax: number, yMax: number, marginPx = 40): void {
    const w = Math.max(xMax - xMin, 1e-9);
    const h = Math.max(yMax - yMin, 1e-9);
    const sx = (this.width - 2 * marginPx) / w;
    const sy = (this.height - 2 * marginPx) / h;
    this.scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, Math.min(sx, sy)));
    this.cx = (xMin + xMax) / 2;
    this.cy = (yMin + yMax) / 2;
  }
}
