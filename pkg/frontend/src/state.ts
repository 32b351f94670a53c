import { Camera } from "./camera.js";
import { Plan, Pt, SessionState, Snapshot, StateUpdate } from "./types.js";

export type Mode = "draw" | "mission";
export type Control = "start" | "pause" | "reset" | "replan";

/** Session states in which each control may issue its request. Start maps to
 * the start transition, pause to pause, reset to reset; replan only re-enters
 * drawing mode, whose eventual polygon submit is legal from Planned/Paused. */
export const CONTROL_STATES: Record<Control, readonly SessionState[]> = {
  start: ["Planned", "Paused"],
  pause: ["Running"],
  reset: ["Idle", "Planned", "Running", "Paused", "Finished", "Failed"],
  replan: ["Planned", "Paused"],
};

export function controlEnabled(control: Control, state: SessionState): boolean {
  return CONTROL_STATES[control].includes(state);
}

/** Polygon clicks are accepted only while a submit would be legal. */
export function drawingAllowed(state: SessionState): boolean {
  return state === "Idle" || state === "Planned" || state === "Paused";
}

const TRAIL_CAP = 20000;
const TRAIL_MIN_STEP = 0.01; // meters between stored trail points

export interface ViewModel {
  sessionId: string | null;
  sessionState: SessionState;
  mode: Mode;
  draft: Pt[];
  draftWarning: string | null;
  banner: string | null;
  plan: Plan | null;
  polygon: Pt[] | null;
  update: StateUpdate | null;
  trail: Pt[];
  connected: boolean;
  camera: Camera;
}

export function initialViewModel(width: number, height: number): ViewModel {
  return {
    sessionId: null,
    sessionState: "Idle",
    mode: "draw",
    draft: [],
    draftWarning: null,
    banner: null,
    plan: null,
    polygon: null,
    update: null,
    trail: [],
    connected: false,
    camera: new Camera(width, height),
  };
}

/** Fold one stream message into the model. Callers apply messages strictly in
 * arrival order; the rendered pose is always the one from the last update. */
export function applyUpdate(vm: ViewModel, u: StateUpdate): void {
  vm.update = u;
  vm.sessionState = u.session_state;
  const p: Pt = [u.pose[0], u.pose[1]];
  const last = vm.trail[vm.trail.length - 1];
  if (!last || Math.hypot(p[0] - last[0], p[1] - last[1]) >= TRAIL_MIN_STEP) {
    vm.trail.push(p);
    if (vm.trail.length > TRAIL_CAP) vm.trail.splice(0, vm.trail.length - TRAIL_CAP);
  }
  if (u.session_state === "Finished") {
    vm.banner = `mission finished: coverage ${(u.coverage * 100).toFixed(1)}%`;
  } else if (u.session_state === "Failed") {
    vm.banner = "mission failed: vehicle state diverged";
  }
}

/** Resynchronize from a full snapshot (reconnects, initial load). */
export function applySnapshot(vm: ViewModel, snap: Snapshot): void {
  vm.sessionId = snap.id;
  vm.plan = snap.plan;
  vm.polygon = snap.polygon ? snap.polygon.vertices : null;
  applyUpdate(vm, snap.update);
  // A half-drawn outline survives the resync; otherwise the mode just
  // reflects whether the server holds a committed plan.
  if (!(vm.mode === "draw" && vm.draft.length > 0)) {
    vm.mode = snap.plan ? "mission" : "draw";
  }
}

/** Accept a committed plan straight from a polygon submit. */
export function applyPlan(vm: ViewModel, plan: Plan, polygon: Pt[]): void {
  vm.plan = plan;
  vm.polygon = polygon;
  vm.sessionState = "Planned";
  vm.mode = "mission";
  vm.draft = [];
  vm.draftWarning = null;
  vm.banner = null;
}

/** Re-enter drawing mode; the old plan stays visible until a new submit. */
export function enterDrawMode(vm: ViewModel): void {
  vm.mode = "draw";
  vm.draft = [];
  vm.draftWarning = null;
}
