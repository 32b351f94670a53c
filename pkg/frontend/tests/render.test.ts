import { describe, expect, it } from "vitest";
import { Camera } from "../src/camera.js";
import {
  Draw2D,
  renderCovered,
  renderPlan,
  renderScene,
  renderVehicle,
} from "../src/render.js";
import { applyPlan, applyUpdate, initialViewModel } from "../src/state.js";
import { Plan, StateUpdate } from "../src/types.js";

/** Recording context: every method call and style write lands in `ops`. */
function recCtx(): { ctx: Draw2D; ops: unknown[][] } {
  const ops: unknown[][] = [];
  const target: Record<string | symbol, unknown> = {};
  const ctx = new Proxy(target, {
    get(t, prop) {
      if (prop in t) return t[prop];
      return (...args: unknown[]) => {
        ops.push([prop, ...args]);
      };
    },
    set(t, prop, value) {
      t[prop] = value;
      ops.push(["set", prop, value]);
      return true;
    },
  }) as unknown as Draw2D;
  return { ctx, ops };
}

const PLAN: Plan = {
  swaths: [[[1, 1], [19, 1]], [[1, 3], [19, 3]], [[1, 5], [19, 5]]],
  waypoints: [[1, 1], [19, 1], [19, 3], [1, 3], [1, 5], [19, 5]],
  implement_width: 2,
  direction: 0,
  route_length: 94,
};

function baseUpdate(): StateUpdate {
  return {
    t: 1.5,
    pose: [3.25, 4.5, 0.6],
    speed_setpoint: 1,
    speed_measured: 0.97,
    route_progress: 2.5,
    coverage: 0.12,
    session_state: "Running",
  };
}

describe("rendering", () => {
  it("is a pure function of the view model", () => {
    const vm = initialViewModel(900, 560);
    applyPlan(vm, PLAN, [[0, 0], [20, 0], [20, 10], [0, 10]]);
    applyUpdate(vm, baseUpdate());
    const a = recCtx();
    const b = recCtx();
    renderScene(a.ctx, vm);
    renderScene(b.ctx, vm);
    expect(a.ops).toEqual(b.ops);
    expect(a.ops[0]).toEqual(["clearRect", 0, 0, 900, 560]);
  });

  it("draws the vehicle exactly at the latest update's pose", () => {
    const vm = initialViewModel(900, 560);
    const u = baseUpdate();
    applyUpdate(vm, u);
    const { ctx, ops } = recCtx();
    renderScene(ctx, vm);
    // The vehicle is the only radius-6 arc in the scene.
    const marker = ops.filter((op) => op[0] === "arc" && op[3] === 6);
    expect(marker).toHaveLength(1);
    const [x, y] = vm.camera.worldToScreen([u.pose[0], u.pose[1]]);
    expect(marker[0][1]).toBeCloseTo(x, 9);
    expect(marker[0][2]).toBeCloseTo(y, 9);
  });

  it("omits the vehicle until an update has arrived", () => {
    const vm = initialViewModel(900, 560);
    const { ctx, ops } = recCtx();
    renderScene(ctx, vm);
    expect(ops.some((op) => op[0] === "arc" && op[3] === 6)).toBe(false);
  });

  it("strokes one line per swath plus the dashed route", () => {
    const cam = new Camera(900, 560, 40, 10, 5);
    const { ctx, ops } = recCtx();
    renderPlan(ctx, cam, PLAN);
    const moves = ops.filter((op) => op[0] === "moveTo").length;
    const lines = ops.filter((op) => op[0] === "lineTo").length;
    expect(moves).toBe(PLAN.swaths.length + 1);
    expect(lines).toBe(PLAN.swaths.length + PLAN.waypoints.length - 1);
    expect(ops.filter((op) => op[0] === "setLineDash")).toHaveLength(2);
  });

  it("shades the covered strip as wide as the implement on screen", () => {
    const cam = new Camera(900, 560, 40, 10, 5);
    const { ctx, ops } = recCtx();
    renderCovered(ctx, cam, [[1, 1], [5, 1], [9, 1]], 2);
    expect(ops).toContainEqual(["set", "lineWidth", 80]); // 2 m at 40 px/m
    const alphas = ops.filter((op) => op[0] === "set" && op[1] === "globalAlpha");
    expect(alphas[alphas.length - 1]).toEqual(["set", "globalAlpha", 1]);
  });

  it("skips the shading for a single-point trail", () => {
    const cam = new Camera(900, 560);
    const { ctx, ops } = recCtx();
    renderCovered(ctx, cam, [[1, 1]], 2);
    expect(ops).toEqual([]);
  });

  it("marks the closing halo once the draft can form a polygon", () => {
    const vm = initialViewModel(900, 560);
    vm.draft = [[0, 0], [10, 0], [10, 10]];
    const { ctx, ops } = recCtx();
    renderScene(ctx, vm);
    const arcs = ops.filter((op) => op[0] === "arc");
    expect(arcs.filter((op) => op[3] === 3)).toHaveLength(3); // vertex dots
    expect(arcs.filter((op) => op[3] === 12)).toHaveLength(1); // close halo
  });

  it("hides the draft outside drawing mode", () => {
    const vm = initialViewModel(900, 560);
    vm.draft = [[0, 0], [10, 0], [10, 10]];
    vm.mode = "mission";
    const { ctx, ops } = recCtx();
    renderScene(ctx, vm);
    expect(ops.filter((op) => op[0] === "arc")).toHaveLength(0);
  });

  it("labels the meter grid with the chosen step", () => {
    const vm = initialViewModel(900, 560); // 40 px/m picks a 1 m step
    const { ctx, ops } = recCtx();
    renderScene(ctx, vm);
    const labels = ops.filter((op) => op[0] === "fillText");
    expect(labels).toHaveLength(1);
    expect(labels[0][1]).toBe("grid 1 m");
  });

  it("heads the vehicle tick along the pose angle with y flipped", () => {
    const cam = new Camera(900, 560, 40, 0, 0);
    const { ctx, ops } = recCtx();
    renderVehicle(ctx, cam, [0, 0, Math.PI / 2]);
    const tick = ops.filter((op) => op[0] === "lineTo");
    expect(tick).toHaveLength(1);
    expect(tick[0][1]).toBeCloseTo(450, 6);
    expect(tick[0][2]).toBeCloseTo(280 - 14, 6); // up on screen
  });
});
