import { ApiError, Client } from "./api.js";
import { closeError, draftWarning, isClosingClick } from "./draft.js";
import { renderScene } from "./render.js";
import {
  Control,
  applyPlan,
  applySnapshot,
  applyUpdate,
  controlEnabled,
  drawingAllowed,
  enterDrawMode,
  initialViewModel,
} from "./state.js";
import { Stream } from "./stream.js";
import { Pt } from "./types.js";

function must<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = must<HTMLCanvasElement>("field");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("2d canvas unavailable");

const buttons: Record<Control, HTMLButtonElement> = {
  start: must<HTMLButtonElement>("start"),
  pause: must<HTMLButtonElement>("pause"),
  reset: must<HTMLButtonElement>("reset"),
  replan: must<HTMLButtonElement>("replan"),
};
const widthInput = must<HTMLInputElement>("width");
const directionInput = must<HTMLInputElement>("direction");
const banner = must<HTMLDivElement>("banner");
const hint = must<HTMLDivElement>("hint");
const readout = {
  state: must<HTMLSpanElement>("ro-state"),
  time: must<HTMLSpanElement>("ro-time"),
  speed: must<HTMLSpanElement>("ro-speed"),
  coverage: must<HTMLSpanElement>("ro-coverage"),
  link: must<HTMLSpanElement>("ro-link"),
};

const params = new URLSearchParams(location.search);
const base = params.get("api") ?? `http://${location.hostname || "localhost"}:8080`;
const client = new Client(base);

const vm = initialViewModel(canvas.width, canvas.height);
vm.camera.fit(-2, -2, 22, 12);

function sync(): void {
  for (const name of Object.keys(buttons) as Control[]) {
    buttons[name].disabled = !controlEnabled(name, vm.sessionState);
  }
  readout.state.textContent = vm.sessionState;
  readout.link.textContent = vm.connected ? "live" : "offline";
  const u = vm.update;
  if (u) {
    readout.time.textContent = `${u.t.toFixed(1)} s`;
    readout.speed.textContent = `${u.speed_measured.toFixed(2)} / ${u.speed_setpoint.toFixed(2)} m/s`;
    readout.coverage.textContent = `${(u.coverage * 100).toFixed(1)} %`;
  }
  banner.textContent = vm.banner ?? "";
  banner.style.display = vm.banner ? "block" : "none";
  if (vm.mode === "draw" && drawingAllowed(vm.sessionState)) {
    hint.textContent =
      vm.draftWarning ??
      "click to add vertices; click the first vertex again to close and plan";
    hint.className = vm.draftWarning ? "hint warn" : "hint";
  } else {
    hint.textContent = "";
    hint.className = "hint";
  }
  renderScene(ctx!, vm);
}

async function resync(): Promise<void> {
  if (!vm.sessionId) return;
  try {
    applySnapshot(vm, await client.snapshot(vm.sessionId));
  } catch (err) {
    vm.banner = err instanceof ApiError ? err.message : "service unreachable";
  }
  sync();
}

async function submitDraft(): Promise<void> {
  if (!vm.sessionId) return;
  try {
    const plan = await client.submitPolygon(
      vm.sessionId,
      vm.draft,
      Number(widthInput.value) || 2.0,
      Number(directionInput.value) || 0.0,
    );
    applyPlan(vm, plan, vm.draft.slice());
    const xs = vm.polygon!.map((p) => p[0]);
    const ys = vm.polygon!.map((p) => p[1]);
    vm.camera.fit(Math.min(...xs), Math.min(...ys), Math.max(...xs), Math.max(...ys));
  } catch (err) {
    // Keep the draft so the outline can be fixed and resubmitted.
    vm.banner = err instanceof ApiError ? err.message : "submit failed";
  }
  sync();
}

function canvasPoint(ev: MouseEvent): Pt {
  const r = canvas.getBoundingClientRect();
  return [ev.clientX - r.left, ev.clientY - r.top];
}

function handleClick(screen: Pt): void {
  if (vm.mode !== "draw" || !drawingAllowed(vm.sessionState)) return;
  if (vm.draft.length >= 1 && isClosingClick(vm.draft, screen, vm.camera)) {
    const err = closeError(vm.draft);
    if (err) {
      vm.draftWarning = err;
      sync();
      return;
    }
    void submitDraft();
    return;
  }
  vm.draft.push(vm.camera.screenToWorld(screen));
  vm.draftWarning = draftWarning(vm.draft);
  vm.banner = null;
  sync();
}

// Click adds a vertex; moving more than a few pixels while held pans instead.
let down: Pt | null = null;
let dragged = false;
canvas.addEventListener("pointerdown", (ev) => {
  down = canvasPoint(ev);
  dragged = false;
});
canvas.addEventListener("pointermove", (ev) => {
  if (!down) return;
  const p = canvasPoint(ev);
  if (dragged || Math.hypot(p[0] - down[0], p[1] - down[1]) > 4) {
    dragged = true;
    vm.camera.pan(p[0] - down[0], p[1] - down[1]);
    down = p;
    sync();
  }
});
canvas.addEventListener("pointerup", (ev) => {
  if (down && !dragged) handleClick(canvasPoint(ev));
  down = null;
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  vm.camera.zoomAt(canvasPoint(ev), ev.deltaY < 0 ? 1.2 : 1 / 1.2);
  sync();
});

async function action(name: Control): Promise<void> {
  if (!vm.sessionId) return;
  try {
    if (name === "replan") {
      enterDrawMode(vm);
    } else {
      const res = await client[name](vm.sessionId);
      vm.sessionState = res.state;
      if (name === "reset") await resync();
    }
  } catch (err) {
    vm.banner = err instanceof ApiError ? err.message : `${name} failed`;
  }
  sync();
}

for (const name of Object.keys(buttons) as Control[]) {
  buttons[name].addEventListener("click", () => void action(name));
}

async function boot(): Promise<void> {
  try {
    const { id } = await client.createSession();
    vm.sessionId = id;
  } catch {
    vm.banner = `cannot reach the service at ${base}`;
    sync();
    return;
  }
  const stream = new Stream(client.streamUrl(vm.sessionId), {
    onOpen: () => void resync(),
    onUpdate: (u) => {
      applyUpdate(vm, u);
      sync();
    },
    onStatus: (ok) => {
      vm.connected = ok;
      sync();
    },
  });
  stream.connect();
  sync();
}

void boot();
