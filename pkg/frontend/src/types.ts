// Wire types for the agrosim session service.

export type Pt = [number, number];

export type SessionState =
  | "Idle"
  | "Planned"
  | "Running"
  | "Paused"
  | "Finished"
  | "Failed";

export interface StateUpdate {
  t: number;
  pose: [number, number, number];
  speed_setpoint: number;
  speed_measured: number;
  route_progress: number;
  coverage: number;
  session_state: SessionState;
}

export interface Plan {
  swaths: [Pt, Pt][];
  waypoints: Pt[];
  implement_width: number;
  direction: number;
  route_length: number;
}

export interface Snapshot {
  id: string;
  state: SessionState;
  time_scale: number;
  plan: Plan | null;
  polygon: { vertices: Pt[] } | null;
  config: unknown;
  update: StateUpdate;
}
