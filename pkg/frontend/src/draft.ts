import { Camera } from "./camera.js";
import { Pt } from "./types.js";

/** Clicks this close to the first vertex (in pixels) close the polygon. */
export const CLOSE_RADIUS_PX = 12;

export const MIN_VERTICES_MSG = "need at least 3 vertices";
export const SELF_INTERSECT_MSG = "edges cross: fix the outline before submitting";

function orient(a: Pt, b: Pt, c: Pt): number {
  return Math.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

function onSegment(a: Pt, b: Pt, p: Pt): boolean {
  return (
    Math.min(a[0], b[0]) <= p[0] && p[0] <= Math.max(a[0], b[0]) &&
    Math.min(a[1], b[1]) <= p[1] && p[1] <= Math.max(a[1], b[1])
  );
}

export function segmentsIntersect(a: Pt, b: Pt, c: Pt, d: Pt): boolean {
  const o1 = orient(a, b, c);
  const o2 = orient(a, b, d);
  const o3 = orient(c, d, a);
  const o4 = orient(c, d, b);
  if (o1 !== o2 && o3 !== o4) return true;
  // Collinear overlaps count as intersections too.
  if (o1 === 0 && onSegment(a, b, c)) return true;
  if (o2 === 0 && onSegment(a, b, d)) return true;
  if (o3 === 0 && onSegment(c, d, a)) return true;
  if (o4 === 0 && onSegment(c, d, b)) return true;
  return false;
}

/**
 * True when any two non-adjacent edges of the vertex chain cross. With
 * `closed` the implicit edge from last back to first vertex is included.
 */
export function selfIntersects(vertices: Pt[], closed = false): boolean {
  const n = vertices.length;
  const edges: [Pt, Pt][] = [];
  for (let i = 0; i + 1 < n; i++) edges.push([vertices[i], vertices[i + 1]]);
  if (closed && n >= 3) edges.push([vertices[n - 1], vertices[0]]);
  const m = edges.length;
  for (let i = 0; i < m; i++) {
    for (let j = i + 1; j < m; j++) {
      // Adjacent edges share a vertex by construction; skip them. The
      // closing edge is adjacent to both the first and the last edge.
      const adjacent = j === i + 1 || (closed && i === 0 && j === m - 1);
      if (adjacent) continue;
      if (segmentsIntersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1])) {
        return true;
      }
    }
  }
  return false;
}

/** Whether a click at `screen` should close the draft (near the first vertex). */
export function isClosingClick(draft: Pt[], screen: Pt, cam: Camera): boolean {
  if (draft.length === 0) return false;
  const first = cam.worldToScreen(draft[0]);
  return Math.hypot(screen[0] - first[0], screen[1] - first[1]) <= CLOSE_RADIUS_PX;
}

/** Inline warning for the draft as drawn so far, or null when it is clean. */
export function draftWarning(draft: Pt[]): string | null {
  return selfIntersects(draft, false) ? SELF_INTERSECT_MSG : null;
}

/** Reason the draft cannot be closed and submitted, or null when it can. */
export function closeError(draft: Pt[]): string | null {
  if (draft.length < 3) return MIN_VERTICES_MSG;
  if (selfIntersects(draft, true)) return SELF_INTERSECT_MSG;
  return null;
}
