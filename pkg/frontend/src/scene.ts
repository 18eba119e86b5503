/**
 * Top-down scene and strip-chart rendering. Pure functions of the view
 * model: every drawn position comes from the latest tick, so the scene
 * cannot move unless a tick arrived.
 */
import { SessionViewModel } from "./viewmodel.js";

/** The subset of CanvasRenderingContext2D the renderer uses (stubbed in tests). */
export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface SceneLayout {
  width: number;
  height: number;
  /** World-x range shown along the canvas x axis. */
  xMin: number;
  xMax: number;
  /** World-y (pedestrian lateral) range shown along the canvas y axis. */
  yMin: number;
  yMax: number;
  /** Zone bands in world y, shaded for orientation. */
  nearZone: [number, number];
  laneY: number;
  laneHalfWidth: number;
}

export const DEFAULT_LAYOUT: SceneLayout = {
  width: 720,
  height: 360,
  xMin: -16,
  xMax: 12,
  yMin: -6,
  yMax: 6,
  nearZone: [-2.0, -0.5],
  laneY: 0.0,
  laneHalfWidth: 1.75,
};

function sx(layout: SceneLayout, x: number): number {
  return ((x - layout.xMin) / (layout.xMax - layout.xMin)) * layout.width;
}

function sy(layout: SceneLayout, y: number): number {
  // canvas y grows downward; world y grows toward the far side
  return layout.height - ((y - layout.yMin) / (layout.yMax - layout.yMin)) * layout.height;
}

export function drawScene(ctx: Canvas2D, vm: SessionViewModel,
                          layout: SceneLayout = DEFAULT_LAYOUT): void {
  ctx.clearRect(0, 0, layout.width, layout.height);

  // lane band
  ctx.fillStyle = "#d8d8d8";
  const laneTop = sy(layout, layout.laneY + layout.laneHalfWidth);
  ctx.fillRect(0, laneTop, layout.width, sy(layout, layout.laneY - layout.laneHalfWidth) - laneTop);

  // near-zone band on the pedestrian approach side
  ctx.fillStyle = "rgba(255, 200, 80, 0.35)";
  const nearTop = sy(layout, layout.nearZone[1]);
  ctx.fillRect(0, nearTop, layout.width, sy(layout, layout.nearZone[0]) - nearTop);

  const tick = vm.tick;
  if (!tick) {
    ctx.fillStyle = "#555";
    ctx.font = "14px sans-serif";
    ctx.fillText(vm.status === "open" ? "waiting for first tick…" : `connection: ${vm.status}`,
                 12, 20);
    return;
  }

  // vehicle: rectangle travelling along the lane
  ctx.fillStyle = "#3366cc";
  const vx = sx(layout, tick.vehicle.x);
  const vy = sy(layout, layout.laneY);
  ctx.fillRect(vx - 14, vy - 7, 28, 14);

  // pedestrian: dot on the crossing line
  ctx.fillStyle = "#cc3333";
  ctx.beginPath();
  ctx.arc(sx(layout, tick.pedestrian.x), sy(layout, tick.pedestrian.y), 6, 0, 2 * Math.PI);
  ctx.fill();

  // crossing line
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(sx(layout, tick.pedestrian.x), 0);
  ctx.lineTo(sx(layout, tick.pedestrian.x), layout.height);
  ctx.stroke();

  // readouts
  ctx.fillStyle = "#222";
  ctx.font = "13px monospace";
  ctx.fillText(`t=${tick.t.toFixed(1)}s  v=${tick.vehicle.v.toFixed(2)}m/s  u=${tick.u.toFixed(2)}`,
               12, 18);
  ctx.fillText(`ttc=${tick.ttc.toFixed(2)}s  zone=${tick.zone}  score=${tick.score_so_far.toFixed(2)}`,
               12, 36);
  if (vm.summary) {
    const m = vm.summary.metrics;
    ctx.fillText(`ended: ${vm.summary.reason}  score=${m.score.toFixed(2)} ` +
                 `(ttc_min=${m.ttc_min === null ? "n/a" : m.ttc_min.toFixed(2)} ` +
                 `t=${m.t_total.toFixed(1)} a_max=${m.a_max.toFixed(2)})`, 12, 54);
  }
}

export function drawStripChart(ctx: Canvas2D, vm: SessionViewModel,
                               width = 720, height = 160): void {
  ctx.clearRect(0, 0, width, height);
  const h = vm.history;
  if (h.length < 2) return;
  const t0 = h[0]!.t;
  const t1 = h[h.length - 1]!.t;
  const span = Math.max(t1 - t0, 1e-9);
  const xOf = (t: number) => ((t - t0) / span) * width;

  const series: Array<[string, (p: typeof h[0]) => number, number]> = [
    ["#3366cc", (p) => p.vVehicle, 8.5],      // vehicle speed, m/s scale
    ["#cc3333", (p) => p.vyPedestrian, 3.0],  // pedestrian speed
    ["#339933", (p) => p.intention, 1.0],     // intention in [0,1]
  ];
  for (const [color, get, scale] of series) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(xOf(h[0]!.t), height - (get(h[0]!) / scale) * height);
    for (const p of h) ctx.lineTo(xOf(p.t), height - (get(p) / scale) * height);
    ctx.stroke();
  }
}
