// Top-down cockpit renderer. Draws every entity kind in the snapshot
// onto a 2D context and acknowledges each newly displayed video frame
// exactly once (render_ack closes the glass-to-glass loop).

import type {
  EntityKind,
  RenderAckFrame,
  SceneEntity,
  SceneSnapshotFrame,
  MetricsFrame,
} from "./types.js";

// Structural subset of CanvasRenderingContext2D used by the renderer;
// tests substitute a recording fake.
export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(r: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

interface VideoState {
  lastAckedStamp: number;
}

export class CockpitView {
  private entities: SceneEntity[] = [];
  private metrics: MetricsFrame | null = null;
  private videoState = new Map<string, VideoState>();
  private kindsRendered = new Set<EntityKind>();
  acksSent = 0;
  framesDisplayed = 0;

  constructor(private sendAck: (frame: RenderAckFrame) => void) {}

  applySnapshot(snapshot: SceneSnapshotFrame): void {
    this.entities = snapshot.entities;
  }

  applyMetrics(frame: MetricsFrame): void {
    this.metrics = frame;
  }

  renderedKinds(): Set<EntityKind> {
    return new Set(this.kindsRendered);
  }

  /** Draw one frame; returns the entity kinds that were rendered. */
  render(ctx: Draw2D, widthPx: number, heightPx: number): Set<EntityKind> {
    this.kindsRendered = new Set();
    ctx.clearRect(0, 0, widthPx, heightPx);

    const vehicle = this.entities.find((e) => e.kind === "VehicleModel");
    const topView = this.entities.find((e) => e.kind === "TopView");
    const spanM = Number(topView?.style["span_m"] ?? 60);
    const pxPerM = Math.min(widthPx, heightPx) / spanM;
    const cx = widthPx / 2;
    const cy = heightPx / 2;
    const vx = vehicle?.transform.x ?? 0;
    const vy = vehicle?.transform.y ?? 0;

    const toScreen = (wx: number, wy: number): [number, number] => [
      cx + (wx - vx) * pxPerM,
      cy - (wy - vy) * pxPerM,
    ];

    if (topView) {
      this.drawTopView(ctx, topView, toScreen, pxPerM);
      this.kindsRendered.add("TopView");
    }
    for (const entity of this.entities) {
      switch (entity.kind) {
        case "SceneCamera":
          this.drawSceneCamera(ctx, cx, cy);
          this.kindsRendered.add("SceneCamera");
          break;
        case "CoordinateFrame":
          this.drawFrameLabel(ctx, entity, widthPx);
          this.kindsRendered.add("CoordinateFrame");
          break;
        case "LaserScanView":
          this.drawScan(ctx, entity, vehicle, toScreen);
          this.kindsRendered.add("LaserScanView");
          break;
        case "VehicleLane":
          this.drawLane(ctx, entity, vehicle, toScreen);
          this.kindsRendered.add("VehicleLane");
          break;
        case "VehicleModel":
          this.drawVehicle(ctx, entity, toScreen, pxPerM);
          this.kindsRendered.add("VehicleModel");
          break;
        case "Speedometer":
          this.drawSpeedometer(ctx, entity, vehicle, heightPx);
          this.kindsRendered.add("Speedometer");
          break;
        case "VideoCanvas":
          this.drawVideoCanvas(ctx, entity, widthPx);
          this.kindsRendered.add("VideoCanvas");
          break;
        case "TopView":
          break; // drawn first as the backdrop
      }
    }
    return this.kindsRendered;
  }

  private drawTopView(
    ctx: Draw2D,
    topView: SceneEntity,
    toScreen: (x: number, y: number) => [number, number],
    pxPerM: number,
  ): void {
    const grid = topView.data["grid"] as
      | { origin: [number, number]; resolution: number; occupied: [number, number][] }
      | null
      | undefined;
    if (grid) {
      ctx.fillStyle = "#394";
      const cell = Math.max(1, grid.resolution * pxPerM);
      for (const [ix, iy] of grid.occupied) {
        const [sx, sy] = toScreen(
          grid.origin[0] + ix * grid.resolution,
          grid.origin[1] + (iy + 1) * grid.resolution,
        );
        ctx.fillRect(sx, sy, cell, cell);
      }
    }
    const objects = (topView.data["objects"] ?? []) as Array<{
      aabb: [number, number, number, number];
    }>;
    ctx.strokeStyle = "#c83";
    for (const obj of objects) {
      const [sx0, sy0] = toScreen(obj.aabb[0], obj.aabb[3]);
      ctx.strokeRect(
        sx0,
        sy0,
        (obj.aabb[2] - obj.aabb[0]) * pxPerM,
        (obj.aabb[3] - obj.aabb[1]) * pxPerM,
      );
    }
  }

  private drawSceneCamera(ctx: Draw2D, cx: number, cy: number): void {
    // The viewport itself is the scene camera; mark its focus point.
    ctx.strokeStyle = "#888";
    ctx.beginPath();
    ctx.moveTo(cx - 6, cy);
    ctx.lineTo(cx + 6, cy);
    ctx.moveTo(cx, cy - 6);
    ctx.lineTo(cx, cy + 6);
    ctx.stroke();
  }

  private frameLabelRow = 0;

  private drawFrameLabel(ctx: Draw2D, entity: SceneEntity, widthPx: number): void {
    const frameId = String(entity.data["frame_id"] ?? entity.id);
    ctx.fillStyle = "#789";
    ctx.font = "10px monospace";
    ctx.fillText(`frame ${frameId}`, widthPx - 130, 14 + 12 * this.frameLabelRow);
    this.frameLabelRow = (this.frameLabelRow + 1) % 12;
  }

  private vehiclePose(vehicle: SceneEntity | undefined): { x: number; y: number; yaw: number } {
    return {
      x: vehicle?.transform.x ?? 0,
      y: vehicle?.transform.y ?? 0,
      yaw: vehicle?.transform.yaw ?? 0,
    };
  }

  private drawScan(
    ctx: Draw2D,
    entity: SceneEntity,
    vehicle: SceneEntity | undefined,
    toScreen: (x: number, y: number) => [number, number],
  ): void {
    const points = (entity.data["points"] ?? []) as [number, number][];
    const pose = this.vehiclePose(vehicle);
    const c = Math.cos(pose.yaw);
    const s = Math.sin(pose.yaw);
    ctx.fillStyle = String(entity.style["color"] ?? "#d33");
    for (const [px, py] of points) {
      const wx = pose.x + c * px - s * py;
      const wy = pose.y + s * px + c * py;
      const [sx, sy] = toScreen(wx, wy);
      ctx.fillRect(sx - 1, sy - 1, 2, 2);
    }
  }

  private drawLane(
    ctx: Draw2D,
    entity: SceneEntity,
    vehicle: SceneEntity | undefined,
    toScreen: (x: number, y: number) => [number, number],
  ): void {
    const pose = this.vehiclePose(vehicle);
    const c = Math.cos(pose.yaw);
    const s = Math.sin(pose.yaw);
    ctx.strokeStyle = "#eee";
    ctx.lineWidth = 2;
    for (const side of ["left", "right"] as const) {
      const points = (entity.data[side] ?? []) as [number, number][];
      if (points.length < 2) continue;
      ctx.beginPath();
      points.forEach(([px, py], i) => {
        const [sx, sy] = toScreen(pose.x + c * px - s * py, pose.y + s * px + c * py);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.stroke();
    }
  }

  private drawVehicle(
    ctx: Draw2D,
    entity: SceneEntity,
    toScreen: (x: number, y: number) => [number, number],
    pxPerM: number,
  ): void {
    const [sx, sy] = toScreen(entity.transform.x, entity.transform.y);
    ctx.save();
    ctx.translate(sx, sy);
    ctx.rotate(-entity.transform.yaw);
    ctx.fillStyle = String(entity.style["color"] ?? "#3a7");
    // Rear axle at the origin: body from -0.5 m behind to wheelbase+1 ahead.
    ctx.fillRect(-0.5 * pxPerM, -0.81 * pxPerM, 3.9 * pxPerM, 1.62 * pxPerM);
    ctx.restore();
    if (entity.data["estop"]) {
      ctx.fillStyle = "#f22";
      ctx.font = "bold 18px sans-serif";
      ctx.fillText("E-STOP ENGAGED", 12, 24);
    }
  }

  private drawSpeedometer(
    ctx: Draw2D,
    entity: SceneEntity,
    vehicle: SceneEntity | undefined,
    heightPx: number,
  ): void {
    const data = entity.data;
    const actual = Number(data["actual_velocity"] ?? 0) * 3.6;
    const commanded = Number(data["commanded_velocity"] ?? 0) * 3.6;
    const gear = String(data["gear"] ?? "Park");
    const commandedGear = String(data["commanded_gear"] ?? "Park");
    const mode = String(vehicle?.data["mode"] ?? "Normal");
    ctx.fillStyle = "#ddd";
    ctx.font = "13px monospace";
    ctx.fillText(
      `v ${actual.toFixed(1)} km/h (cmd ${commanded.toFixed(1)})  gear ${gear} (cmd ${commandedGear})  ${mode}`,
      12,
      heightPx - 12,
    );
    if (this.metrics) {
      const latency = this.metrics.actuation_latency_ms;
      const g2g = Object.entries(this.metrics.g2g_ms)
        .map(([camera, ms]) => `${camera} ${ms.toFixed(0)}ms`)
        .join(" ");
      ctx.fillText(
        `latency ${latency === null ? "n/a" : latency.toFixed(0) + "ms"}  g2g ${g2g || "n/a"}`,
        12,
        heightPx - 28,
      );
    }
  }

  private drawVideoCanvas(ctx: Draw2D, entity: SceneEntity, widthPx: number): void {
    const camera = String(entity.data["camera_id"] ?? entity.id);
    const stamp = Number(entity.data["stamp_ns"] ?? 0);
    const seq = Number(entity.data["seq"] ?? -1);
    const w = Number(entity.data["width"] ?? 0);
    const h = Number(entity.data["height"] ?? 0);
    ctx.strokeStyle = "#57a";
    ctx.strokeRect(widthPx - 150, 40, 140, 60);
    ctx.fillStyle = "#9ac";
    ctx.font = "10px monospace";
    ctx.fillText(`${camera} #${seq}`, widthPx - 142, 58);
    ctx.fillText(`${w}x${h}`, widthPx - 142, 72);

    if (seq >= 0 && stamp > 0) {
      let state = this.videoState.get(camera);
      if (!state) {
        state = { lastAckedStamp: -1 };
        this.videoState.set(camera, state);
      }
      if (stamp !== state.lastAckedStamp) {
        state.lastAckedStamp = stamp;
        this.framesDisplayed += 1;
        this.acksSent += 1;
        this.sendAck({ type: "render_ack", camera, frame_stamp_ns: stamp });
      }
    }
  }
}
