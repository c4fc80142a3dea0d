import { describe, expect, it } from "vitest";

import { CockpitView, type Draw2D } from "../src/cockpit.js";
import type {
  EntityKind,
  RenderAckFrame,
  SceneEntity,
  SceneSnapshotFrame,
} from "../src/types.js";

/** Recording fake of the 2D context. */
class FakeContext implements Draw2D {
  ops: string[] = [];
  texts: string[] = [];
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 1;
  font = "";
  clearRect(): void {
    this.ops.push("clearRect");
  }
  save(): void {
    this.ops.push("save");
  }
  restore(): void {
    this.ops.push("restore");
  }
  translate(): void {
    this.ops.push("translate");
  }
  rotate(): void {
    this.ops.push("rotate");
  }
  beginPath(): void {
    this.ops.push("beginPath");
  }
  moveTo(): void {
    this.ops.push("moveTo");
  }
  lineTo(): void {
    this.ops.push("lineTo");
  }
  stroke(): void {
    this.ops.push("stroke");
  }
  fill(): void {
    this.ops.push("fill");
  }
  fillRect(): void {
    this.ops.push("fillRect");
  }
  strokeRect(): void {
    this.ops.push("strokeRect");
  }
  arc(): void {
    this.ops.push("arc");
  }
  fillText(text: string): void {
    this.ops.push("fillText");
    this.texts.push(text);
  }
}

function entity(id: string, kind: EntityKind, extra: Partial<SceneEntity> = {}): SceneEntity {
  return {
    id,
    kind,
    transform: { x: 0, y: 0, yaw: 0 },
    data: {},
    style: {},
    ...extra,
  };
}

function fullSnapshot(frameStamp = 1000, seq = 0): SceneSnapshotFrame {
  return {
    type: "scene_snapshot",
    t_ns: 0,
    entities: [
      entity("scene_camera", "SceneCamera"),
      entity("frame:laser_front", "CoordinateFrame", { data: { frame_id: "laser_front" } }),
      entity("vehicle", "VehicleModel", {
        transform: { x: 5, y: 2, yaw: 0.3 },
        data: { estop: true, mode: "Normal", velocity: 2.0 },
      }),
      entity("speedometer", "Speedometer", {
        data: { actual_velocity: 2.0, commanded_velocity: 2.5, gear: "Drive", commanded_gear: "Drive" },
      }),
      entity("video:front", "VideoCanvas", {
        data: { camera_id: "front", seq, stamp_ns: frameStamp, width: 924, height: 520 },
      }),
      entity("scan:front", "LaserScanView", {
        data: { sensor: "front", points: [[4.0, 0.0], [4.1, 0.5]] },
      }),
      entity("vehicle_lane", "VehicleLane", {
        data: { left: [[2.9, 0.81], [7.9, 0.81]], right: [[2.9, -0.81], [7.9, -0.81]] },
      }),
      entity("top_view", "TopView", {
        data: {
          grid: { origin: [-20, -20], resolution: 0.2, width: 200, height: 200, occupied: [[10, 12]] },
          objects: [{ cx: 4, cy: 0, aabb: [3.9, -0.1, 4.2, 0.6], points: 5 }],
        },
        style: { span_m: 60 },
      }),
    ],
  };
}

const ALL_KINDS: EntityKind[] = [
  "SceneCamera",
  "CoordinateFrame",
  "VehicleModel",
  "Speedometer",
  "VideoCanvas",
  "LaserScanView",
  "VehicleLane",
  "TopView",
];

describe("CockpitView", () => {
  it("renders every entity kind present in the snapshot", () => {
    const cockpit = new CockpitView(() => {});
    cockpit.applySnapshot(fullSnapshot());
    const ctx = new FakeContext();
    const kinds = cockpit.render(ctx, 720, 640);
    for (const kind of ALL_KINDS) {
      expect(kinds.has(kind), `kind ${kind} not rendered`).toBe(true);
    }
    expect(ctx.ops).toContain("fillRect"); // vehicle body and scan points
    expect(ctx.ops).toContain("stroke"); // lane polylines
  });

  it("shows a prominent E-stop indicator when engaged", () => {
    const cockpit = new CockpitView(() => {});
    cockpit.applySnapshot(fullSnapshot());
    const ctx = new FakeContext();
    cockpit.render(ctx, 720, 640);
    expect(ctx.texts.some((t) => t.includes("E-STOP"))).toBe(true);
  });

  it("draws straight lane polylines for zero steering", () => {
    const cockpit = new CockpitView(() => {});
    cockpit.applySnapshot(fullSnapshot());
    const ctx = new FakeContext();
    cockpit.render(ctx, 720, 640);
    const strokes = ctx.ops.filter((op) => op === "stroke").length;
    expect(strokes).toBeGreaterThanOrEqual(2); // left and right lane lines
  });

  it("acks each displayed frame exactly once", () => {
    const acks: RenderAckFrame[] = [];
    const cockpit = new CockpitView((a) => acks.push(a));
    const ctx = new FakeContext();

    cockpit.applySnapshot(fullSnapshot(1000, 0));
    cockpit.render(ctx, 720, 640);
    cockpit.render(ctx, 720, 640); // same frame again: no second ack
    expect(acks.length).toBe(1);
    expect(acks[0]).toMatchObject({ camera: "front", frame_stamp_ns: 1000 });

    cockpit.applySnapshot(fullSnapshot(2000, 1));
    cockpit.render(ctx, 720, 640);
    expect(acks.length).toBe(2);
    expect(cockpit.framesDisplayed).toBe(2);
    expect(cockpit.acksSent).toBe(acks.length);
  });

  it("ack count equals displayed-frame count over a 30 s session", () => {
    // 40 Hz frame generation, 20 Hz snapshot stream, 60 Hz render loop:
    // the cockpit displays each snapshot's newest frame once.
    const acks: RenderAckFrame[] = [];
    const cockpit = new CockpitView((a) => acks.push(a));
    const ctx = new FakeContext();
    let frameSeq = 0;
    let stamp = 0;
    const snapshotPeriodMs = 50;
    const framePeriodMs = 25;
    const renderPeriodMs = 1000 / 60;
    let nextSnapshot = 0;
    let nextFrame = 0;
    let nextRender = 0;
    const distinctDisplayed = new Set<number>();
    for (let t = 0; t <= 30_000; t += 5) {
      if (t >= nextFrame) {
        nextFrame += framePeriodMs;
        frameSeq += 1;
        stamp = t * 1e6;
      }
      if (t >= nextSnapshot) {
        nextSnapshot += snapshotPeriodMs;
        cockpit.applySnapshot(fullSnapshot(stamp, frameSeq));
      }
      if (t >= nextRender) {
        nextRender += renderPeriodMs;
        const before = acks.length;
        cockpit.render(ctx, 720, 640);
        if (acks.length > before) distinctDisplayed.add(acks[acks.length - 1].frame_stamp_ns);
      }
    }
    expect(cockpit.acksSent).toBe(cockpit.framesDisplayed);
    expect(acks.length).toBe(distinctDisplayed.size);
    // Roughly one displayed frame per snapshot tick over 30 s.
    expect(acks.length).toBeGreaterThan(550);
    expect(acks.length).toBeLessThanOrEqual(601);
  });
});
