// Cockpit conformance, exercised as one scripted 30 s interactive session
// under fake timers: joystick bounds and rate, full entity-kind coverage,
// ack accounting, and server-authoritative panel state.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { CockpitView, type Draw2D } from "../src/cockpit.js";
import { InputSampler, VirtualJoystick } from "../src/joystick.js";
import { SessionPanel } from "../src/panel.js";
import type {
  EntityKind,
  InputSampleFrame,
  RenderAckFrame,
  SceneSnapshotFrame,
  SessionFrame,
  UpFrame,
} from "../src/types.js";

class NullContext implements Draw2D {
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 1;
  font = "";
  clearRect() {}
  save() {}
  restore() {}
  translate() {}
  rotate() {}
  beginPath() {}
  moveTo() {}
  lineTo() {}
  stroke() {}
  fill() {}
  fillRect() {}
  strokeRect() {}
  arc() {}
  fillText() {}
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

function snapshot(stamp: number, seq: number): SceneSnapshotFrame {
  const base = { transform: { x: 0, y: 0, yaw: 0 }, data: {}, style: {} };
  return {
    type: "scene_snapshot",
    t_ns: stamp,
    entities: [
      { id: "scene_camera", kind: "SceneCamera", ...base },
      { id: "frame:laser", kind: "CoordinateFrame", ...base, data: { frame_id: "laser" } },
      { id: "vehicle", kind: "VehicleModel", ...base, data: { estop: false, mode: "Normal" } },
      { id: "speedometer", kind: "Speedometer", ...base, data: { actual_velocity: 1 } },
      {
        id: "video:front",
        kind: "VideoCanvas",
        ...base,
        data: { camera_id: "front", seq, stamp_ns: stamp, width: 924, height: 520 },
      },
      { id: "scan:front", kind: "LaserScanView", ...base, data: { points: [[3, 0]] } },
      {
        id: "vehicle_lane",
        kind: "VehicleLane",
        ...base,
        data: { left: [[2.9, 0.8], [10, 0.8]], right: [[2.9, -0.8], [10, -0.8]] },
      },
      { id: "top_view", kind: "TopView", ...base, style: { span_m: 60 } },
    ],
  };
}

function serverSession(state: SessionFrame["state"], rejected: string | null = null): SessionFrame {
  return {
    type: "session",
    state,
    pending: false,
    vehicle_endpoint: "v",
    operator_endpoint: "o",
    input_device: "virtual_joystick",
    control_mode: "DirectControl",
    video_rate_mode: "manual",
    rejected,
  };
}

describe("cockpit conformance over a 30 s interactive session", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("meets the joystick, rendering, ack and panel criteria", () => {
    const sent: UpFrame[] = [];
    const samples: InputSampleFrame[] = [];
    const acks: RenderAckFrame[] = [];

    const joystick = new VirtualJoystick();
    const sampler = new InputSampler(joystick, (f) => {
      sent.push(f);
      samples.push(f);
    });
    const cockpit = new CockpitView((a) => {
      sent.push(a);
      acks.push(a);
    });
    const panel = new SessionPanel((f) => sent.push(f));
    const displayedStates: string[] = [];
    panel.onChange((view) => displayedStates.push(view.state));

    // Server-pushed session trajectory, applied along the timeline.
    const pushes: Array<[number, SessionFrame]> = [
      [0, serverSession("Idle")],
      [200, serverSession("Configured")],
      [400, serverSession("Connected")],
      [600, serverSession("Teleoperating")],
      [15_000, serverSession("Connected")],
      [15_200, serverSession("Connected", "Stop is only legal in Teleoperating")],
      [16_000, serverSession("Teleoperating")],
    ];

    sampler.start();
    const ctx = new NullContext();
    let frameSeq = 0;
    let frameStamp = 0;
    let pushIdx = 0;
    const totalMs = 30_000;
    for (let t = 0; t < totalMs; t += 5) {
      vi.advanceTimersByTime(5);
      while (pushIdx < pushes.length && pushes[pushIdx][0] <= t) {
        panel.onServerSession(pushes[pushIdx][1]);
        pushIdx += 1;
      }
      if (t % 25 === 0) {
        frameSeq += 1;
        frameStamp = (t + 1) * 1e6;
      }
      if (t % 50 === 0) cockpit.applySnapshot(snapshot(frameStamp, frameSeq));
      if (t % 35 === 0) {
        // Wiggle the stick while teleoperating.
        joystick.pointerDown(Math.sin(t / 500) * 80, Math.cos(t / 700) * 80);
      }
      if (t % 15 === 0) cockpit.render(ctx, 720, 640); // ~66 Hz render loop
    }
    sampler.stop();

    // Joystick: axes within [-1, 1], emitted at 50 +/- 2 Hz.
    const rate = samples.length / 30;
    expect(rate).toBeGreaterThanOrEqual(48);
    expect(rate).toBeLessThanOrEqual(52);
    for (const sample of samples) {
      for (const axis of sample.axes) {
        expect(axis).toBeGreaterThanOrEqual(-1);
        expect(axis).toBeLessThanOrEqual(1);
      }
    }

    // Rendering: every entity kind in the snapshot drawn.
    const kinds = cockpit.renderedKinds();
    for (const kind of ALL_KINDS) expect(kinds.has(kind), kind).toBe(true);

    // Ack accounting: one render_ack per displayed frame, no dupes.
    expect(cockpit.acksSent).toBe(cockpit.framesDisplayed);
    expect(acks.length).toBe(cockpit.acksSent);
    expect(new Set(acks.map((a) => a.frame_stamp_ns)).size).toBe(acks.length);
    expect(acks.length).toBeGreaterThan(500);

    // Panel: displayed states are exactly the server-pushed sequence.
    expect(displayedStates).toEqual(pushes.map(([, frame]) => frame.state));
    expect(panel.current().state).toBe("Teleoperating");
  });
});
