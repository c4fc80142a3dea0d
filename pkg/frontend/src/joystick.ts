// Virtual joystick: pointer drags and keyboard ramping, no hardware needed.
//
// Axis 0 is steering (left = -1), axis 1 is throttle. Pointer input maps
// the drag vector inside the base radius; arrow keys ramp their axis at a
// configured rate per second and decay back when released. Samples are
// emitted at the command rate with axes clamped to [-1, 1].

import type { InputSampleFrame } from "./types.js";

export interface JoystickConfig {
  baseRadius: number;
  keyRampPerS: number;
  buttonCount: number;
  deviceId: string;
}

export const DEFAULT_CONFIG: JoystickConfig = {
  baseRadius: 60,
  keyRampPerS: 2.0,
  buttonCount: 5,
  deviceId: "virtual_joystick",
};

const KEY_AXES: Record<string, { axis: 0 | 1; sign: 1 | -1 }> = {
  ArrowLeft: { axis: 0, sign: -1 },
  ArrowRight: { axis: 0, sign: 1 },
  ArrowUp: { axis: 1, sign: 1 },
  ArrowDown: { axis: 1, sign: -1 },
};

// Button order matches the default server-side mapping:
// gear_up, gear_down, indicator_left, indicator_right, estop.
const KEY_BUTTONS: Record<string, number> = {
  KeyW: 0,
  KeyS: 1,
  KeyQ: 2,
  KeyE: 3,
  Space: 4,
};

function clamp(v: number): number {
  return Math.min(1, Math.max(-1, v));
}

export class VirtualJoystick {
  private dragging = false;
  private dragAxes: [number, number] = [0, 0];
  private keyAxes: [number, number] = [0, 0];
  private heldKeys = new Set<string>();
  private buttonsDown: boolean[];

  constructor(private config: JoystickConfig = DEFAULT_CONFIG) {
    this.buttonsDown = new Array(config.buttonCount).fill(false);
  }

  pointerDown(dx: number, dy: number): void {
    this.dragging = true;
    this.pointerMove(dx, dy);
  }

  /** dx/dy are offsets from the joystick base center, +y downward. */
  pointerMove(dx: number, dy: number): void {
    if (!this.dragging) return;
    const r = this.config.baseRadius;
    const length = Math.hypot(dx, dy);
    if (length > r) {
      dx = (dx / length) * r;
      dy = (dy / length) * r;
    }
    this.dragAxes = [clamp(dx / r), clamp(-dy / r)];
  }

  pointerUp(): void {
    this.dragging = false;
    this.dragAxes = [0, 0];
  }

  keyDown(code: string): void {
    if (code in KEY_AXES) this.heldKeys.add(code);
    const button = KEY_BUTTONS[code];
    if (button !== undefined) this.buttonsDown[button] = true;
  }

  keyUp(code: string): void {
    this.heldKeys.delete(code);
    const button = KEY_BUTTONS[code];
    if (button !== undefined) this.buttonsDown[button] = false;
  }

  /** Advance keyboard ramping by dt seconds. */
  tick(dtS: number): void {
    const step = this.config.keyRampPerS * dtS;
    for (const axis of [0, 1] as const) {
      let direction = 0;
      for (const code of this.heldKeys) {
        const bind = KEY_AXES[code];
        if (bind && bind.axis === axis) direction += bind.sign;
      }
      if (direction !== 0) {
        this.keyAxes[axis] = clamp(this.keyAxes[axis] + direction * step);
      } else {
        // Released keys decay back toward neutral at the same rate.
        const value = this.keyAxes[axis];
        const magnitude = Math.max(0, Math.abs(value) - step);
        this.keyAxes[axis] = Math.sign(value) * magnitude;
      }
    }
  }

  axes(): [number, number] {
    // Pointer input dominates while dragging; keys otherwise.
    const merged: [number, number] = this.dragging
      ? [...this.dragAxes]
      : [
          clamp(this.dragAxes[0] + this.keyAxes[0]),
          clamp(this.dragAxes[1] + this.keyAxes[1]),
        ];
    return [clamp(merged[0]), clamp(merged[1])];
  }

  buttons(): boolean[] {
    return [...this.buttonsDown];
  }

  sample(stampNs: number): InputSampleFrame {
    return {
      type: "input_sample",
      device: this.config.deviceId,
      axes: this.axes(),
      buttons: this.buttons(),
      stamp_ns: stampNs,
    };
  }
}

/** Emits joystick samples at the command rate until stopped. */
export class InputSampler {
  private timer: ReturnType<typeof setInterval> | null = null;
  sent = 0;

  constructor(
    private joystick: VirtualJoystick,
    private send: (frame: InputSampleFrame) => void,
    private rateHz = 50,
    private now: () => number = () => Date.now(),
  ) {}

  start(): void {
    if (this.timer !== null) return;
    const periodMs = 1000 / this.rateHz;
    let last = this.now();
    this.timer = setInterval(() => {
      const now = this.now();
      this.joystick.tick((now - last) / 1000);
      last = now;
      this.send(this.joystick.sample(now * 1e6));
      this.sent += 1;
    }, periodMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
