// Browser entry: wires the transport, panel, joystick and renderer to
// the DOM. Connects to the operator node's UI socket over WebSocket.

import { CockpitView } from "./cockpit.js";
import { InputSampler, VirtualJoystick } from "./joystick.js";
import { SessionPanel } from "./panel.js";
import { WebSocketTransport } from "./transport.js";
import type { DownFrame } from "./types.js";

function element<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function main(): void {
  const canvas = element<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2D context unavailable");

  const statusEl = element<HTMLSpanElement>("status");
  const stateEl = element<HTMLSpanElement>("session-state");
  const rejectionEl = element<HTMLSpanElement>("rejection");
  const joystickBase = element<HTMLDivElement>("joystick");
  const knob = element<HTMLDivElement>("knob");

  let transport: WebSocketTransport | null = null;
  const joystick = new VirtualJoystick();
  let sampler: InputSampler | null = null;

  const cockpit = new CockpitView((ack) => transport?.send(ack));
  const panel = new SessionPanel((frame) => transport?.send(frame));

  panel.onChange((view) => {
    stateEl.textContent = view.state + (view.pending ? " (connecting)" : "");
    rejectionEl.textContent = view.lastRejection ?? "";
  });

  element<HTMLButtonElement>("btn-endpoints").addEventListener("click", () => {
    panel.setEndpoints(
      element<HTMLInputElement>("vehicle-endpoint").value,
      element<HTMLInputElement>("operator-endpoint").value,
    );
  });
  element<HTMLButtonElement>("btn-connect").addEventListener("click", () => panel.connect());
  element<HTMLButtonElement>("btn-start").addEventListener("click", () => panel.start());
  element<HTMLButtonElement>("btn-stop").addEventListener("click", () => panel.stop());
  element<HTMLButtonElement>("btn-disconnect").addEventListener("click", () => panel.disconnect());
  element<HTMLSelectElement>("input-device").addEventListener("change", (event) => {
    panel.selectInputDevice((event.target as HTMLSelectElement).value);
  });
  element<HTMLSelectElement>("rate-mode").addEventListener("change", (event) => {
    panel.selectVideoRateMode((event.target as HTMLSelectElement).value);
  });

  element<HTMLButtonElement>("btn-open").addEventListener("click", () => {
    transport?.close();
    const port = element<HTMLInputElement>("ui-port").value;
    const socket = new WebSocket(`ws://${location.hostname || "localhost"}:${port}/`);
    transport = new WebSocketTransport(socket);
    socket.addEventListener("open", () => {
      statusEl.textContent = "connected";
      sampler?.stop();
      sampler = new InputSampler(joystick, (frame) => transport?.send(frame));
      sampler.start();
    });
    transport.onFrame((frame: DownFrame) => {
      if (frame.type === "scene_snapshot") cockpit.applySnapshot(frame);
      else if (frame.type === "metrics") cockpit.applyMetrics(frame);
      else if (frame.type === "session") panel.onServerSession(frame);
    });
    transport.onClose(() => {
      statusEl.textContent = "disconnected";
      sampler?.stop();
    });
  });

  // Virtual joystick pointer handling.
  let pointerId: number | null = null;
  joystickBase.addEventListener("pointerdown", (event) => {
    pointerId = event.pointerId;
    joystickBase.setPointerCapture(pointerId);
    const rect = joystickBase.getBoundingClientRect();
    joystick.pointerDown(
      event.clientX - rect.left - rect.width / 2,
      event.clientY - rect.top - rect.height / 2,
    );
  });
  joystickBase.addEventListener("pointermove", (event) => {
    if (event.pointerId !== pointerId) return;
    const rect = joystickBase.getBoundingClientRect();
    const dx = event.clientX - rect.left - rect.width / 2;
    const dy = event.clientY - rect.top - rect.height / 2;
    joystick.pointerMove(dx, dy);
    const [ax, ay] = joystick.axes();
    knob.style.transform = `translate(${ax * 40}px, ${-ay * 40}px)`;
  });
  const release = (event: PointerEvent) => {
    if (event.pointerId !== pointerId) return;
    pointerId = null;
    joystick.pointerUp();
    knob.style.transform = "translate(0px, 0px)";
  };
  joystickBase.addEventListener("pointerup", release);
  joystickBase.addEventListener("pointercancel", release);

  window.addEventListener("keydown", (event) => joystick.keyDown(event.code));
  window.addEventListener("keyup", (event) => joystick.keyUp(event.code));

  const renderLoop = () => {
    cockpit.render(ctx, canvas.width, canvas.height);
    requestAnimationFrame(renderLoop);
  };
  requestAnimationFrame(renderLoop);
}

window.addEventListener("load", main);
