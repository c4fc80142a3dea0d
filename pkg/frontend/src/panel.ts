// Session panel logic: user actions become manager_event frames; the
// displayed state is only ever what the server pushed back.

import type { ManagerEventFrame, SessionFrame } from "./types.js";

export interface PanelView {
  state: string;
  pending: boolean;
  vehicleEndpoint: string;
  operatorEndpoint: string;
  inputDevice: string;
  controlMode: string;
  videoRateMode: string;
  lastRejection: string | null;
}

const INITIAL: PanelView = {
  state: "Idle",
  pending: false,
  vehicleEndpoint: "",
  operatorEndpoint: "",
  inputDevice: "",
  controlMode: "DirectControl",
  videoRateMode: "manual",
  lastRejection: null,
};

export class SessionPanel {
  private view: PanelView = { ...INITIAL };
  private listeners: Array<(view: PanelView) => void> = [];

  constructor(private send: (frame: ManagerEventFrame) => void) {}

  /** Server push: the only way the displayed state changes. */
  onServerSession(frame: SessionFrame): void {
    this.view = {
      state: frame.state,
      pending: frame.pending,
      vehicleEndpoint: frame.vehicle_endpoint ?? "",
      operatorEndpoint: frame.operator_endpoint ?? "",
      inputDevice: frame.input_device ?? "",
      controlMode: frame.control_mode,
      videoRateMode: frame.video_rate_mode,
      lastRejection: frame.rejected,
    };
    for (const listener of this.listeners) listener(this.view);
  }

  onChange(listener: (view: PanelView) => void): void {
    this.listeners.push(listener);
  }

  current(): PanelView {
    return { ...this.view };
  }

  setEndpoints(vehicle: string, operator: string): void {
    this.send({ type: "manager_event", event: "SetEndpoints", vehicle, operator });
  }

  connect(): void {
    this.send({ type: "manager_event", event: "Connect" });
  }

  start(): void {
    this.send({ type: "manager_event", event: "Start" });
  }

  stop(): void {
    this.send({ type: "manager_event", event: "Stop" });
  }

  disconnect(): void {
    this.send({ type: "manager_event", event: "Disconnect" });
  }

  selectInputDevice(device: string): void {
    this.send({ type: "manager_event", event: "SelectInputDevice", device });
  }

  selectControlMode(mode: string): void {
    this.send({ type: "manager_event", event: "SelectControlMode", mode });
  }

  selectVideoRateMode(mode: string): void {
    this.send({ type: "manager_event", event: "SelectVideoRateMode", mode });
  }
}
