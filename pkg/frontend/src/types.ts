// Wire types for the operator node's UI socket (JSON frames).

export interface EntityTransform {
  x: number;
  y: number;
  yaw: number;
}

export type EntityKind =
  | "SceneCamera"
  | "CoordinateFrame"
  | "VehicleModel"
  | "Speedometer"
  | "VideoCanvas"
  | "LaserScanView"
  | "VehicleLane"
  | "TopView";

export interface SceneEntity {
  id: string;
  kind: EntityKind;
  transform: EntityTransform;
  data: Record<string, unknown>;
  style: Record<string, unknown>;
}

export interface SceneSnapshotFrame {
  type: "scene_snapshot";
  t_ns: number;
  entities: SceneEntity[];
}

export interface MetricsFrame {
  type: "metrics";
  actuation_latency_ms: number | null;
  swa_rmse: number | null;
  velocity_rmse: number | null;
  command_rate_hz: number | null;
  g2g_ms: Record<string, number>;
}

export interface SessionFrame {
  type: "session";
  state: "Idle" | "Configured" | "Connected" | "Teleoperating" | "ConnectionLost";
  pending: boolean;
  vehicle_endpoint: string | null;
  operator_endpoint: string | null;
  input_device: string | null;
  control_mode: string;
  video_rate_mode: string;
  rejected: string | null;
}

export type DownFrame = SceneSnapshotFrame | MetricsFrame | SessionFrame;

export interface InputSampleFrame {
  type: "input_sample";
  device: string;
  axes: number[];
  buttons: boolean[];
  stamp_ns: number;
}

export interface ManagerEventFrame {
  type: "manager_event";
  event: string;
  vehicle?: string;
  operator?: string;
  device?: string;
  mode?: string;
}

export interface RenderAckFrame {
  type: "render_ack";
  camera: string;
  frame_stamp_ns: number;
}

export type UpFrame = InputSampleFrame | ManagerEventFrame | RenderAckFrame;
