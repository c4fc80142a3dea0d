// Frame transport: one JSON document per line (TCP) or per message (WS).

import type { DownFrame, UpFrame } from "./types.js";

export interface FrameTransport {
  send(frame: UpFrame): void;
  onFrame(handler: (frame: DownFrame) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Splits a byte/string stream into newline-delimited JSON documents. */
export class LineDecoder {
  private buffer = "";

  push(chunk: string): DownFrame[] {
    this.buffer += chunk;
    const frames: DownFrame[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (!line) continue;
      try {
        frames.push(JSON.parse(line) as DownFrame);
      } catch {
        // Malformed lines are dropped; the stream stays usable.
      }
    }
    return frames;
  }
}

export function encodeFrame(frame: UpFrame): string {
  return JSON.stringify(frame) + "\n";
}

/** Browser transport over a WebSocket speaking one JSON frame per message. */
export class WebSocketTransport implements FrameTransport {
  private handlers: Array<(frame: DownFrame) => void> = [];
  private closers: Array<() => void> = [];

  constructor(private socket: WebSocket) {
    socket.addEventListener("message", (event) => {
      let doc: DownFrame;
      try {
        doc = JSON.parse(String(event.data)) as DownFrame;
      } catch {
        return;
      }
      for (const handler of this.handlers) handler(doc);
    });
    socket.addEventListener("close", () => {
      for (const closer of this.closers) closer();
    });
  }

  send(frame: UpFrame): void {
    if (this.socket.readyState === 1) {
      this.socket.send(JSON.stringify(frame));
    }
  }

  onFrame(handler: (frame: DownFrame) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closers.push(handler);
  }

  close(): void {
    this.socket.close();
  }
}
