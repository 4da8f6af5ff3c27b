// Thin WebSocket wrapper for the /stream protocol.

import { SelectMessage, ServerMessage, Snapshot, TrackingMode } from "./types.js";

export interface StreamHandlers {
  onSnapshot: (snapshot: Snapshot) => void;
  onAck?: (seq: number, mode: TrackingMode, ids: string[]) => void;
  onError?: (message: string) => void;
  onClose?: () => void;
}

type WebSocketLike = Pick<WebSocket, "send" | "close"> & {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
};

export function streamUrl(loc: { protocol: string; host: string }): string {
  const proto = loc.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${loc.host}/stream`;
}

export class StreamClient {
  private ws: WebSocketLike;
  private lastSeq = 0;

  constructor(
    private handlers: StreamHandlers,
    socket: WebSocketLike,
  ) {
    this.ws = socket;
    this.ws.onmessage = (ev) => this.dispatch(String(ev.data));
    this.ws.onclose = () => this.handlers.onClose?.();
  }

  static connect(handlers: StreamHandlers, url?: string): StreamClient {
    const ws = new WebSocket(url ?? streamUrl(location));
    // the DOM handler signatures are wider than the slice we use
    return new StreamClient(handlers, ws as unknown as WebSocketLike);
  }

  private dispatch(raw: string): void {
    let message: ServerMessage;
    try {
      message = JSON.parse(raw) as ServerMessage;
    } catch {
      return; // not ours to crash the render loop over
    }
    if (message.kind === "snapshot") {
      this.lastSeq = message.seq;
      this.handlers.onSnapshot(message);
    } else if (message.kind === "ack") {
      this.handlers.onAck?.(message.seq, message.mode, message.ids);
    } else if (message.kind === "error") {
      this.handlers.onError?.(message.message);
    }
  }

  select(mode: TrackingMode, ids: string[]): SelectMessage {
    const message: SelectMessage = {
      kind: "select",
      seq: this.lastSeq,
      mode,
      ids: [...ids].sort(),
    };
    this.ws.send(JSON.stringify(message));
    return message;
  }

  close(): void {
    this.ws.close();
  }
}
