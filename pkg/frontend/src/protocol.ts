/**
 * Wire protocol: newline-delimited JSON messages exchanged with the
 * segmentation server (see ../../docs/protocol.md). The viewer never
 * computes geometry itself; every contour it shows arrived verbatim in a
 * `contour` reply.
 */

export type Point = [number, number];

export interface SegmentationParams {
  ray_count: number;
  nodes_per_ray: number;
  max_radius: number;
  seed_mean_radius: number;
  smoothness: number;
}

export const DEFAULT_PARAMS: SegmentationParams = {
  ray_count: 60,
  nodes_per_ray: 40,
  max_radius: 150.0,
  seed_mean_radius: 3.0,
  smoothness: 2,
};

export type Request =
  | { type: "load_image"; path: string; lesion_id?: string; seq?: number; timestamp_ms?: number }
  | { type: "set_seed"; x: number; y: number; seq?: number; timestamp_ms?: number }
  | { type: "drag_seed"; x: number; y: number; seq?: number; timestamp_ms?: number }
  | { type: "add_helper"; x: number; y: number; seq?: number; timestamp_ms?: number }
  | { type: "clear_helpers"; seq?: number; timestamp_ms?: number }
  | { type: "finalize"; satisfied: boolean; seq?: number; timestamp_ms?: number };

export interface ImageLoadedReply {
  type: "image_loaded";
  seq: number | null;
  lesion_id: string;
  width: number;
  height: number;
}

export interface ContourReply {
  type: "contour";
  seq: number | null;
  lesion_id: string;
  seed: Point;
  helpers: Point[];
  vertices: Point[];
  diameter_a_px: number;
  diameter_b_px: number;
  diameter_a_mm: number | null;
  diameter_b_mm: number | null;
  endpoints_a: [Point, Point];
  endpoints_b: [Point, Point];
  compute_ms: number;
}

export interface FinalizedReply {
  type: "finalized";
  seq: number | null;
  lesion_id: string;
  satisfied: boolean;
  time_semi_s: number;
  total_interaction_ms: number;
  diameter_a_px: number;
  diameter_b_px: number;
}

export interface ErrorReply {
  type: "error";
  seq: number | null;
  reason: string;
  detail: string;
}

export interface AckReply {
  type: "ack";
  seq: number | null;
  lesion_id: string | null;
}

export type Reply = ImageLoadedReply | ContourReply | FinalizedReply | ErrorReply | AckReply;

/** Reassemble newline-delimited JSON from arbitrary stream chunks. */
export class NdjsonDecoder {
  private buffer = "";

  push(chunk: string): unknown[] {
    this.buffer += chunk;
    const out: unknown[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line.length > 0) {
        out.push(JSON.parse(line));
      }
    }
    return out;
  }
}

export function encodeMessage(msg: Request): string {
  return JSON.stringify(msg) + "\n";
}

/**
 * Transport abstraction so the client runs over a TCP socket, a child
 * process's stdio, or an in-memory stub in tests.
 */
export interface Transport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: (err?: Error) => void): void;
  close(): void;
}

export class ProtocolClient {
  private nextSeq = 1;
  private replyHandlers: Array<(reply: Reply) => void> = [];
  private closeHandlers: Array<(err?: Error) => void> = [];
  private decoder = new NdjsonDecoder();
  closed = false;

  constructor(private transport: Transport) {
    transport.onLine((line) => {
      for (const obj of this.decoder.push(line + "\n")) {
        const reply = obj as Reply;
        for (const h of this.replyHandlers) h(reply);
      }
    });
    transport.onClose((err) => {
      this.closed = true;
      for (const h of this.closeHandlers) h(err);
    });
  }

  /** Send a request; assigns and returns its seq. */
  send(msg: Request): number {
    const seq = this.nextSeq++;
    this.transport.send(encodeMessage({ ...msg, seq }));
    return seq;
  }

  onReply(cb: (reply: Reply) => void): void {
    this.replyHandlers.push(cb);
  }

  onClose(cb: (err?: Error) => void): void {
    this.closeHandlers.push(cb);
  }

  close(): void {
    this.transport.close();
  }
}
