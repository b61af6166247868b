/**
 * Pointer/keyboard interaction driving the protocol: primary click places
 * the seed, dragging streams throttled seed moves, secondary click adds a
 * helper seed on the border, keys clear helpers, record the satisfaction
 * judgment (which finalizes), and advance the worklist.
 *
 * Drags are throttled client-side (>= 34 ms spacing, at most 30 messages/s)
 * with trailing-edge delivery, and at most one drag request is in flight;
 * the newest pending position always replaces older ones, so the final
 * pointer position is always sent. The server coalesces on its side too.
 *
 * A lost connection raises a banner and keeps the unsent work: on
 * reconnect the controller replays the lesion state (image, seed, helpers)
 * and retries a pending finalize, so a judgment is never silently dropped.
 */

import type {
  ContourReply,
  ProtocolClient,
  Reply,
  SegmentationParams,
} from "./protocol.js";
import { ProtocolClient as Client } from "./protocol.js";
import type { Transport } from "./protocol.js";
import { SessionLogBuilder, ViewState, emptyViewState } from "./viewstate.js";

export const DRAG_THROTTLE_MS = 34; // ceil(1000 / s) <= 30 requires s >= 34

export interface Scheduler {
  set(cb: () => void, delayMs: number): unknown;
  clear(handle: unknown): void;
}

const realScheduler: Scheduler = {
  set: (cb, delay) => setTimeout(cb, delay),
  clear: (handle) => clearTimeout(handle as NodeJS.Timeout),
};

export interface ControllerOptions {
  params: SegmentationParams;
  clock?: () => number;
  scheduler?: Scheduler;
  /** Receives each finalized lesion's session-log JSON line. */
  logSink?: (json: string) => void;
  /** Supplies the next worklist entry, or null at the end. */
  nextLesion?: () => { path: string; lesionId?: string } | null;
}

export class InteractionController {
  view: ViewState = emptyViewState();

  private client: ProtocolClient | null = null;
  private clock: () => number;
  private scheduler: Scheduler;
  private log: SessionLogBuilder | null = null;

  private dragging = false;
  private lastDragSentMs = -Infinity;
  private dragInFlightSeq: number | null = null;
  private pendingDrag: [number, number] | null = null;
  private flushHandle: unknown = null;
  private lastAppliedSeq = -1;
  private pendingFinalize: boolean | null = null;
  private sentDragCount = 0;
  private contourUpdateCount = 0;
  /** Clock times of every drag message sent, for rate audits. */
  readonly dragSendTimes: number[] = [];

  constructor(private options: ControllerOptions) {
    this.clock = options.clock ?? (() => performance.now());
    this.scheduler = options.scheduler ?? realScheduler;
  }

  /** Number of drag messages actually sent (for rate audits). */
  get dragMessagesSent(): number {
    return this.sentDragCount;
  }

  /** Number of contour refreshes applied to the view. */
  get contourUpdates(): number {
    return this.contourUpdateCount;
  }

  attach(transport: Transport): void {
    this.client = new Client(transport);
    this.client.onReply((reply) => this.handleReply(reply));
    this.client.onClose(() => {
      this.view.banner = "connection lost - reconnecting";
      this.client = null;
    });
    if (this.view.imagePath !== null) {
      this.replayLesionState();
    }
  }

  private requireClient(): ProtocolClient {
    if (this.client === null || this.client.closed) {
      throw new Error("not connected");
    }
    return this.client;
  }

  // -- outgoing ------------------------------------------------------------

  loadImage(path: string, lesionId?: string): void {
    const ts = this.clock();
    this.requireClient().send({ type: "load_image", path, lesion_id: lesionId, timestamp_ms: ts });
    this.view = emptyViewState();
    this.view.imagePath = path;
    this.log = null; // rebuilt once image_loaded names the lesion
    this.resetDragState();
    this.pendingFinalize = null;
  }

  pointerDown(button: "primary" | "secondary", x: number, y: number): void {
    if (this.view.imagePath === null || this.view.finalized) return;
    if (button === "secondary") {
      const ts = this.clock();
      this.requireClient().send({ type: "add_helper", x, y, timestamp_ms: ts });
      this.view.helpers.push([x, y]);
      this.log?.record("add_helper", ts, { x, y });
      return;
    }
    this.dragging = true;
    const ts = this.clock();
    this.requireClient().send({ type: "set_seed", x, y, timestamp_ms: ts });
    this.view.seed = [x, y];
    if (this.view.stopwatchStartMs === null) {
      this.view.stopwatchStartMs = ts;
    }
    this.log?.record("set_seed", ts, { x, y });
  }

  pointerMove(x: number, y: number): void {
    if (!this.dragging || this.view.finalized) return;
    const now = this.clock();
    const spaced = now - this.lastDragSentMs >= DRAG_THROTTLE_MS;
    if (spaced && this.dragInFlightSeq === null) {
      this.sendDrag(x, y, now);
    } else {
      this.pendingDrag = [x, y]; // newest wins
      if (this.flushHandle === null) {
        const delay = Math.max(this.lastDragSentMs + DRAG_THROTTLE_MS - now, 1);
        this.flushHandle = this.scheduler.set(() => {
          this.flushHandle = null;
          this.flushPendingDrag();
        }, delay);
      }
    }
  }

  pointerUp(): void {
    this.dragging = false;
    // trailing flush keeps the final position; the timer or next reply sends it
  }

  keyPress(key: "clear_helpers" | "satisfied_yes" | "satisfied_no" | "next_lesion"): void {
    if (key === "clear_helpers") {
      if (this.view.imagePath === null || this.view.finalized) return;
      const ts = this.clock();
      this.requireClient().send({ type: "clear_helpers", timestamp_ms: ts });
      this.view.helpers = [];
      this.log?.record("clear_helpers", ts);
      return;
    }
    if (key === "satisfied_yes" || key === "satisfied_no") {
      if (this.view.seed === null || this.view.finalized) return;
      const satisfied = key === "satisfied_yes";
      this.view.satisfied = satisfied ? "yes" : "no";
      this.sendFinalize(satisfied);
      return;
    }
    // next_lesion: finalize must have completed, then load the next entry
    if (!this.view.finalized) {
      this.view.banner = "judge satisfaction (yes/no) before the next lesion";
      return;
    }
    const next = this.options.nextLesion?.();
    if (next) {
      this.loadImage(next.path, next.lesionId);
    } else {
      this.view.banner = "worklist finished";
    }
  }

  private sendFinalize(satisfied: boolean): void {
    const ts = this.clock();
    this.view.stopwatchStopMs = ts;
    this.log?.record("finalize", ts, { satisfied });
    this.pendingFinalize = satisfied;
    try {
      this.requireClient().send({ type: "finalize", satisfied, timestamp_ms: ts });
    } catch {
      this.view.banner = "connection lost - finalize queued for retry";
    }
  }

  private sendDrag(x: number, y: number, now: number): void {
    this.lastDragSentMs = now;
    this.sentDragCount += 1;
    this.dragSendTimes.push(now);
    const seq = this.requireClient().send({ type: "drag_seed", x, y, timestamp_ms: now });
    this.dragInFlightSeq = seq;
    this.view.seed = [x, y];
    this.log?.record("drag_seed", now, { x, y });
  }

  private flushPendingDrag(): void {
    if (this.pendingDrag === null || this.view.finalized) return;
    const now = this.clock();
    if (now - this.lastDragSentMs >= DRAG_THROTTLE_MS && this.dragInFlightSeq === null) {
      const [x, y] = this.pendingDrag;
      this.pendingDrag = null;
      this.sendDrag(x, y, now);
    } else if (this.flushHandle === null) {
      const delay = Math.max(this.lastDragSentMs + DRAG_THROTTLE_MS - now, 1);
      this.flushHandle = this.scheduler.set(() => {
        this.flushHandle = null;
        this.flushPendingDrag();
      }, delay);
    }
  }

  /** Re-establish server-side lesion state after a reconnect. */
  private replayLesionState(): void {
    const path = this.view.imagePath;
    if (path === null || this.client === null) return;
    const ts = this.clock();
    this.client.send({ type: "load_image", path, lesion_id: this.view.lesionId ?? undefined, timestamp_ms: ts });
    if (this.view.seed !== null) {
      this.client.send({ type: "set_seed", x: this.view.seed[0], y: this.view.seed[1], timestamp_ms: ts });
      for (const [hx, hy] of this.view.helpers) {
        this.client.send({ type: "add_helper", x: hx, y: hy, timestamp_ms: ts });
      }
      if (this.pendingFinalize !== null && !this.view.finalized) {
        this.client.send({ type: "finalize", satisfied: this.pendingFinalize, timestamp_ms: ts });
      }
    }
    this.view.banner = null;
  }

  private resetDragState(): void {
    this.dragging = false;
    this.lastDragSentMs = -Infinity;
    this.dragInFlightSeq = null;
    this.pendingDrag = null;
    if (this.flushHandle !== null) {
      this.scheduler.clear(this.flushHandle);
      this.flushHandle = null;
    }
    this.lastAppliedSeq = -1;
  }

  // -- incoming ------------------------------------------------------------

  private handleReply(reply: Reply): void {
    switch (reply.type) {
      case "image_loaded": {
        this.view.lesionId = reply.lesion_id;
        this.view.imageWidth = reply.width;
        this.view.imageHeight = reply.height;
        if (this.view.imagePath !== null && this.log === null) {
          this.log = new SessionLogBuilder(reply.lesion_id, this.view.imagePath, this.options.params);
          this.log.record("load", this.clock(), { path: this.view.imagePath });
        }
        break;
      }
      case "contour": {
        const seq = reply.seq ?? -1;
        if (seq === this.dragInFlightSeq) {
          this.dragInFlightSeq = null;
        }
        if (seq >= this.lastAppliedSeq) {
          this.lastAppliedSeq = seq;
          this.view.contour = reply;
          this.view.seed = reply.seed;
          this.view.helpers = reply.helpers.map((p) => [p[0], p[1]]);
          this.contourUpdateCount += 1;
        }
        if (this.pendingDrag !== null) {
          this.flushPendingDrag();
        }
        break;
      }
      case "finalized": {
        this.view.finalized = true;
        this.pendingFinalize = null;
        if (this.log && this.view.contour) {
          const json = this.log.export(reply.satisfied, this.view.contour.vertices);
          this.options.logSink?.(json);
        }
        break;
      }
      case "error": {
        if (reply.seq !== null && reply.seq === this.dragInFlightSeq) {
          this.dragInFlightSeq = null;
        }
        this.view.banner = `${reply.reason}: ${reply.detail}`;
        break;
      }
      case "ack":
        break;
    }
  }
}
