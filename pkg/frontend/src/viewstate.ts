/**
 * Viewer-side state: current image, seed and helpers, the latest contour
 * reply (kept verbatim), the satisfaction tri-state, the stopwatch, and the
 * event log exported in the exact format the batch harness replays.
 */

import type { ContourReply, Point, SegmentationParams } from "./protocol.js";

export type Satisfied = "undecided" | "yes" | "no";

export interface ViewState {
  imagePath: string | null;
  lesionId: string | null;
  imageWidth: number;
  imageHeight: number;
  seed: Point | null;
  helpers: Point[];
  /** Latest contour reply, verbatim; null until a seed exists. */
  contour: ContourReply | null;
  satisfied: Satisfied;
  stopwatchStartMs: number | null;
  stopwatchStopMs: number | null;
  banner: string | null;
  finalized: boolean;
}

export function emptyViewState(): ViewState {
  return {
    imagePath: null,
    lesionId: null,
    imageWidth: 0,
    imageHeight: 0,
    seed: null,
    helpers: [],
    contour: null,
    satisfied: "undecided",
    stopwatchStartMs: null,
    stopwatchStopMs: null,
    banner: null,
    finalized: false,
  };
}

/** Elapsed interaction time shown next to the image. */
export function stopwatchMs(view: ViewState, nowMs: number): number {
  if (view.stopwatchStartMs === null) return 0;
  const end = view.stopwatchStopMs ?? nowMs;
  return end - view.stopwatchStartMs;
}

export type EventKind =
  | "load"
  | "set_seed"
  | "drag_seed"
  | "add_helper"
  | "clear_helpers"
  | "finalize";

export interface SessionEvent {
  timestamp_ms: number;
  kind: EventKind;
  payload: Record<string, unknown>;
}

/**
 * Accumulates events in the schema the harness writes and replays:
 * one JSON object per finalized lesion.
 */
export class SessionLogBuilder {
  private events: SessionEvent[] = [];

  constructor(
    private lesionId: string,
    private imagePath: string,
    private params: SegmentationParams,
  ) {}

  record(kind: EventKind, timestampMs: number, payload: Record<string, unknown> = {}): void {
    this.events.push({ timestamp_ms: timestampMs, kind, payload });
  }

  get firstSeedMs(): number | null {
    const first = this.events.find((e) => e.kind === "set_seed");
    return first ? first.timestamp_ms : null;
  }

  export(satisfied: boolean, finalContour: Point[]): string {
    const finalize = this.events.filter((e) => e.kind === "finalize");
    if (finalize.length !== 1) {
      throw new Error(`log must contain exactly one finalize, has ${finalize.length}`);
    }
    const firstSeed = this.firstSeedMs;
    if (firstSeed === null) {
      throw new Error("log contains no seed placement");
    }
    for (let i = 1; i < this.events.length; i++) {
      if (this.events[i].timestamp_ms < this.events[i - 1].timestamp_ms) {
        throw new Error("events are not time-ordered");
      }
    }
    const doc = {
      lesion_id: this.lesionId,
      image_path: this.imagePath,
      params: this.params,
      satisfied,
      total_interaction_ms: finalize[0].timestamp_ms - firstSeed,
      events: this.events,
      final_contour: finalContour,
    };
    return JSON.stringify(doc);
  }
}
