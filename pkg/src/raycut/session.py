"""Interactive segmentation session: newline-delimited JSON request/response
loop, event logging, and deterministic replay.

One server instance talks to one client over a pair of text streams (the
process's stdin/stdout or one accepted TCP connection; same code path).
Messages are single JSON objects per line with a ``type`` field; malformed
or failing messages produce an ``error`` reply and leave the session alive.

Drag bursts coalesce newest-wins: when several ``drag_seed`` messages are
already queued, intermediate positions are skipped and only the newest is
segmented and answered. Every reply echoes the request's ``seq`` (when sent)
and the seed it was computed for, so clients can match replies to inputs.
"""

from __future__ import annotations

import dataclasses
import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .imaging import GrayImage, Point2D, load_image
from .segmenter import SeedInput, SegmentationParams, SegmentationResult, segment

EVENT_KINDS = ("load", "set_seed", "drag_seed", "add_helper", "clear_helpers", "finalize")


@dataclass(frozen=True)
class SessionEvent:
    timestamp_ms: float
    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass
class SessionLog:
    """Ordered event record of one lesion's interactive segmentation."""

    lesion_id: str
    image_path: str
    params: SegmentationParams
    events: list[SessionEvent] = field(default_factory=list)
    satisfied: bool | None = None
    final_contour: list | None = None

    @property
    def total_interaction_ms(self) -> float:
        """Time from the first seed placement to finalize."""
        first_seed = next(e for e in self.events if e.kind == "set_seed")
        finalize = next(e for e in self.events if e.kind == "finalize")
        return finalize.timestamp_ms - first_seed.timestamp_ms

    def validate(self) -> None:
        stamps = [e.timestamp_ms for e in self.events]
        if stamps != sorted(stamps):
            raise ValueError("events are not time-ordered")
        if sum(1 for e in self.events if e.kind == "finalize") != 1:
            raise ValueError("log must contain exactly one finalize")

    def to_json(self) -> str:
        return json.dumps(
            {
                "lesion_id": self.lesion_id,
                "image_path": self.image_path,
                "params": dataclasses.asdict(self.params),
                "satisfied": self.satisfied,
                "total_interaction_ms": self.total_interaction_ms,
                "events": [dataclasses.asdict(e) for e in self.events],
                "final_contour": self.final_contour,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SessionLog":
        raw = json.loads(text)
        log = cls(
            lesion_id=raw["lesion_id"],
            image_path=raw["image_path"],
            params=SegmentationParams(**raw["params"]),
            events=[SessionEvent(e["timestamp_ms"], e["kind"], e["payload"]) for e in raw["events"]],
            satisfied=raw.get("satisfied"),
            final_contour=raw.get("final_contour"),
        )
        log.validate()
        return log


def final_seed_state(log: SessionLog) -> SeedInput:
    """Replay the event list to the seed/helper state in force at finalize."""
    seed = None
    helpers: list[Point2D] = []
    for event in log.events:
        if event.kind in ("set_seed", "drag_seed"):
            seed = Point2D(event.payload["x"], event.payload["y"])
        elif event.kind == "add_helper":
            helpers.append(Point2D(event.payload["x"], event.payload["y"]))
        elif event.kind == "clear_helpers":
            helpers.clear()
    if seed is None:
        raise ValueError("log contains no seed placement")
    return SeedInput(seed=seed, helpers=tuple(helpers))


def replay_log(log: SessionLog, image_root=None) -> SegmentationResult:
    """Re-run the finalize-time segmentation of a recorded session."""
    path = Path(log.image_path)
    if image_root is not None and not path.is_absolute():
        path = Path(image_root) / path
    img = load_image(path)
    return segment(img, final_seed_state(log), log.params)


class TransportClosed(Exception):
    """Peer went away; the session loop terminates."""


class SessionServer:
    """Request/response loop for one interactive client."""

    def __init__(self, params: SegmentationParams, log_path=None, clock=None):
        self.params = params
        self.log_path = Path(log_path) if log_path else None
        self.clock = clock or (lambda: time.monotonic() * 1000.0)
        self._reset_lesion()

    def _reset_lesion(self):
        self.image: GrayImage | None = None
        self.image_path: str | None = None
        self.lesion_id: str | None = None
        self.seed: Point2D | None = None
        self.helpers: list[Point2D] = []
        self.events: list[SessionEvent] = []
        self.last_result: SegmentationResult | None = None

    # -- message handling ---------------------------------------------------

    def handle(self, message: dict) -> dict:
        """Process one decoded message, returning the reply object."""
        seq = message.get("seq")
        try:
            kind = message.get("type")
            if kind == "load_image":
                return self._on_load(message)
            if kind in ("set_seed", "drag_seed"):
                return self._on_seed(message)
            if kind == "add_helper":
                return self._on_helper(message)
            if kind == "clear_helpers":
                return self._on_clear(message)
            if kind == "finalize":
                return self._on_finalize(message)
            return _error(seq, "unknown-message", f"unsupported type {kind!r}")
        except (ValueError, RuntimeError, OSError) as exc:
            return _error(seq, getattr(exc, "token", "invalid-input"), str(exc))

    def _stamp(self, message: dict) -> float:
        ts = message.get("timestamp_ms")
        return float(ts) if ts is not None else self.clock()

    def _record(self, message: dict, kind: str, payload: dict) -> None:
        self.events.append(SessionEvent(self._stamp(message), kind, payload))

    def _on_load(self, message: dict) -> dict:
        path = message["path"]
        image = load_image(path)
        self._reset_lesion()
        self.image = image
        self.image_path = str(path)
        self.lesion_id = message.get("lesion_id") or Path(path).stem
        self._record(message, "load", {"path": str(path)})
        return {
            "type": "image_loaded",
            "seq": message.get("seq"),
            "lesion_id": self.lesion_id,
            "width": image.width,
            "height": image.height,
        }

    def _require_image(self) -> GrayImage:
        if self.image is None:
            raise ValueError("no image loaded")
        return self.image

    def _segment_reply(self, seq) -> dict:
        img = self._require_image()
        if self.seed is None:
            raise ValueError("no seed placed")
        result = segment(img, SeedInput(self.seed, tuple(self.helpers)), self.params)
        self.last_result = result
        return {
            "type": "contour",
            "seq": seq,
            "lesion_id": self.lesion_id,
            "seed": [self.seed.x, self.seed.y],
            "helpers": [[h.x, h.y] for h in self.helpers],
            "vertices": result.contour.vertices.tolist(),
            "diameter_a_px": result.diameter_a,
            "diameter_b_px": result.diameter_b,
            "diameter_a_mm": result.diameter_a_mm,
            "diameter_b_mm": result.diameter_b_mm,
            "endpoints_a": [list(p) for p in result.endpoints_a],
            "endpoints_b": [list(p) for p in result.endpoints_b],
            "compute_ms": result.elapsed * 1000.0,
        }

    def _on_seed(self, message: dict) -> dict:
        self._require_image()
        seed = Point2D(float(message["x"]), float(message["y"]))
        kind = "set_seed" if message["type"] == "set_seed" else "drag_seed"
        if kind == "drag_seed" and not any(e.kind == "set_seed" for e in self.events):
            kind = "set_seed"  # a drag without a prior seed places one
        previous = self.seed
        self.seed = seed
        try:
            reply = self._segment_reply(message.get("seq"))
        except (ValueError, RuntimeError):
            self.seed = previous
            raise
        self._record(message, kind, {"x": seed.x, "y": seed.y})
        return reply

    def _on_helper(self, message: dict) -> dict:
        self._require_image()
        helper = Point2D(float(message["x"]), float(message["y"]))
        self.helpers.append(helper)
        try:
            reply = self._segment_reply(message.get("seq"))
        except (ValueError, RuntimeError):
            self.helpers.pop()
            raise
        self._record(message, "add_helper", {"x": helper.x, "y": helper.y})
        return reply

    def _on_clear(self, message: dict) -> dict:
        self._require_image()
        self.helpers.clear()
        self._record(message, "clear_helpers", {})
        if self.seed is None:
            return {"type": "ack", "seq": message.get("seq"), "lesion_id": self.lesion_id}
        return self._segment_reply(message.get("seq"))

    def _on_finalize(self, message: dict) -> dict:
        self._require_image()
        if self.last_result is None:
            raise ValueError("nothing segmented yet")
        satisfied = bool(message["satisfied"])
        self._record(message, "finalize", {"satisfied": satisfied})
        log = SessionLog(
            lesion_id=self.lesion_id,
            image_path=self.image_path,
            params=self.params,
            events=list(self.events),
            satisfied=satisfied,
            final_contour=self.last_result.contour.vertices.tolist(),
        )
        log.validate()
        if self.log_path is not None:
            with self.log_path.open("a") as fh:
                fh.write(log.to_json() + "\n")
        result = self.last_result
        reply = {
            "type": "finalized",
            "seq": message.get("seq"),
            "lesion_id": self.lesion_id,
            "satisfied": satisfied,
            "time_semi_s": log.total_interaction_ms / 1000.0,
            "total_interaction_ms": log.total_interaction_ms,
            "diameter_a_px": result.diameter_a,
            "diameter_b_px": result.diameter_b,
            "diameter_a_mm": result.diameter_a_mm,
            "diameter_b_mm": result.diameter_b_mm,
        }
        self._reset_lesion()
        return reply

    # -- transport loop -----------------------------------------------------

    def serve(self, reader, writer) -> None:
        """Run the loop until the peer closes the stream.

        ``reader``/``writer`` are text-mode file objects (stdin/stdout or a
        socket makefile pair).
        """
        inbox: queue.Queue = queue.Queue()
        sentinel = object()

        def pump():
            try:
                for line in reader:
                    inbox.put(line)
            except (OSError, ValueError):
                pass
            inbox.put(sentinel)

        thread = threading.Thread(target=pump, daemon=True)
        thread.start()

        closed = False
        while not closed:
            raw = [inbox.get()]
            while True:
                try:
                    raw.append(inbox.get_nowait())
                except queue.Empty:
                    break

            parsed = []  # ("eof" | "bad" | "msg", payload)
            for item in raw:
                if item is sentinel:
                    parsed.append(("eof", None))
                    break
                line = item.strip()
                if not line:
                    continue
                try:
                    message = json.loads(line)
                    if not isinstance(message, dict):
                        raise ValueError("message must be a JSON object")
                    parsed.append(("msg", message))
                except ValueError as exc:
                    parsed.append(("bad", str(exc)))

            replies = []
            for pos, (tag, payload) in enumerate(parsed):
                if tag == "eof":
                    closed = True
                    break
                if tag == "bad":
                    replies.append(_error(None, "bad-json", payload))
                    continue
                if payload.get("type") == "drag_seed" and pos + 1 < len(parsed):
                    nxt_tag, nxt = parsed[pos + 1]
                    if nxt_tag == "msg" and nxt.get("type") == "drag_seed":
                        continue  # newest-wins: a fresher drag is already queued
                replies.append(self.handle(payload))

            try:
                for reply in replies:
                    writer.write(json.dumps(reply) + "\n")
                writer.flush()
            except (OSError, ValueError) as exc:
                raise TransportClosed(str(exc)) from exc


def _error(seq, reason: str, detail: str) -> dict:
    return {"type": "error", "seq": seq, "reason": reason, "detail": detail}
