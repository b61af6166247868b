export {
  DEFAULT_PARAMS,
  NdjsonDecoder,
  ProtocolClient,
  encodeMessage,
} from "./protocol.js";
export type {
  ContourReply,
  ErrorReply,
  FinalizedReply,
  ImageLoadedReply,
  Point,
  Reply,
  Request,
  SegmentationParams,
  Transport,
} from "./protocol.js";
export { TcpTransport } from "./tcp.js";
export { SessionLogBuilder, emptyViewState, stopwatchMs } from "./viewstate.js";
export type { EventKind, Satisfied, SessionEvent, ViewState } from "./viewstate.js";
export { DRAG_THROTTLE_MS, InteractionController } from "./controller.js";
export type { ControllerOptions, Scheduler } from "./controller.js";
export { IDENTITY_VIEWPORT, renderOverlay } from "./render.js";
export type { Canvas2DLike, Viewport } from "./render.js";
export { Worklist } from "./worklist.js";
export type { WorklistEntry } from "./worklist.js";
export { decodePgm, toRgba } from "./pgm.js";
export type { PgmImage } from "./pgm.js";
