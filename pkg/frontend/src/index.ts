export {
  GatewayClient,
  GatewayError,
  type Anchor,
  type AnchorScope,
  type AnchorTarget,
  type Language,
  type ThanksPayload,
  type ThanksReceipt,
} from "./gateway.js";
export {
  AnchorManager,
  languageForPath,
  targetLabel,
  type AnchorDecoration,
  type DocumentSnapshot,
} from "./anchors.js";
export { OfflineQueue } from "./queue.js";
export { JsonFileStore, MemoryStore, installationId, type KeyValueStore } from "./storage.js";
export {
  Companion,
  type CompanionOptions,
  type CompanionStatus,
  type SayThanksResult,
} from "./companion.js";
