/**
 * Offline queue for thanks gestures. A click that cannot reach the
 * gateway is persisted, not dropped; flush() retries everything in order
 * and keeps whatever still fails. Events sent always equal clicks made.
 */

import type { GatewayClient, ThanksPayload, ThanksReceipt } from "./gateway.js";
import type { KeyValueStore } from "./storage.js";

const QUEUE_KEY = "thanksd.pending_thanks";

export class OfflineQueue {
  constructor(private readonly store: KeyValueStore) {}

  pending(): ThanksPayload[] {
    const raw = this.store.get(QUEUE_KEY);
    if (!raw) return [];
    try {
      return JSON.parse(raw);
    } catch {
      return [];
    }
  }

  get length(): number {
    return this.pending().length;
  }

  enqueue(payload: ThanksPayload): void {
    const items = this.pending();
    items.push(payload);
    this.store.set(QUEUE_KEY, JSON.stringify(items));
  }

  /** Retry every queued payload; successful ones leave the queue, the
   * rest stay in order. Returns the receipts for what went through. */
  async flush(gateway: GatewayClient): Promise<ThanksReceipt[]> {
    const items = this.pending();
    const remaining: ThanksPayload[] = [];
    const receipts: ThanksReceipt[] = [];
    for (const item of items) {
      try {
        receipts.push(await gateway.sayThanks(item));
      } catch {
        remaining.push(item);
      }
    }
    this.store.set(QUEUE_KEY, JSON.stringify(remaining));
    return receipts;
  }
}
