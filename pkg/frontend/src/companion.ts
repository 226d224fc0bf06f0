/**
 * Ties the pieces together: scan-backed decorations, the say-thanks
 * gesture with its Say More follow-up, and the offline queue. The editor
 * adapter supplies three callbacks (decorations, status, URL opener) and
 * forwards document events; everything else lives here.
 */

import { AnchorManager, type AnchorDecoration, type DocumentSnapshot } from "./anchors.js";
import { GatewayClient, type ThanksPayload, type ThanksReceipt } from "./gateway.js";
import { OfflineQueue } from "./queue.js";
import { installationId, type KeyValueStore } from "./storage.js";

export interface CompanionStatus {
  online: boolean;
  pendingThanks: number;
}

export interface CompanionOptions {
  gatewayBaseUrl: string;
  store: KeyValueStore;
  onDecorations: (decorations: AnchorDecoration[]) => void;
  onStatus?: (status: CompanionStatus) => void;
  openUrl?: (url: string) => void;
  fetchImpl?: typeof fetch;
  debounceMs?: number;
}

export interface SayThanksResult {
  delivered: boolean;
  receipt?: ThanksReceipt;
}

export class Companion {
  readonly gateway: GatewayClient;
  readonly anchors: AnchorManager;
  readonly queue: OfflineQueue;
  private readonly store: KeyValueStore;
  private online = true;
  private readonly options: CompanionOptions;

  constructor(options: CompanionOptions) {
    this.options = options;
    this.store = options.store;
    this.gateway = new GatewayClient(options.gatewayBaseUrl, options.fetchImpl);
    this.queue = new OfflineQueue(options.store);
    this.anchors = new AnchorManager(this.gateway, {
      debounceMs: options.debounceMs,
      onDecorations: options.onDecorations,
      onStatus: (status) => {
        this.online = status === "ok";
        this.emitStatus();
      },
    });
  }

  documentOpened(snapshot: DocumentSnapshot): Promise<AnchorDecoration[]> {
    return this.anchors.refresh(snapshot);
  }

  documentChanged(snapshot: DocumentSnapshot): void {
    this.anchors.documentChanged(snapshot);
  }

  /** The context-menu gesture. The decoration must still match the
   * buffer revision; stale clicks are rejected rather than mis-anchored. */
  async sayThanks(snapshot: DocumentSnapshot, line: number): Promise<SayThanksResult> {
    const decoration = this.anchors.decorationAt(line, snapshot.version);
    if (!decoration) {
      throw new Error(`no current anchor on line ${line}`);
    }
    const payload: ThanksPayload = {
      installation_id: installationId(this.store),
      language: snapshot.language,
      line_number: decoration.line,
      line_text: decoration.lineText,
      scope: decoration.scope,
      targets: decoration.targets.map((label) => {
        const [pkg, ...members] = label.split(".");
        return { package: pkg, member_path: members };
      }),
    };
    try {
      const receipt = await this.gateway.sayThanks(payload);
      this.online = true;
      this.emitStatus();
      return { delivered: true, receipt };
    } catch {
      this.queue.enqueue(payload);
      this.online = false;
      this.emitStatus();
      return { delivered: false };
    }
  }

  /** The Say More action from the confirmation message. */
  sayMore(receipt: ThanksReceipt): void {
    this.options.openUrl?.(receipt.note_url);
  }

  /** Retry queued gestures, e.g. on reconnect or a timer. */
  async flushQueue(): Promise<ThanksReceipt[]> {
    const receipts = await this.queue.flush(this.gateway);
    if (this.queue.length === 0 && receipts.length > 0) {
      this.online = true;
    }
    this.emitStatus();
    return receipts;
  }

  status(): CompanionStatus {
    return { online: this.online, pendingThanks: this.queue.length };
  }

  private emitStatus(): void {
    this.options.onStatus?.(this.status());
  }
}
