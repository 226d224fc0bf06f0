/**
 * Anchor refresh with debounce and a latest-wins rule: at most one scan
 * request is in flight per document, and a response for a stale buffer
 * revision is discarded rather than guessed at.
 */

import type { Anchor, GatewayClient, Language } from "./gateway.js";

export interface AnchorDecoration {
  line: number;
  scope: Anchor["scope"];
  /** Display strings like "cv2" or "matplotlib.pyplot". */
  targets: string[];
  /** Editor buffer revision the anchors were computed against. */
  version: number;
  lineText: string;
}

export interface DocumentSnapshot {
  language: Language;
  text: string;
  version: number;
}

const SUPPORTED_EXTENSIONS: Record<string, Language> = {
  ".py": "python",
  ".js": "javascript",
  ".jsx": "javascript",
  ".ts": "typescript",
  ".tsx": "typescript",
};

export function languageForPath(path: string): Language | undefined {
  const dot = path.lastIndexOf(".");
  if (dot === -1) return undefined;
  return SUPPORTED_EXTENSIONS[path.slice(dot).toLowerCase()];
}

export function targetLabel(pkg: string, memberPath: string[]): string {
  return memberPath.length ? `${pkg}.${memberPath.join(".")}` : pkg;
}

export interface AnchorManagerOptions {
  debounceMs?: number;
  /** Called with the fresh decorations, or [] when they must be cleared. */
  onDecorations: (decorations: AnchorDecoration[]) => void;
  /** Non-blocking status indicator; never a modal. */
  onStatus?: (status: "ok" | "offline") => void;
}

export class AnchorManager {
  private readonly debounceMs: number;
  private timer: ReturnType<typeof setTimeout> | undefined;
  private requestSeq = 0;
  private decorations: AnchorDecoration[] = [];

  constructor(
    private readonly gateway: GatewayClient,
    private readonly options: AnchorManagerOptions,
  ) {
    this.debounceMs = options.debounceMs ?? 500;
  }

  current(): AnchorDecoration[] {
    return this.decorations;
  }

  /** Debounced entry point for buffer edits. */
  documentChanged(snapshot: DocumentSnapshot): void {
    if (this.timer !== undefined) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = undefined;
      void this.refresh(snapshot);
    }, this.debounceMs);
  }

  /** Immediate refresh (document open). Latest request wins; a slow
   * response for an older snapshot is ignored. */
  async refresh(snapshot: DocumentSnapshot): Promise<AnchorDecoration[]> {
    const seq = ++this.requestSeq;
    let anchors: Anchor[];
    try {
      anchors = await this.gateway.scan(snapshot.language, snapshot.text);
    } catch {
      if (seq === this.requestSeq) {
        this.apply([], "offline");
      }
      return this.decorations;
    }
    if (seq !== this.requestSeq) return this.decorations;
    const decorations = anchors.map((a) => ({
      line: a.line,
      scope: a.scope,
      targets: a.targets.map((t) => targetLabel(t.package, t.member_path)),
      version: snapshot.version,
      lineText: a.line_text,
    }));
    this.apply(decorations, "ok");
    return decorations;
  }

  /** Decorations are only valid for the revision they were computed
   * against; on mismatch they are dropped, never guessed. */
  decorationAt(line: number, currentVersion: number): AnchorDecoration | undefined {
    const found = this.decorations.find((d) => d.line === line);
    if (!found || found.version !== currentVersion) return undefined;
    return found;
  }

  clear(): void {
    this.apply([], "ok");
  }

  private apply(decorations: AnchorDecoration[], status: "ok" | "offline"): void {
    this.decorations = decorations;
    this.options.onDecorations(decorations);
    this.options.onStatus?.(status);
  }
}
