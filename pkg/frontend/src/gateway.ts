/**
 * Thin HTTP client for the thanksd gateway. The companion never parses
 * source text itself; every anchor comes from POST /v1/scan so the line
 * grammar stays single-sourced in the service.
 */

export type Language = "python" | "javascript" | "typescript";

export type AnchorScope = "package" | "member" | "call_site";

export interface AnchorTarget {
  package: string;
  member_path: string[];
}

export interface Anchor {
  line: number; // 1-based
  line_text: string;
  scope: AnchorScope;
  targets: AnchorTarget[];
}

export interface ThanksPayload {
  installation_id: string;
  language: Language;
  line_number: number;
  line_text: string;
  scope: AnchorScope;
  targets: AnchorTarget[];
}

export interface ThanksReceipt {
  event_id: string;
  note_url: string;
}

export class GatewayError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "GatewayError";
  }
}

type FetchLike = typeof fetch;

export class GatewayClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  async scan(language: Language, text: string): Promise<Anchor[]> {
    const body = await this.post("/v1/scan", { language, text });
    return body.anchors as Anchor[];
  }

  async sayThanks(payload: ThanksPayload): Promise<ThanksReceipt> {
    const body = await this.post("/v1/thanks", payload);
    return { event_id: body.event_id, note_url: body.note_url };
  }

  noteFormUrl(eventId: string): string {
    return `${this.base}/v1/note-form/${eventId}`;
  }

  private async post(path: string, payload: unknown): Promise<any> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      throw new GatewayError(`gateway unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      throw new GatewayError(`gateway returned ${response.status}`, response.status);
    }
    return response.json();
  }
}
