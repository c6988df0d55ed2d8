/** Thin client for the hub's compile/validate/publish endpoints. All design
 * decisions (verdicts, pixels) come from the server; this file only moves
 * bytes. */

import type { HubError, PublishReceipt, ValidationReport } from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; body?: string; headers?: Record<string, string> },
) => Promise<{ status: number; text(): Promise<string> }>;

export class OfflineError extends Error {
  constructor(cause: unknown) {
    super(`hub unreachable: ${cause}`);
  }
}

export class CompileFailed extends Error {
  constructor(public readonly detail: HubError) {
    super(typeof detail.detail === "string" ? detail.detail : detail.error);
  }
}

export interface PublishOutcome {
  receipt?: PublishReceipt;
  rejectedReport?: ValidationReport; // 409: needs force
  error?: HubError;
}

export class HubApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  get base(): string {
    return this.baseUrl.replace(/\/$/, "");
  }

  private async post(path: string, body: string) {
    let resp;
    try {
      resp = await this.fetchFn(`${this.base}${path}`, {
        method: "POST",
        body,
        headers: { "Content-Type": "application/json" },
      });
    } catch (e) {
      throw new OfflineError(e);
    }
    return resp;
  }

  /** POST /compile -> composed preview SVG (border boxes included). */
  async compilePreview(specText: string): Promise<string> {
    const resp = await this.post("/compile", specText);
    const text = await resp.text();
    if (resp.status !== 200) {
      throw new CompileFailed(parseError(text));
    }
    return text;
  }

  /** POST /validate -> the server's ValidationReport, verbatim. */
  async validateSpec(specText: string): Promise<ValidationReport> {
    const resp = await this.post("/validate", specText);
    const text = await resp.text();
    if (resp.status !== 200) {
      throw new CompileFailed(parseError(text));
    }
    return JSON.parse(text) as ValidationReport;
  }

  async publish(specText: string, opts: { id?: string; force?: boolean } = {}): Promise<PublishOutcome> {
    const path =
      (opts.id ? `/specs/${opts.id}` : "/specs") + (opts.force ? "?force=1" : "");
    const resp = await this.post(path, specText);
    const text = await resp.text();
    if (resp.status === 200 || resp.status === 201) {
      return { receipt: JSON.parse(text) as PublishReceipt };
    }
    const err = parseError(text);
    if (resp.status === 409 && err.error === "validation-failed") {
      return { rejectedReport: err.detail as ValidationReport, error: err };
    }
    return { error: err };
  }
}

function parseError(text: string): HubError {
  try {
    return JSON.parse(text) as HubError;
  } catch {
    return { error: "bad-response", detail: text };
  }
}
