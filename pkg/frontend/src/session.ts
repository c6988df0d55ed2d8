/** Editor session state machine.
 *
 * Invariants:
 *  - diagnostics always belong to the revision they were computed from;
 *    responses for superseded revisions are discarded, never rendered;
 *  - at most one compile and one validate request in flight, newest wins;
 *  - on compile errors the last good preview stays up behind an error banner;
 *  - verdicts and pixels come from the server untouched.
 */

import { CompileFailed, HubApi, OfflineError } from "./api.js";
import { pathRange, placementRange, scaleRange, transformRange } from "./ranges.js";
import type {
  PublishReceipt,
  TextRange,
  ValidationReport,
} from "./types.js";

export interface Diagnostic {
  severity: "error" | "warning" | "info";
  message: string; // hint text verbatim from the report
  range: TextRange | null;
  source: "stage" | "scale" | "occlusion" | "scalability" | "compile";
}

export type Scheduler = (fn: () => void, ms: number) => () => void;

const DEBOUNCE_MS = 300;

export interface SessionEvents {
  onPreview?: (svg: string) => void;
  onDiagnostics?: (s: EditorSession) => void;
  onBanner?: (text: string | null) => void;
}

interface Flight {
  revision: number;
  rerun: boolean;
}

export class EditorSession {
  specText = "";
  revision = 0;
  dirty = false;

  lastGoodPreview: string | null = null;
  previewRevision = -1;

  verdict: ValidationReport["verdict"] | null = null;
  report: ValidationReport | null = null;
  diagnostics: Diagnostic[] = [];
  diagnosticsRevision = -1;

  banner: string | null = null;

  private cancelDebounce: (() => void) | null = null;
  private compileFlight: Flight | null = null;
  private validateFlight: Flight | null = null;
  private settlePromises: (() => void)[] = [];

  constructor(
    public readonly api: HubApi,
    private readonly schedule: Scheduler = (fn, ms) => {
      const t = setTimeout(fn, ms);
      return () => clearTimeout(t);
    },
    public events: SessionEvents = {},
  ) {}

  /** Keystroke entry point: bumps the revision and debounces the refresh. */
  edit(text: string): void {
    this.specText = text;
    this.revision++;
    this.dirty = true;
    if (this.cancelDebounce) this.cancelDebounce();
    this.cancelDebounce = this.schedule(() => {
      this.cancelDebounce = null;
      this.refresh();
    }, DEBOUNCE_MS);
  }

  /** Skip the debounce window (used by tests and the e2e driver). */
  flush(): void {
    if (this.cancelDebounce) {
      this.cancelDebounce();
      this.cancelDebounce = null;
    }
    this.refresh();
  }

  /** Resolves once no request is in flight and no rerun is queued. */
  settled(): Promise<void> {
    if (!this.compileFlight && !this.validateFlight) return Promise.resolve();
    return new Promise((resolve) => this.settlePromises.push(resolve));
  }

  private checkSettled(): void {
    if (!this.compileFlight && !this.validateFlight) {
      const waiters = this.settlePromises;
      this.settlePromises = [];
      for (const w of waiters) w();
    }
  }

  private refresh(): void {
    this.requestPreview();
    this.requestValidation();
  }

  // -- preview ---------------------------------------------------------------

  private requestPreview(): void {
    if (this.compileFlight) {
      this.compileFlight.rerun = true; // newest wins once the flight lands
      return;
    }
    const flight: Flight = { revision: this.revision, rerun: false };
    this.compileFlight = flight;
    void this.api
      .compilePreview(this.specText)
      .then((svg) => this.applyPreview(flight, svg, null))
      .catch((err: unknown) => this.applyPreview(flight, null, err));
  }

  private applyPreview(flight: Flight, svg: string | null, err: unknown): void {
    this.compileFlight = null;
    if (flight.rerun || flight.revision !== this.revision) {
      // a newer edit exists; this response must never render
      this.requestPreview();
      return;
    }
    if (svg !== null) {
      this.lastGoodPreview = svg;
      this.previewRevision = flight.revision;
      this.dirty = false;
      this.setBanner(null);
      this.events.onPreview?.(svg);
    } else if (err instanceof OfflineError) {
      this.setBanner("hub unreachable - editing offline");
    } else if (err instanceof CompileFailed) {
      // keep lastGoodPreview on screen behind the banner
      this.setBanner(`compile error: ${err.message}`);
    } else {
      this.setBanner(`unexpected error: ${err}`);
    }
    this.checkSettled();
  }

  // -- validation --------------------------------------------------------------

  private requestValidation(): void {
    if (this.validateFlight) {
      this.validateFlight.rerun = true;
      return;
    }
    const flight: Flight = { revision: this.revision, rerun: false };
    this.validateFlight = flight;
    void this.api
      .validateSpec(this.specText)
      .then((report) => this.applyValidation(flight, report, null))
      .catch((err: unknown) => this.applyValidation(flight, null, err));
  }

  private applyValidation(
    flight: Flight,
    report: ValidationReport | null,
    err: unknown,
  ): void {
    this.validateFlight = null;
    if (flight.rerun || flight.revision !== this.revision) {
      this.requestValidation();
      return;
    }
    if (report !== null) {
      this.report = report;
      this.verdict = report.verdict;
      this.diagnostics = diagnosticsFrom(report, this.specText);
      this.diagnosticsRevision = flight.revision;
      this.events.onDiagnostics?.(this);
    } else if (err instanceof CompileFailed) {
      if (err.detail.error === "no-ar") {
        // static-only document: nothing to validate
        this.report = null;
        this.verdict = "valid";
        this.diagnostics = [];
        this.diagnosticsRevision = flight.revision;
        this.events.onDiagnostics?.(this);
      } else {
        this.report = null;
        this.verdict = null;
        this.diagnostics = compileDiagnostics(err, this.specText);
        this.diagnosticsRevision = flight.revision;
        this.events.onDiagnostics?.(this);
      }
    } else if (err instanceof OfflineError) {
      this.setBanner("hub unreachable - editing offline");
    }
    this.checkSettled();
  }

  // -- publish -----------------------------------------------------------------

  async publishAction(opts: { id?: string; force?: boolean } = {}): Promise<{
    receipt?: PublishReceipt;
    needsForce?: ValidationReport;
    error?: string;
  }> {
    try {
      const outcome = await this.api.publish(this.specText, opts);
      if (outcome.receipt) return { receipt: outcome.receipt };
      if (outcome.rejectedReport) return { needsForce: outcome.rejectedReport };
      return { error: `${outcome.error?.error}: ${JSON.stringify(outcome.error?.detail)}` };
    } catch (e) {
      if (e instanceof OfflineError) return { error: "hub unreachable" };
      return { error: String(e) };
    }
  }

  private setBanner(text: string | null): void {
    this.banner = text;
    this.events.onBanner?.(text);
  }
}

/** Server report -> inline markers. Hint text is passed through verbatim. */
export function diagnosticsFrom(
  report: ValidationReport,
  specText: string,
): Diagnostic[] {
  const out: Diagnostic[] = [];
  for (const d of report.stageDiffs) {
    out.push({
      severity: "warning",
      message: d.hint.text,
      range: transformRange(specText, d.dataset, d.stageIndex),
      source: "stage",
    });
  }
  for (const s of report.scaleDiffs) {
    out.push({
      severity: "warning",
      message: s.hint.text,
      range: scaleRange(specText, s.scale),
      source: "scale",
    });
  }
  for (const o of report.occlusions) {
    out.push({
      severity: "warning",
      message:
        `virtual ${o.virtualItem.dataset}#${o.virtualItem.pid} overlaps ` +
        `${o.target.kind} (${o.overlapArea.toFixed(1)} px^2)`,
      range: placementRange(specText),
      source: "occlusion",
    });
  }
  for (const w of report.warnings) {
    out.push({
      severity: "info",
      message: w,
      range: placementRange(specText),
      source: "scalability",
    });
  }
  return out;
}

function compileDiagnostics(err: CompileFailed, specText: string): Diagnostic[] {
  const detail = err.detail.detail;
  const issues = Array.isArray(detail) ? detail : null;
  if (issues) {
    return issues.map((i) => ({
      severity: "error" as const,
      message: `${i.message}`,
      range: typeof i.path === "string" ? pathRangeSafe(specText, i.path) : null,
      source: "compile" as const,
    }));
  }
  return [
    { severity: "error", message: err.message, range: null, source: "compile" },
  ];
}

function pathRangeSafe(text: string, path: string) {
  try {
    return pathRange(text, path);
  } catch {
    return null;
  }
}
