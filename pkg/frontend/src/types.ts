/** Wire shapes served by the hub. The editor renders these verbatim and
 * never derives its own verdicts. */

export interface HintRef {
  id: string;
  text: string;
}

export interface StageDiff {
  dataset: string;
  stageIndex: number;
  transformKind: string;
  mismatches: unknown[];
  hint: HintRef;
}

export interface ScaleDiff {
  scale: string;
  kind: string;
  reason: string;
  hint: HintRef;
}

export interface OcclusionEntry {
  virtualItem: { dataset: string; pid: number; mark: number; kind: string };
  target: { kind: string; [k: string]: unknown };
  overlapArea: number;
}

export interface ValidationReport {
  verdict: "valid" | "invalid" | "warnings";
  mode: { mode: string; encodings: string; composition: string };
  stageDiffs: StageDiff[];
  scaleDiffs: ScaleDiff[];
  occlusions: OcclusionEntry[];
  warnings: string[];
}

export interface SchemaIssue {
  code: string;
  path: string;
  message: string;
}

export interface AnchorPayload {
  papar: number;
  id: string;
  ver: number;
  hub: string;
  box: [number, number, number, number];
}

export interface PublishReceipt {
  id: string;
  version: number;
  anchorPayload: AnchorPayload;
  staticRenderURL: string;
}

export interface HubError {
  error: string;
  detail: unknown;
}

export interface TextRange {
  start: number; // character offsets into the spec text
  end: number;
  line: number; // 1-based line of `start`
}
