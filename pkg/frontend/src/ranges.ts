/** Map validator findings onto ranges of the raw spec text so hints can be
 * shown inline. Heuristic but string-aware: scanning never confuses braces
 * inside JSON strings with structure. */

import type { TextRange } from "./types.js";

function lineOf(text: string, offset: number): number {
  let line = 1;
  for (let i = 0; i < offset && i < text.length; i++) {
    if (text[i] === "\n") line++;
  }
  return line;
}

function range(text: string, start: number, end: number): TextRange {
  return { start, end, line: lineOf(text, start) };
}

/** Index of the closing brace/bracket matching the opener at `open`. */
function matchDelim(text: string, open: number): number {
  const opener = text[open];
  const closer = opener === "{" ? "}" : "]";
  let depth = 0;
  let inString = false;
  for (let i = open; i < text.length; i++) {
    const ch = text[i];
    if (inString) {
      if (ch === "\\") i++;
      else if (ch === '"') inString = false;
    } else if (ch === '"') {
      inString = true;
    } else if (ch === opener) {
      depth++;
    } else if (ch === closer) {
      depth--;
      if (depth === 0) return i;
    }
  }
  return text.length - 1;
}

function findKey(text: string, key: string, from: number, until = text.length): number {
  const re = new RegExp(`"${key}"\\s*:`, "g");
  re.lastIndex = from;
  const m = re.exec(text);
  return m && m.index < until ? m.index : -1;
}

/** Range of dataset `name`'s stageIndex-th transform object. */
export function transformRange(
  text: string,
  dataset: string,
  stageIndex: number,
): TextRange | null {
  const nameRe = new RegExp(`"name"\\s*:\\s*"${escapeRe(dataset)}"`, "g");
  const nameMatch = nameRe.exec(text);
  if (!nameMatch) return null;
  // The enclosing dataset object starts at the last '{' before the match.
  const dsStart = text.lastIndexOf("{", nameMatch.index);
  const dsEnd = matchDelim(text, dsStart);
  const tKey = findKey(text, "transform", dsStart, dsEnd);
  if (tKey < 0) return null;
  const arrStart = text.indexOf("[", tKey);
  const arrEnd = matchDelim(text, arrStart);
  let i = arrStart + 1;
  let index = 0;
  while (i < arrEnd) {
    const objStart = text.indexOf("{", i);
    if (objStart < 0 || objStart > arrEnd) break;
    const objEnd = matchDelim(text, objStart);
    if (index === stageIndex) return range(text, objStart, objEnd + 1);
    index++;
    i = objEnd + 1;
  }
  return null;
}

/** Range of the scale declaration named `name`. */
export function scaleRange(text: string, name: string): TextRange | null {
  const sKey = findKey(text, "scales", 0);
  if (sKey < 0) return null;
  const arrStart = text.indexOf("[", sKey);
  const arrEnd = matchDelim(text, arrStart);
  const nameRe = new RegExp(`"name"\\s*:\\s*"${escapeRe(name)}"`, "g");
  nameRe.lastIndex = arrStart;
  const m = nameRe.exec(text);
  if (!m || m.index > arrEnd) return null;
  const objStart = text.lastIndexOf("{", m.index);
  return range(text, objStart, matchDelim(text, objStart) + 1);
}

/** Range of ar.placement (fallback: the whole ar block). */
export function placementRange(text: string): TextRange | null {
  const arKey = findKey(text, "ar", 0);
  if (arKey < 0) return null;
  const objStart = text.indexOf("{", arKey);
  const objEnd = matchDelim(text, objStart);
  const pKey = findKey(text, "placement", objStart, objEnd);
  if (pKey < 0) return range(text, objStart, objEnd + 1);
  const pStart = text.indexOf("{", pKey);
  return range(text, pStart, matchDelim(text, pStart) + 1);
}

/** Best-effort range for a dotted schema-issue path like
 * "data[0].transform[1].field". Falls back to the key's first mention. */
export function pathRange(text: string, path: string): TextRange | null {
  const leaf = path.split(/[.[\]]+/).filter(Boolean).pop();
  if (!leaf) return null;
  const idx = text.indexOf(`"${leaf}"`);
  return idx >= 0 ? range(text, idx, idx + leaf.length + 2) : null;
}

function escapeRe(s: string): string {
  return s.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}
