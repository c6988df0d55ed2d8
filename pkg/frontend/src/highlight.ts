/** Minimal JSON syntax highlighter: emits HTML spans layered behind the
 * transparent textarea. Keys and value strings get different classes. */

const TOKEN = /("(?:[^"\\]|\\.)*")(\s*:)?|(-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)|(\btrue\b|\bfalse\b|\bnull\b)|([{}[\],:])/g;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function highlightJson(text: string): string {
  let out = "";
  let last = 0;
  for (const m of text.matchAll(TOKEN)) {
    const idx = m.index ?? 0;
    out += esc(text.slice(last, idx));
    if (m[1] !== undefined) {
      const cls = m[2] ? "tok-key" : "tok-str";
      out += `<span class="${cls}">${esc(m[1])}</span>${m[2] ? esc(m[2]) : ""}`;
    } else if (m[3] !== undefined) {
      out += `<span class="tok-num">${esc(m[3])}</span>`;
    } else if (m[4] !== undefined) {
      out += `<span class="tok-lit">${esc(m[4])}</span>`;
    } else {
      out += esc(m[5] ?? "");
    }
    last = idx + m[0].length;
  }
  out += esc(text.slice(last));
  return out;
}

/** Wrap the given 1-based lines in marker spans (used for hint ranges). */
export function markLines(html: string, lines: Set<number>): string {
  const parts = html.split("\n");
  return parts
    .map((ln, i) => (lines.has(i + 1) ? `<span class="line-marked">${ln}</span>` : ln))
    .join("\n");
}
