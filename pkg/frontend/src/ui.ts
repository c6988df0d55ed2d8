/** DOM glue. Everything interesting lives in session.ts; this file renders
 * session state and forwards user intent. The preview pane shows the server's
 * SVG verbatim so the editor stays WYSIWYG with the CLI. */

import { highlightJson, markLines } from "./highlight.js";
import type { Diagnostic, EditorSession } from "./session.js";
import type { PublishReceipt, ValidationReport } from "./types.js";

export interface UiHandles {
  editor: HTMLTextAreaElement;
  setPreview(svg: string): void;
  renderDiagnostics(session: EditorSession): void;
  setBanner(text: string | null): void;
}

export function buildUi(
  root: HTMLElement,
  session: EditorSession,
  confirmForce: (report: ValidationReport) => Promise<boolean> = async (r) => {
    return window.confirm(
      `Validator verdict: ${r.verdict}.\nPublish anyway?`,
    );
  },
): UiHandles {
  root.innerHTML = `
    <header class="topbar">
      <span class="brand">augviz editor</span>
      <span id="verdict" class="verdict"></span>
      <button id="publish">publish</button>
    </header>
    <div id="banner" class="banner" hidden></div>
    <main class="panes">
      <section class="editor-pane">
        <pre id="hl" aria-hidden="true"></pre>
        <textarea id="editor" spellcheck="false"></textarea>
      </section>
      <section class="preview-pane"><div id="preview"></div></section>
    </main>
    <footer id="hints" class="hints"></footer>
    <dialog id="receipt-dialog"></dialog>
  `;

  const editor = root.querySelector<HTMLTextAreaElement>("#editor")!;
  const hl = root.querySelector<HTMLPreElement>("#hl")!;
  const preview = root.querySelector<HTMLDivElement>("#preview")!;
  const verdictEl = root.querySelector<HTMLSpanElement>("#verdict")!;
  const hints = root.querySelector<HTMLElement>("#hints")!;
  const bannerEl = root.querySelector<HTMLDivElement>("#banner")!;
  const dialog = root.querySelector<HTMLDialogElement>("#receipt-dialog")!;

  function repaintEditor(): void {
    const lines = new Set<number>();
    for (const d of session.diagnostics) {
      if (d.range) lines.add(d.range.line);
    }
    hl.innerHTML = markLines(highlightJson(editor.value), lines) + "\n";
  }

  editor.addEventListener("input", () => {
    session.edit(editor.value);
    repaintEditor();
  });
  editor.addEventListener("scroll", () => {
    hl.scrollTop = editor.scrollTop;
    hl.scrollLeft = editor.scrollLeft;
  });

  function renderDiagnostics(s: EditorSession): void {
    verdictEl.textContent = s.verdict ?? "";
    verdictEl.className = `verdict verdict-${s.verdict ?? "none"}`;
    hints.innerHTML = "";
    if (s.verdict === "valid" && s.diagnostics.length === 0) {
      const ok = document.createElement("div");
      ok.className = "hint hint-ok";
      ok.textContent = "valid";
      hints.appendChild(ok);
    }
    for (const d of s.diagnostics) {
      hints.appendChild(hintRow(d, editor));
    }
    repaintEditor();
  }

  function setBanner(text: string | null): void {
    bannerEl.hidden = text === null;
    bannerEl.textContent = text ?? "";
  }

  root.querySelector<HTMLButtonElement>("#publish")!.addEventListener(
    "click",
    async () => {
      let outcome = await session.publishAction();
      if (outcome.needsForce) {
        if (await confirmForce(outcome.needsForce)) {
          outcome = await session.publishAction({ force: true });
        } else {
          return;
        }
      }
      if (outcome.receipt) {
        showReceipt(dialog, outcome.receipt, session.api.base);
      } else if (outcome.error) {
        setBanner(`publish failed: ${outcome.error}`);
      }
    },
  );

  return {
    editor,
    setPreview: (svg) => {
      preview.innerHTML = svg;
    },
    renderDiagnostics,
    setBanner,
  };
}

function hintRow(d: Diagnostic, editor: HTMLTextAreaElement): HTMLElement {
  const row = document.createElement("div");
  row.className = `hint hint-${d.severity}`;
  const where = d.range ? `line ${d.range.line}: ` : "";
  row.textContent = `${where}${d.message}`;
  if (d.range) {
    row.addEventListener("click", () => {
      editor.focus();
      editor.setSelectionRange(d.range!.start, d.range!.end);
    });
  }
  return row;
}

function showReceipt(
  dialog: HTMLDialogElement,
  receipt: PublishReceipt,
  base: string,
): void {
  const refUrl = receipt.staticRenderURL;
  const virtUrl = `${base}/specs/${receipt.id}/virtual?v=${receipt.version}`;
  dialog.innerHTML = `
    <h3>published</h3>
    <p><b>id</b> <code>${receipt.id}</code> <b>version</b> ${receipt.version}</p>
    <p><a href="${refUrl}" target="_blank">reference render</a> ·
       <a href="${virtUrl}" target="_blank">virtual layer</a></p>
    <pre>${JSON.stringify(receipt.anchorPayload, null, 2)}</pre>
    <form method="dialog"><button>close</button></form>
  `;
  dialog.showModal();
}
