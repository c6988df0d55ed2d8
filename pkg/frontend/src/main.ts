import { HubApi } from "./api.js";
import { EditorSession } from "./session.js";
import { buildUi } from "./ui.js";

const STARTER = `{
  "width": 360, "height": 220,
  "data": [
    {"name": "sales",
     "values": [{"cat": "A", "v": 28}, {"cat": "B", "v": 55}, {"cat": "C", "v": 43}],
     "transform": [{"kind": "aggregate", "groupby": ["cat"], "ops": ["sum"],
                    "fields": ["v"], "as": ["total"]}]}
  ],
  "scales": [
    {"name": "x", "kind": "band", "domain": {"data": "sales", "field": "cat"},
     "range": [40, 340]},
    {"name": "y", "kind": "linear", "domain": [0, 80], "range": [200, 20]}
  ],
  "marks": [
    {"kind": "rect", "from": "sales", "encode": {
      "x": {"scale": "x", "field": "cat"},
      "width": {"scale": "x", "band": 1},
      "y": {"scale": "y", "field": "total"},
      "y2": {"scale": "y", "value": 0},
      "fill": {"value": "#4C78A8"}}}
  ],
  "ar": {
    "mode": "extend",
    "appends": [{"dataset": "sales", "values": [{"cat": "D", "v": 62}]}],
    "anchor": {"box": [318, 178, 36, 36]}
  }
}
`;

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app");
  const api = new HubApi(window.location.origin);
  const session = new EditorSession(api);
  const ui = buildUi(root, session);

  // wire session events now that the DOM exists
  session.events = {
    onPreview: (svg: string) => ui.setPreview(svg),
    onDiagnostics: () => ui.renderDiagnostics(session),
    onBanner: (text: string | null) => ui.setBanner(text),
  };

  ui.editor.value = STARTER;
  session.edit(STARTER);
  session.flush();
}

boot();
