import assert from "node:assert/strict";
import { test } from "node:test";

import { pathRange, placementRange, scaleRange, transformRange } from "../src/ranges.js";

const SPEC = `{
  "width": 420, "height": 260,
  "data": [
    {"name": "org",
     "values": [{"id": "a {not structure}", "parent": null}],
     "transform": [
        {"kind": "hierarchy", "idField": "id", "parentField": "parent"},
        {"kind": "treelayout", "method": "cluster", "idField": "id",
         "parentField": "parent"}
     ]}
  ],
  "scales": [
    {"name": "x", "kind": "band", "domain": ["A"], "range": [0, 10]},
    {"name": "y", "kind": "linear", "domain": [0, 1], "range": [0, 10]}
  ],
  "marks": [],
  "ar": {"mode": "extend",
         "appends": [{"dataset": "org", "values": []}],
         "placement": {"direction": "right", "gap": 8}}
}`;

test("transformRange finds the right stage object", () => {
  const r0 = transformRange(SPEC, "org", 0);
  assert.ok(r0);
  assert.match(SPEC.slice(r0.start, r0.end), /"hierarchy"/);
  const r1 = transformRange(SPEC, "org", 1);
  assert.ok(r1);
  const text = SPEC.slice(r1.start, r1.end);
  assert.match(text, /"treelayout"/);
  assert.match(text, /"cluster"/);
  assert.ok(r1.line > r0.line);
});

test("transformRange is not fooled by braces inside strings", () => {
  const r = transformRange(SPEC, "org", 0);
  assert.ok(r);
  assert.doesNotMatch(SPEC.slice(r.start, r.end), /not structure/);
});

test("transformRange returns null for unknown datasets", () => {
  assert.equal(transformRange(SPEC, "nope", 0), null);
});

test("scaleRange finds the named scale", () => {
  const r = scaleRange(SPEC, "y");
  assert.ok(r);
  assert.match(SPEC.slice(r.start, r.end), /"linear"/);
});

test("placementRange targets ar.placement", () => {
  const r = placementRange(SPEC);
  assert.ok(r);
  assert.match(SPEC.slice(r.start, r.end), /"direction"/);
});

test("pathRange falls back to the leaf key", () => {
  const r = pathRange(SPEC, "data[0].transform[1].method");
  assert.ok(r);
  assert.equal(SPEC.slice(r.start, r.end), '"method"');
});
