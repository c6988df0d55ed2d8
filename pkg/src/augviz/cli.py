"""Designer-facing command line.

Exit codes are a public contract: 0 success/valid, 1 usage or I/O error,
2 validation failed, 3 compile error.
"""

import argparse
import json
import os
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path

from .augment import expand_placeholder
from .compiler import (
    anchor_payload,
    compile_document,
    render_preview,
    render_static,
    render_virtual,
)
from .errors import AugvizError, InvalidSpecError, SpecParseError
from .specmodel import parse_spec, validate_schema
from .validator import validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_COMPILE = 3

_WATCH_DEBOUNCE_S = 0.2


def _read_spec(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        print(f"error: cannot read {path}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None


def _hub_url(args) -> str:
    return (args.hub or os.environ.get("PAPAR_HUB") or
            "http://127.0.0.1:7878").rstrip("/")


def _human_report(report) -> str:
    lines = [f"verdict: {report.verdict}  "
             f"[{report.mode.mode}: {report.mode.encodings} encodings, "
             f"{report.mode.composition} composition]"]
    for d in report.stage_diffs:
        lines.append(f"  stage {d.stage_index} ({d.transform_kind}) on "
                     f"'{d.dataset}': {len(d.mismatches)} mismatched entries")
        lines.append(f"    hint: {d.hint}")
    for s in report.scale_diffs:
        lines.append(f"  scale '{s.scale}' ({s.kind}): {s.reason}")
        lines.append(f"    hint: {s.hint}")
    for o in report.occlusions:
        lines.append(f"  occlusion: {o.target_kind} overlapped by "
                     f"{o.virtual_item['dataset']}#{o.virtual_item['pid']} "
                     f"({o.overlap_area:.1f} px^2)")
    for w in report.warnings:
        lines.append(f"  warning: {w}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_compile(args) -> int:
    text = _read_spec(args.spec)
    out_dir = Path(args.out)
    try:
        result = compile_document(text, args.seed)
    except (SpecParseError, InvalidSpecError, AugvizError) as e:
        print(f"compile error: {e}", file=sys.stderr)
        return EXIT_COMPILE
    out_dir.mkdir(parents=True, exist_ok=True)

    if result.spec.ar is not None:
        payload = anchor_payload(result.spec, 1, _hub_url(args) if args.hub
                                 or os.environ.get("PAPAR_HUB") else "")
        (out_dir / "anchor.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", "utf-8")
        (out_dir / "virtual.svg").write_text(render_virtual(result), "utf-8")
    else:
        payload = None
        print("note: spec has no ar block; virtual.svg and anchor.json omitted",
              file=sys.stderr)
    (out_dir / "static.svg").write_text(render_static(result, payload), "utf-8")
    (out_dir / "preview.svg").write_text(render_preview(result), "utf-8")
    print(f"wrote {out_dir}/static.svg, preview.svg"
          + (", virtual.svg, anchor.json" if payload else ""))
    return EXIT_OK


def cmd_validate(args) -> int:
    text = _read_spec(args.spec)
    try:
        spec = parse_spec(text)
        issues = validate_schema(spec)
        if issues:
            raise InvalidSpecError(issues)
        if spec.ar is None:
            if args.json:
                print(json.dumps({"verdict": "valid", "note": "no ar block"},
                                 sort_keys=True))
            else:
                print("valid (no ar block; nothing to augment)")
            return EXIT_OK
        report = validate(spec, args.seed)
    except (SpecParseError, InvalidSpecError, AugvizError) as e:
        print(f"compile error: {e}", file=sys.stderr)
        return EXIT_COMPILE
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(_human_report(report))
    return EXIT_OK if report.verdict != "invalid" else EXIT_INVALID


def cmd_mock(args) -> int:
    text = _read_spec(args.spec)
    try:
        spec = parse_spec(text)
    except SpecParseError as e:
        print(f"compile error: {e}", file=sys.stderr)
        return EXIT_COMPILE
    out = {}
    if spec.ar is not None:
        for a in spec.ar.appends:
            if a.placeholder is not None:
                out[a.dataset] = expand_placeholder(a.placeholder, args.seed)
    print(json.dumps(out, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_publish(args) -> int:
    text = _read_spec(args.spec)
    try:
        spec = parse_spec(text)
        issues = validate_schema(spec)
        if issues:
            raise InvalidSpecError(issues)
        if spec.ar is not None:
            report = validate(spec)
            if report.verdict == "invalid":
                if not args.force:
                    print(_human_report(report), file=sys.stderr)
                    print("publish refused: validation failed "
                          "(use --force to publish anyway)", file=sys.stderr)
                    return EXIT_INVALID
                print("warning: publishing an invalid augmentation (--force)",
                      file=sys.stderr)
    except (SpecParseError, InvalidSpecError, AugvizError) as e:
        print(f"compile error: {e}", file=sys.stderr)
        return EXIT_COMPILE

    hub = _hub_url(args)
    path = f"/specs/{args.id}" if args.id else "/specs"
    query = "?force=1" if args.force else ""
    req = urllib.request.Request(
        hub + path + query, data=text,
        headers={"Content-Type": "application/json"}, method="POST")
    try:
        with urllib.request.urlopen(req) as resp:
            body = resp.read().decode("utf-8")
    except urllib.error.HTTPError as e:
        print(f"hub error {e.code}: {e.read().decode('utf-8', 'replace')}",
              file=sys.stderr)
        return EXIT_INVALID if e.code == 409 else EXIT_USAGE
    except urllib.error.URLError as e:
        print(f"cannot reach hub {hub}: {e.reason}", file=sys.stderr)
        return EXIT_USAGE
    print(body)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .hub.service import serve_forever
    serve_forever(args.store, args.port, args.hub_url, args.ui)
    return EXIT_OK


def _watch(path: str, run) -> int:
    """Re-run on file change; a poor designer's preview loop."""
    last = None
    print(f"watching {path} (ctrl-c to stop)", file=sys.stderr)
    try:
        while True:
            try:
                mtime = os.stat(path).st_mtime
            except OSError:
                mtime = None
            if mtime != last:
                last = mtime
                time.sleep(_WATCH_DEBOUNCE_S)  # settle bursts of writes
                run()
            time.sleep(0.1)
    except KeyboardInterrupt:
        return EXIT_OK


# --------------------------------------------------------------------------
# wiring
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="augviz",
        description="Compile, validate, and publish AR-augmented static "
                    "visualizations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="emit static/virtual/preview SVGs")
    p.add_argument("spec")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--hub", default=None)
    p.add_argument("--watch", action="store_true")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("validate", help="run the augmentation validator")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--watch", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("mock", help="print expanded placeholder rows")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_mock)

    p = sub.add_parser("publish", help="push the spec to a hub")
    p.add_argument("spec")
    p.add_argument("--hub", default=None)
    p.add_argument("--id", default=None,
                   help="publish a new version of an existing record")
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_publish)

    p = sub.add_parser("serve", help="run a local spec hub")
    p.add_argument("--port", type=int, default=7878)
    p.add_argument("--store", default="hubstore")
    p.add_argument("--ui", default=None,
                   help="serve editor assets from this directory")
    p.add_argument("--hub-url", default=None,
                   help="external base URL written into receipts")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "watch", False):
        return _watch(args.spec, lambda: args.fn(args))
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
