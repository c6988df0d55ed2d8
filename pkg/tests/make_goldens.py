"""Regenerate committed golden files. Run from the repo root:

    python tests/make_goldens.py

Goldens pin canonical bytes and rendered SVG so refactors cannot silently
change public output. Regenerating them is an intentional act; review the
diff before committing.
"""

from pathlib import Path

from augviz import canonical_bytes, compile_spec, parse_spec, render_preview

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"


def main():
    GOLDEN.mkdir(exist_ok=True)
    spec = parse_spec((FIXTURES / "bar_extend.pv.json").read_text("utf-8"))
    (GOLDEN / "bar_extend.canonical.json").write_bytes(canonical_bytes(spec))
    (GOLDEN / "bar_extend.preview.svg").write_text(
        render_preview(compile_spec(spec)), "utf-8")

    mini = parse_spec((FIXTURES / "minimal_bar.pv.json").read_text("utf-8"))
    (GOLDEN / "minimal_bar.static.svg").write_text(
        render_preview(compile_spec(mini), border_boxes=False), "utf-8")
    print(f"wrote goldens to {GOLDEN}")


if __name__ == "__main__":
    main()
