"""Content-addressed spec store: one directory per id, immutable versions.

Layout under the store root:
    <id>/meta.json          {"id": ..., "versions": [{"version", "publishedAt", "sha256"}]}
    <id>/v<N>.pv.json       canonical spec bytes
    <id>/v<N>.static.svg    reference render (anchor tag inscribed)

All mutations go through one lock; reads touch only immutable files.
"""

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..compiler import (
    anchor_payload,
    compile_spec,
    render_static,
    render_virtual,
    spec_id,
)
from ..errors import (
    InvalidSpecError,
    NoArBlockError,
    UnknownIdError,
    UnknownVersionError,
    ValidationFailedError,
)
from ..specmodel import canonical_bytes, parse_spec, validate_schema
from ..validator import validate

_ID_LEN = 16


@dataclass
class PublishReceipt:
    id: str
    version: int
    anchor_payload: dict
    static_render_url: str
    created: bool = True  # False on a no-op republish; not part of the wire shape

    def to_dict(self):
        return {"id": self.id, "version": self.version,
                "anchorPayload": self.anchor_payload,
                "staticRenderURL": self.static_render_url}


class SpecStore:
    def __init__(self, root: str | Path, hub_url: str = ""):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hub_url = hub_url.rstrip("/")
        self._write_lock = threading.Lock()

    # -- helpers -----------------------------------------------------------

    def _dir(self, sid: str) -> Path:
        return self.root / sid

    def _meta(self, sid: str) -> dict:
        path = self._dir(sid) / "meta.json"
        if not path.exists():
            raise UnknownIdError(sid)
        return json.loads(path.read_text("utf-8"))

    def _latest_version(self, sid: str) -> int:
        return self._meta(sid)["versions"][-1]["version"]

    def _receipt(self, sid: str, version: int, spec) -> PublishReceipt:
        payload = anchor_payload(spec, version, self.hub_url)
        payload["id"] = sid  # version-1 content id, not this version's hash
        url = f"{self.hub_url}/specs/{sid}/reference?v={version}"
        return PublishReceipt(sid, version, payload, url)

    # -- operations --------------------------------------------------------

    def publish(self, spec_bytes: bytes | str, spec_id_hint: str | None = None,
                force: bool = False) -> PublishReceipt:
        """Create or append a version. Identical canonical bytes are a no-op
        returning the existing receipt. An invalid verdict blocks the publish
        unless forced."""
        spec = parse_spec(spec_bytes)
        issues = validate_schema(spec)
        if issues:
            raise InvalidSpecError(issues)
        canon = canonical_bytes(spec)

        result = compile_spec(spec)
        if spec.ar is not None:
            report = validate(spec, compiled=result)
            if report.verdict == "invalid" and not force:
                raise ValidationFailedError(report)

        sid = spec_id_hint or spec_id(spec)
        with self._write_lock:
            d = self._dir(sid)
            if (d / "meta.json").exists():
                meta = self._meta(sid)
                latest = meta["versions"][-1]["version"]
                stored = (d / f"v{latest}.pv.json").read_bytes()
                if stored == canon:
                    receipt = self._receipt(sid, latest, spec)
                    receipt.created = False
                    return receipt
                version = latest + 1
            else:
                if spec_id_hint is not None:
                    raise UnknownIdError(spec_id_hint)
                d.mkdir(parents=True, exist_ok=True)
                meta = {"id": sid, "versions": []}
                version = 1

            receipt = self._receipt(sid, version, spec)
            static_svg = render_static(result, receipt.anchor_payload)
            (d / f"v{version}.pv.json").write_bytes(canon)
            (d / f"v{version}.static.svg").write_text(static_svg, "utf-8")
            meta["versions"].append({
                "version": version,
                "publishedAt": int(time.time()),
                "sha256": hashlib.sha256(canon).hexdigest(),
            })
            (d / "meta.json").write_text(
                json.dumps(meta, indent=2, sort_keys=True), "utf-8")
        return receipt

    def _resolve_version(self, sid: str, version: int | None) -> int:
        meta = self._meta(sid)
        if version is None:
            return meta["versions"][-1]["version"]
        if not any(v["version"] == version for v in meta["versions"]):
            raise UnknownVersionError(sid, version)
        return version

    def fetch_spec(self, sid: str, version: int | None = None) -> bytes:
        v = self._resolve_version(sid, version)
        return (self._dir(sid) / f"v{v}.pv.json").read_bytes()

    def fetch_reference(self, sid: str, version: int | None = None) -> bytes:
        v = self._resolve_version(sid, version)
        return (self._dir(sid) / f"v{v}.static.svg").read_bytes()

    def fetch_virtual(self, sid: str, version: int | None = None) -> bytes:
        """Rendered on demand from the stored canonical bytes, so it always
        byte-matches a local compile of the same document."""
        spec = parse_spec(self.fetch_spec(sid, version))
        if spec.ar is None:
            raise NoArBlockError()
        return render_virtual(compile_spec(spec)).encode("utf-8")

    def fetch_anchor(self, sid: str, version: int | None = None) -> dict:
        v = self._resolve_version(sid, version)
        spec = parse_spec(self.fetch_spec(sid, v))
        payload = anchor_payload(spec, v, self.hub_url)
        payload["id"] = sid
        return payload

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "meta.json").exists())
