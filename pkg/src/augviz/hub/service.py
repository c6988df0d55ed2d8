"""HTTP/1.1 face of the spec store plus the stateless compile/validate
endpoints the editor uses. JSON bodies, UTF-8 throughout.

    POST /specs                  publish; 201 receipt (200 on no-op republish)
    POST /specs/{id}             publish a new version of an existing record
    GET  /specs/{id}[?v=N]       canonical spec bytes
    GET  /specs/{id}/virtual     rendered AR layer (image/svg+xml)
    GET  /specs/{id}/reference   stored static render (image/svg+xml)
    GET  /specs/{id}/anchor      anchor payload JSON
    POST /compile                body spec -> composed preview SVG
    POST /validate               body spec -> ValidationReport JSON

Error bodies: {"error": code, "detail": ...}.
"""

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ..compiler import compile_document, render_preview
from ..errors import (
    AugvizError,
    InvalidSpecError,
    NoArBlockError,
    SpecParseError,
    UnknownIdError,
    UnknownVersionError,
    ValidationFailedError,
)
from ..specmodel import parse_spec
from ..validator import validate
from .store import SpecStore

_ID_RE = re.compile(r"^[0-9a-f]{16}$")

_UI_TYPES = {".html": "text/html; charset=utf-8",
             ".js": "text/javascript; charset=utf-8",
             ".css": "text/css; charset=utf-8",
             ".svg": "image/svg+xml",
             ".json": "application/json"}


class HubHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "augviz-hub/0.1"
    store: SpecStore
    ui_dir: Path | None = None

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send(self, status: int, body: bytes, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, obj):
        self._send(status, json.dumps(obj, sort_keys=True).encode("utf-8"),
                   "application/json")

    def _error(self, status: int, code: str, detail):
        self._json(status, {"error": code, "detail": detail})

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length)

    def _route(self):
        url = urlparse(self.path)
        query = parse_qs(url.query)
        version = None
        if "v" in query:
            try:
                version = int(query["v"][0])
            except ValueError:
                raise UnknownVersionError("?", -1) from None
        force = query.get("force", ["0"])[0] in ("1", "true", "yes")
        return url.path.rstrip("/") or "/", version, force

    # -- handlers ----------------------------------------------------------

    def do_OPTIONS(self):  # CORS preflight for the editor
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        try:
            path, version, _ = self._route()
            m = re.match(r"^/specs/([^/]+)(/(virtual|reference|anchor))?$", path)
            if m:
                sid = m.group(1)
                if not _ID_RE.match(sid):
                    return self._error(404, "unknown-id", sid)
                what = m.group(3)
                if what is None:
                    return self._send(200, self.store.fetch_spec(sid, version),
                                      "application/json")
                if what == "virtual":
                    return self._send(200, self.store.fetch_virtual(sid, version),
                                      "image/svg+xml")
                if what == "reference":
                    return self._send(200, self.store.fetch_reference(sid, version),
                                      "image/svg+xml")
                return self._json(200, self.store.fetch_anchor(sid, version))
            if path == "/specs":
                return self._json(200, {"ids": self.store.list_ids()})
            return self._serve_ui(path)
        except UnknownIdError as e:
            self._error(404, "unknown-id", e.spec_id)
        except UnknownVersionError as e:
            self._error(404, "unknown-version", getattr(e, "version", None))
        except NoArBlockError:
            self._error(422, "no-ar", "spec has no ar block")
        except AugvizError as e:
            self._error(400, "bad-request", str(e))

    def _serve_ui(self, path: str):
        if self.ui_dir is None:
            return self._error(404, "not-found", path)
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) \
                or not target.is_file():
            return self._error(404, "not-found", path)
        ctype = _UI_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)

    def do_POST(self):
        try:
            path, _, force = self._route()
            body = self._body()
            if path == "/specs":
                receipt = self.store.publish(body, force=force)
                return self._json(201 if receipt.created else 200,
                                  receipt.to_dict())
            m = re.match(r"^/specs/([0-9a-f]{16})$", path)
            if m:
                receipt = self.store.publish(body, spec_id_hint=m.group(1),
                                             force=force)
                return self._json(201 if receipt.created else 200,
                                  receipt.to_dict())
            if path == "/compile":
                result = compile_document(body)
                svg = render_preview(result, border_boxes=True)
                return self._send(200, svg.encode("utf-8"), "image/svg+xml")
            if path == "/validate":
                spec = parse_spec(body)
                report = validate(spec)
                return self._json(200, report.to_dict())
            return self._error(404, "not-found", path)
        except ValidationFailedError as e:
            self._error(409, "validation-failed", e.report.to_dict())
        except InvalidSpecError as e:
            self._error(400, "invalid-spec",
                        [i.to_dict() for i in e.issues])
        except SpecParseError as e:
            self._error(400, "parse-error", str(e))
        except UnknownIdError as e:
            self._error(404, "unknown-id", e.spec_id)
        except NoArBlockError:
            self._error(422, "no-ar", "spec has no ar block")
        except AugvizError as e:
            self._error(400, "bad-request", str(e))


def make_server(store_dir: str | Path, port: int = 0, hub_url: str | None = None,
                ui_dir: str | Path | None = None) -> ThreadingHTTPServer:
    handler = type("BoundHubHandler", (HubHandler,), {})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    actual = server.server_address[1]
    if hub_url is None:
        hub_url = f"http://127.0.0.1:{actual}"
    handler.store = SpecStore(store_dir, hub_url)
    handler.ui_dir = Path(ui_dir) if ui_dir else None
    return server


def serve_forever(store_dir, port, hub_url=None, ui_dir=None, verbose=True):
    server = make_server(store_dir, port, hub_url, ui_dir)
    server.verbose = verbose
    host, actual = server.server_address
    print(f"spec hub listening on http://{host}:{actual} "
          f"(store: {store_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return server


def run_in_thread(store_dir, port=0, hub_url=None, ui_dir=None):
    """Start a hub for tests; returns (server, base_url, thread)."""
    server = make_server(store_dir, port, hub_url, ui_dir)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, actual = server.server_address
    return server, f"http://{host}:{actual}", thread
