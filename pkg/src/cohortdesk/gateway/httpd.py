"""HTTP binding for the gateway: JSON request/response over stdlib http.server.

Machine-to-machine routes authenticate with a time-sensitive token header
checked before any handler logic; human-facing routes carry a session
identity header (standing in for the institutional SSO front door).
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .app import AuthError, Gateway, GatewayError, RequestError
from .tokens import verify_token

TOKEN_HEADER = "X-Api-Token"
USER_HEADER = "X-User-Id"

_MACHINE_ROUTES = (
    ("POST", "/api/identity/verify"),
    ("POST", "/api/anon/entries"),
    ("POST", "/api/anon/scrub"),
    ("GET", "/api/compliance/lookup"),
)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


class GatewayHandler(BaseHTTPRequestHandler):
    server_version = "cohortdesk"
    gateway: Gateway  # set by make_server

    # quiet the default stderr chatter; the audit journal is the log
    def log_message(self, fmt, *args):
        pass

    # ---- plumbing -------------------------------------------------------

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, status: int, text: str, content_type: str = "text/csv; charset=utf-8") -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            doc = json.loads(raw)
        except ValueError as exc:
            raise RequestError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise RequestError("request body must be a JSON object")
        return doc

    def _machine_auth(self) -> None:
        """Token + allow-list check; runs before any handler logic."""
        gw = self.gateway
        token = self.headers.get(TOKEN_HEADER, "")
        origin = self.client_address[0]
        verdict = verify_token(
            token, origin, gw.config.allow_list, gw.config.shared_secret.encode("utf-8")
        )
        if not verdict:
            gw.audit.append(
                user_id="api", action="token_verify", outcome="deny",
                detail=verdict.reason or "rejected",
            )
            raise AuthError(f"token rejected: {verdict.reason}")

    def _user(self) -> str:
        user = self.headers.get(USER_HEADER, "").strip()
        if not user:
            raise AuthError(f"missing {USER_HEADER} header")
        return user

    # ---- routing ----------------------------------------------------------

    def do_GET(self):  # noqa: N802  (stdlib handler naming)
        self._dispatch("GET")

    def do_POST(self):  # noqa: N802
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        url = urlparse(self.path)
        path = url.path.rstrip("/") or "/"
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if (method, path) in _MACHINE_ROUTES:
                self._machine_auth()
            self._route(method, path, query)
        except GatewayError as exc:
            payload = {"error": str(exc)}
            if isinstance(exc, RequestError) and exc.diagnostics:
                payload["diagnostics"] = exc.diagnostics
            self._send_json(exc.status, payload)
        except Exception as exc:  # pragma: no cover - defensive envelope
            self._send_json(500, {"error": f"internal error: {exc}"})

    def _route(self, method: str, path: str, query: dict) -> None:
        gw = self.gateway

        if method == "POST" and path == "/api/identity/verify":
            body = self._read_body()
            found = gw.identity_verify(body.get("mrn", ""))
            if found is None:
                self._send_json(404, {"error": "not found"})
            else:
                self._send_json(200, found)
            return

        if method == "POST" and path == "/api/anon/entries":
            body = self._read_body()
            self._send_json(200, {"entries": gw.anon_entries(body.get("study_id", ""), body.get("mrns") or [])})
            return

        if method == "POST" and path == "/api/anon/scrub":
            body = self._read_body()
            self._send_json(
                200,
                gw.anon_scrub(body.get("study_id", ""), body.get("value", ""), body.get("mode", "stable")),
            )
            return

        if method == "GET" and path == "/api/compliance/lookup":
            self._send_json(200, gw.compliance_lookup(query.get("term", "")))
            return

        if method == "GET" and path == "/api/compliance/matrix":
            user = self._user()
            self._send_json(200, {"rows": gw.compliance_matrix(user, query.get("protocol", ""))})
            return

        if method == "POST" and path == "/api/cohort/eval":
            user = self._user()
            self._send_json(200, gw.eval_query(user, self._read_body()))
            return

        if method == "POST" and path == "/api/cohort/save":
            user = self._user()
            self._send_json(200, gw.save_cohort(user, self._read_body()))
            return

        if method == "GET" and path == "/api/cohort/list":
            user = self._user()
            self._send_json(200, {"cohorts": gw.list_cohorts(user)})
            return

        parts = path.split("/")
        # /api/cohort/{id}/members
        if method == "GET" and len(parts) == 5 and parts[:3] == ["", "api", "cohort"] and parts[4] == "members":
            user = self._user()
            self._send_json(200, {"members": gw.cohort_members(user, parts[3])})
            return

        # /api/cohort/{id}/chart/{member}
        if method == "GET" and len(parts) == 6 and parts[:3] == ["", "api", "cohort"] and parts[4] == "chart":
            user = self._user()
            chart = gw.get_chart(user, parts[3], parts[5])
            self._send_json(200, chart.to_json_dict())
            return

        if method == "POST" and len(parts) == 5 and parts[:3] == ["", "api", "cohort"] and parts[4] == "download":
            user = self._user()
            body = self._read_body()
            manifest = gw.download(user, parts[3], body.get("mode", ""), body.get("dest", ""))
            self._send_json(200, manifest)
            return

        if method == "POST" and len(parts) == 5 and parts[:3] == ["", "api", "cohort"] and parts[4] == "recruitment":
            user = self._user()
            report = gw.recruitment(user, parts[3])
            self._send_text(200, report)
            return

        if method == "POST" and len(parts) == 5 and parts[:3] == ["", "api", "cohort"] and parts[4] == "refresh":
            user = self._user()
            event = gw.refresh(user, parts[3])
            self._send_json(200, event.to_record())
            return

        if method == "GET" and path == "/api/audit":
            user = self._user()
            self._send_json(200, {"records": gw.audit_query(user, query)})
            return

        if method == "GET" and not path.startswith("/api/"):
            self._serve_static(path)
            return

        self._send_json(404, {"error": f"no route {method} {path}"})

    def _serve_static(self, path: str) -> None:
        static_dir = self.gateway.config.static_dir
        if static_dir is None:
            self._send_json(404, {"error": "no static assets configured"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (Path(static_dir) / rel).resolve()
        if not str(target).startswith(str(Path(static_dir).resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(gateway: Gateway, host: str | None = None, port: int | None = None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (GatewayHandler,), {"gateway": gateway})
    server = ThreadingHTTPServer(
        (host or gateway.config.host, port if port is not None else gateway.config.port), handler
    )
    return server


def serve_in_thread(gateway: Gateway, host: str = "127.0.0.1", port: int = 0):
    """Start the server on a background thread; returns (server, base_url)."""
    server = make_server(gateway, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    actual_host, actual_port = server.server_address[:2]
    return server, f"http://{actual_host}:{actual_port}"
