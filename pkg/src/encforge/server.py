"""Loopback inference service over a frozen checkpoint.

JSON over HTTP, stdlib only:

    GET  /model               -> {"K": .., "T": .., "H": .., "variant": ..}
    POST /decode {"z": [K]}   -> {"s1": [[x, y] * T], "s2": [[x, y] * T]}
    POST /rationality {"z": [K]} -> {"distance": [..], "speed": [..], "direction": [..]}
    GET  /sweep?code=k[&lo=&hi=&step=] -> {"code": k, "frames": [{"value", "s1", "s2"}]}

The model is read-only, so concurrent requests are safe; identical
requests produce identical bytes. A desk tool: binds 127.0.0.1 unless
told otherwise.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .metrics import rationality_report
from .model import TrajectoryVAE, latent_sweep


class RequestError(ValueError):
    """Bad request; carries the offending field name when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ModelService:
    """Route handling, separated from HTTP plumbing so it tests in-process."""

    def __init__(self, model: TrajectoryVAE, horizon: int = 50):
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.model = model
        self.horizon = horizon

    def handle(self, method: str, path: str, body: bytes | None = None):
        """Dispatch one request; returns (status, payload dict)."""
        url = urlparse(path)
        try:
            if method == "GET" and url.path == "/model":
                return 200, {"K": self.model.latent, "T": self.horizon,
                             "H": self.model.hidden, "variant": self.model.variant}
            if method == "POST" and url.path == "/decode":
                enc = self.model.decode(self._read_z(body), self.horizon)
                return 200, {"s1": enc.s1.tolist(), "s2": enc.s2.tolist()}
            if method == "POST" and url.path == "/rationality":
                enc = self.model.decode(self._read_z(body), self.horizon)
                report = rationality_report(enc)
                return 200, {"distance": report.distance.tolist(),
                             "speed": report.speed.tolist(),
                             "direction": report.direction.tolist()}
            if method == "GET" and url.path == "/sweep":
                return 200, self._sweep(parse_qs(url.query))
        except RequestError as e:
            payload = {"error": str(e)}
            if e.field:
                payload["field"] = e.field
            return 400, payload
        return 404, {"error": f"no such endpoint: {method} {url.path}"}

    def _read_z(self, body):
        if not body:
            raise RequestError("empty request body; expected JSON with field 'z'", "z")
        try:
            doc = json.loads(body.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise RequestError(f"invalid JSON body: {e}") from None
        if not isinstance(doc, dict) or "z" not in doc:
            raise RequestError("missing field 'z'", "z")
        z = doc["z"]
        K = self.model.latent
        if (not isinstance(z, list) or len(z) != K
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
            raise RequestError(f"field 'z' must be a list of {K} numbers", "z")
        return [float(v) for v in z]

    def _sweep(self, query):
        def num(name, default):
            if name not in query:
                return default
            try:
                return float(query[name][0])
            except ValueError:
                raise RequestError(f"query parameter {name!r} must be a number", name) from None

        if "code" not in query:
            raise RequestError("missing query parameter 'code'", "code")
        try:
            code = int(query["code"][0])
        except ValueError:
            raise RequestError("query parameter 'code' must be an integer", "code") from None
        lo, hi, step = num("lo", -1.0), num("hi", 1.0), num("step", 0.1)
        try:
            frames = latent_sweep(self.model, code, lo=lo, hi=hi, step=step,
                                  horizon=self.horizon)
        except (IndexError, ValueError) as e:
            raise RequestError(str(e), "code" if isinstance(e, IndexError) else None) from None
        return {"code": code,
                "frames": [{"value": v, "s1": e.s1.tolist(), "s2": e.s2.tolist()}
                           for v, e in frames]}


class _Handler(BaseHTTPRequestHandler):
    def _dispatch(self, method):
        body = None
        if method == "POST":
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length) if length else b""
        status, payload = self.server.service.handle(method, self.path, body)
        blob = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(blob)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(blob)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def log_message(self, fmt, *args):
        pass  # keep the CLI quiet; errors surface in responses


def make_server(model: TrajectoryVAE, port: int, horizon: int = 50,
                host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Bound but not yet serving; call serve_forever() (tests use a thread)."""
    server = ThreadingHTTPServer((host, port), _Handler)
    server.service = ModelService(model, horizon=horizon)
    return server


def serve(model: TrajectoryVAE, port: int, horizon: int = 50,
          host: str = "127.0.0.1") -> None:
    server = make_server(model, port, horizon=horizon, host=host)
    actual = server.server_address[1]
    print(f"serving {model.variant} (K={model.latent}, T={horizon}) "
          f"on http://{host}:{actual}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
