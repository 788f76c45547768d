"""HTTP scan service: POST /scan and GET /health over one loaded model.

The model is immutable shared state, so concurrent requests are safe and
identical bodies always produce identical responses. Per-request failures
are answered with JSON errors and never take the service down.
"""

from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .checkpoint import FORMAT_VERSION
from .model import ModelParams, predict
from .tokenizer import Vocabulary

log = logging.getLogger(__name__)

# A function, not a project, is the unit of analysis.
DEFAULT_MAX_REQUEST_BYTES = 1_048_576
DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8765


def make_server(
    model: ModelParams,
    vocab: Vocabulary,
    host: str = DEFAULT_HOST,
    port: int = DEFAULT_PORT,
    max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES,
) -> ThreadingHTTPServer:
    """Build (but do not start) the threaded HTTP server."""
    handler = _build_handler(model, vocab, max_request_bytes)
    return ThreadingHTTPServer((host, port), handler)


def _build_handler(model: ModelParams, vocab: Vocabulary, max_request_bytes: int):
    class ScanHandler(BaseHTTPRequestHandler):
        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            if self.path == "/health":
                self._send(200, {"status": "ok"})
            elif self.path == "/scan":
                self._send(405, {"error": "scan requires POST"})
            else:
                self._send(404, {"error": f"unknown path {self.path}"})

        def do_OPTIONS(self) -> None:
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def do_POST(self) -> None:
            if self.path != "/scan":
                self._send(404, {"error": f"unknown path {self.path}"})
                return
            try:
                self._handle_scan()
            except Exception:
                log.exception("scan request failed")
                try:
                    self._send(500, {"error": "internal error"})
                except Exception:
                    pass  # client already gone

        def _handle_scan(self) -> None:
            try:
                length = int(self.headers.get("Content-Length", ""))
            except ValueError:
                self._send(400, {"error": "missing or unreadable Content-Length"})
                return
            if length > max_request_bytes:
                self._send(413, {"error": f"request body over {max_request_bytes} bytes"})
                return
            raw = self.rfile.read(length)
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                self._send(400, {"error": f"invalid JSON body: {exc.msg}"})
                return
            if not isinstance(obj, dict) or not isinstance(obj.get("code"), str):
                self._send(400, {"error": "body must be an object with a string 'code' field"})
                return
            result = predict(model, obj["code"], vocab)
            self._send(200, {
                "probabilities": result.probabilities,
                "token_count": result.token_count,
                "model_format_version": FORMAT_VERSION,
            })

        def log_message(self, fmt: str, *args) -> None:
            log.debug("%s " + fmt, self.address_string(), *args)

    return ScanHandler


def serve_forever(server: ThreadingHTTPServer) -> None:
    host, port = server.server_address[:2]
    log.info("scan service listening on http://%s:%s", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        log.info("shutting down")
    finally:
        server.server_close()
