"""HTTP resolver and minting service.

Routes::

    GET  /{prefix}/{suffix}[?type=URL|MAGNET][&noredirect=1]
    POST /{prefix}/from-torrent        body: torrent file octets
    POST /{prefix}/from-ndn            body: NDN access JSON container
    PUT  /{prefix}/{suffix}            body: {"values": [{"type", "data", "index"?}]}

Resolution answers ``303 See Other`` with the target in ``Location``; a
MAGNET value wins over a URL value unless ``type`` forces one of them.
``noredirect`` returns ``200`` with the record as JSON instead::

    {"pid": "11022/t1",
     "values": [{"index": 1, "type": "MAGNET", "data": "magnet:?...", "timestamp": 0}]}

Mutations need ``Authorization: Bearer <token>``.  Minting answers ``201``
with ``{"pid": ..., "magnet": ...}``.
"""

from __future__ import annotations

import hmac
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, quote, unquote, urlsplit

from .magnet import serialize_magnet
from .ndn import NdnAccessError, ndn_to_magnet, parse_ndn_access
from .store import (
    HandleError,
    HandleRecord,
    HandleStore,
    HandleValue,
    InvalidPid,
    NoTarget,
    NotFound,
    UnknownPrefix,
    split_pid,
)
from .torrent import TorrentError, torrent_to_magnet

logger = logging.getLogger(__name__)

TOKEN_ENV = "PIDMAGNET_TOKEN"
MAX_BODY = 16 * 2**20
_LOCATION_SAFE = "!#$%&'()*+,-./:;=?@[]~_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    prefixes: tuple[str, ...] = ("11022",)
    token: str | None = None
    store_path: str | None = None

    def __post_init__(self):
        self.prefixes = tuple(self.prefixes)
        if not self.prefixes:
            raise ValueError("at least one prefix must be served")
        if not self.token:
            raise ValueError(f"a bearer token is required (set {TOKEN_ENV})")

    @classmethod
    def from_env(cls, **overrides) -> ServiceConfig:
        env = os.environ
        kwargs = {
            "host": env.get("PIDMAGNET_HOST", "127.0.0.1"),
            "port": int(env.get("PIDMAGNET_PORT", "8000")),
            "prefixes": tuple(p for p in env.get("PIDMAGNET_PREFIXES", "11022").split(",") if p),
            "token": env.get(TOKEN_ENV),
            "store_path": env.get("PIDMAGNET_STORE"),
        }
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


@dataclass
class Response:
    status: int
    body: bytes = b""
    headers: dict[str, str] = field(default_factory=dict)


def _json(status: int, obj) -> Response:
    return Response(status, json.dumps(obj).encode("utf-8"), {"Content-Type": "application/json"})


def _error(status: int, message: str) -> Response:
    return _json(status, {"error": message})


class ResolverApp:
    """Request handling, independent of the HTTP server plumbing."""

    def __init__(self, store: HandleStore, token: str):
        self.store = store
        self.token = token
        # create-or-update in PUT must not interleave with another PUT
        self._put_lock = threading.Lock()

    def __call__(self, method: str, target: str, headers, body: bytes) -> Response:
        url = urlsplit(target)
        segments = url.path.lstrip("/").split("/")
        try:
            if method == "GET":
                return self.resolve(url.path, parse_qs(url.query, keep_blank_values=True))
            if method == "POST" and len(segments) == 2 and segments[1] in ("from-torrent", "from-ndn"):
                if not self._authorized(headers):
                    return self._unauthorized()
                if segments[1] == "from-torrent":
                    return self.mint_from_torrent(segments[0], body)
                return self.mint_from_ndn(segments[0], body)
            if method == "PUT":
                if not self._authorized(headers):
                    return self._unauthorized()
                return self.put_values(url.path, body)
        except InvalidPid as exc:
            return _error(400, str(exc))
        return _error(405 if method not in ("GET", "POST", "PUT") else 404, "no such route")

    # -- auth ------------------------------------------------------------------

    def _authorized(self, headers) -> bool:
        auth = headers.get("Authorization") or ""
        scheme, _, supplied = auth.partition(" ")
        if scheme.lower() != "bearer":
            return False
        return hmac.compare_digest(supplied.strip().encode(), self.token.encode())

    @staticmethod
    def _unauthorized() -> Response:
        resp = _error(401, "missing or invalid bearer token")
        resp.headers["WWW-Authenticate"] = "Bearer"
        return resp

    # -- routes ----------------------------------------------------------------

    @staticmethod
    def _pid(path: str) -> str:
        pid = path.lstrip("/")
        prefix, _, suffix = pid.partition("/")
        try:
            pid = f"{prefix}/{unquote(suffix, errors='strict')}" if suffix else pid
        except UnicodeDecodeError:
            raise InvalidPid(f"PID suffix is not UTF-8: {suffix!r}") from None
        split_pid(pid)
        return pid

    def resolve(self, path: str, query: dict) -> Response:
        pid = self._pid(path)
        forced = query.get("type", [None])[-1]
        if forced is not None:
            forced = forced.upper()
            if forced not in ("URL", "MAGNET"):
                return _error(400, "type must be URL or MAGNET")
        try:
            if "noredirect" in query and query["noredirect"][-1].lower() not in ("0", "false", "no"):
                record = self.store.get_handle(pid)
                if forced is not None and record.value_of(forced) is None:
                    return _error(404, f"{pid} has no {forced} value")
                return _json(200, record.to_json())
            if forced is not None:
                result = self.store.resolve_typed(pid, forced)
            else:
                result = self.store.resolve_default(pid)
        except (NotFound, NoTarget) as exc:
            return _error(404, str(exc))
        location = quote(result.target, safe=_LOCATION_SAFE)
        return Response(303, b"", {"Location": location})

    def _mint(self, prefix: str, magnet: str) -> Response:
        try:
            record = self.store.create_handle(prefix, None, [HandleValue(1, "MAGNET", magnet)])
        except UnknownPrefix as exc:
            return _error(404, str(exc))
        resp = _json(201, {"pid": record.pid, "magnet": magnet})
        resp.headers["Location"] = "/" + record.pid
        return resp

    def mint_from_torrent(self, prefix: str, body: bytes) -> Response:
        try:
            link = torrent_to_magnet(body, include_trackers=False)
        except TorrentError as exc:
            return _error(400, f"invalid torrent: {exc}")
        return self._mint(prefix, serialize_magnet(link))

    def mint_from_ndn(self, prefix: str, body: bytes) -> Response:
        try:
            info = parse_ndn_access(body)
        except NdnAccessError as exc:
            return _error(400, f"invalid NDN access container: {exc}")
        return self._mint(prefix, serialize_magnet(ndn_to_magnet(info)))

    def put_values(self, path: str, body: bytes) -> Response:
        pid = self._pid(path)
        prefix, suffix = split_pid(pid)
        try:
            specs = _value_specs(body)
        except ValueError as exc:
            return _error(400, str(exc))
        with self._put_lock:
            existing = self.store.get_handle(pid) if pid in self.store else None
            try:
                values = assign_indices(existing, specs)
                if existing is None:
                    record = self.store.create_handle(prefix, suffix, values)
                    status = 201
                else:
                    record = self.store.update_handle(pid, values)
                    status = 200
            except UnknownPrefix as exc:
                return _error(404, str(exc))
            except HandleError as exc:
                return _error(400, str(exc))
        return _json(status, record.to_json())


def _value_specs(body: bytes) -> list[dict]:
    try:
        obj = json.loads(body)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ValueError(f"body is not JSON: {exc}") from None
    values = obj.get("values") if isinstance(obj, dict) else None
    if not isinstance(values, list) or not values:
        raise ValueError("body needs a non-empty 'values' list")
    for spec in values:
        if not isinstance(spec, dict) or not isinstance(spec.get("type"), str):
            raise ValueError("every value needs a string 'type'")
        if not isinstance(spec.get("data"), str):
            raise ValueError("every value needs a string 'data'")
        if "index" in spec and (isinstance(spec["index"], bool) or not isinstance(spec["index"], int)):
            raise ValueError("'index' must be an integer")
    return values


def assign_indices(existing: HandleRecord | None, specs: list[dict]) -> list[HandleValue]:
    """Turn value specs into values, filling in missing indices.

    A spec without an index takes over the index of an existing value of the
    same type, or else the lowest free index.
    """
    taken = {v.index for v in existing.values} if existing else set()
    taken |= {s["index"] for s in specs if "index" in s}
    out = []
    for spec in specs:
        index = spec.get("index")
        if index is None:
            same = existing.value_of(spec["type"]) if existing else None
            if same is not None:
                index = same.index
            else:
                index = 1
                while index in taken:
                    index += 1
            taken.add(index)
        out.append(HandleValue(index, spec["type"], spec["data"]))
    return out


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "pidmagnet"
    app: ResolverApp

    def _dispatch(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            resp = _error(413, "request body too large")
            self.close_connection = True
        else:
            body = self.rfile.read(length) if length else b""
            try:
                resp = self.app(self.command, self.path, self.headers, body)
            except Exception:
                logger.exception("unhandled error for %s %s", self.command, self.path)
                resp = _error(500, "internal error")
        self.send_response(resp.status)
        for name, value in resp.headers.items():
            self.send_header(name, value)
        self.send_header("Content-Length", str(len(resp.body)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(resp.body)

    do_GET = do_POST = do_PUT = do_DELETE = _dispatch

    def log_message(self, format, *args):
        logger.info("%s - %s", self.address_string(), format % args)


def make_server(store: HandleStore, token: str, host: str = "127.0.0.1", port: int = 0):
    """Build a threaded HTTP server bound to ``(host, port)``; port 0 picks one."""
    handler = type("ResolverHandler", (_Handler,), {"app": ResolverApp(store, token)})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def open_store(config: ServiceConfig) -> HandleStore:
    store = HandleStore(config.store_path)
    for prefix in config.prefixes:
        if prefix not in store.prefixes:
            store.register_prefix(prefix)
    return store


def serve(config: ServiceConfig) -> None:
    store = open_store(config)
    server = make_server(store, config.token, config.host, config.port)
    logger.info("serving prefixes %s on %s:%d", ",".join(config.prefixes), *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()
        store.close()
