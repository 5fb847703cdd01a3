"""Read-only HTTP API over a coverage database, plus static file serving
for the browser viewer.

Responses are pure functions of (database, universe, query): the handler
delegates to `respond`, which the tests drive directly without sockets.
"""

from __future__ import annotations

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import covdb

CONSTRUCT_LABELS = {
    "MUX2": "if-then-else",
    "CASE": "case/if-then-else",
    "EQ": "equal",
    "NEQ": "not-equal",
    "LT": "less-than",
    "ADD": "adder",
    "SUB": "subtractor",
    "MUL": "multiplier",
    "SHL": "shifter",
    "SHR": "shifter",
    "NOT": "bitwise",
    "AND": "bitwise",
    "OR": "bitwise",
    "XOR": "bitwise",
    "CONST": "constant",
    "SLICE": "wiring",
    "CONCAT": "wiring",
}


def _json(obj, status=200):
    body = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return status, "application/json", body


def _error(status, message):
    return _json({"error": message}, status)


def _tree_json(node):
    return {
        "path": node.path,
        "total": node.total,
        "covered": node.covered,
        "percent": round(node.percent, 4),
        "own_total": node.own_total,
        "own_covered": node.own_covered,
        "children": [_tree_json(node.children[k]) for k in sorted(node.children)],
    }


class ApiContext:
    def __init__(self, db: covdb.CoverageDb, universe, ui_dir=None):
        self.db = db
        self.universe = universe
        self.ui_dir = os.path.abspath(ui_dir) if ui_dir else None

    # -- selections ------------------------------------------------------

    def _selection(self, query):
        """Parse tests=...; returns (names, error).  'all' selects every
        test; empty string selects none."""
        raw = query.get("tests", [""])[0]
        if raw == "all":
            return self.db.test_names(), None
        names = [n for n in raw.split(",") if n]
        known = set(self.db.test_names())
        for n in names:
            if n not in known:
                return None, f"unknown test '{n}'"
        return names, None

    # -- endpoints ---------------------------------------------------------

    def meta(self, query):
        db = self.db
        return _json({
            "circuit": db.circuit,
            "hash": db.universe_hash,
            "mode": db.mode,
            "model": db.model,
            "tool": db.tool_version,
            "items": len(self.universe.items),
        })

    def tests(self, query):
        return _json([{"name": n, "cycles": c} for n, c, _b in self.db.tests])

    def tree(self, query):
        names, err = self._selection(query)
        if err:
            return _error(400, err)
        root = covdb.report_hierarchy(self.db, names, self.universe)
        return _json(_tree_json(root))

    def items(self, query):
        names, err = self._selection(query)
        if err:
            return _error(400, err)
        path = query.get("path", [""])[0]
        known_paths = {""}
        for it in self.universe.items:
            parts = it.loc.split(".") if it.loc else []
            for i in range(len(parts)):
                known_paths.add(".".join(parts[:i + 1]))
        if path not in known_paths:
            return _error(400, f"unknown path '{path}'")
        covered_filter = query.get("covered", [None])[0]
        if covered_filter not in (None, "true", "false"):
            return _error(400, "covered must be true or false")
        acc = self.db.accumulated(names)
        rows = []
        for idx, it in enumerate(self.universe.items):
            if path and not (it.loc == path or it.loc.startswith(path + ".")):
                continue
            hit = bool((acc >> idx) & 1)
            if covered_filter == "true" and not hit:
                continue
            if covered_filter == "false" and hit:
                continue
            rows.append({
                "item": it.canonical(),
                "gate": it.gate_id,
                "kind": it.kind,
                "construct": CONSTRUCT_LABELS.get(it.kind, it.kind.lower()),
                "loc": it.loc,
                "covered": hit,
            })
        return _json({"path": path, "count": len(rows), "items": rows})


def respond(ctx: ApiContext, path, query_string=""):
    """Route one GET request; returns (status, content type, body bytes)."""
    query = parse_qs(query_string, keep_blank_values=True)
    routes = {
        "/api/meta": ctx.meta,
        "/api/tests": ctx.tests,
        "/api/tree": ctx.tree,
        "/api/items": ctx.items,
    }
    if path in routes:
        return routes[path](query)
    if ctx.ui_dir:
        return _static(ctx, path)
    return _error(404, f"unknown route '{path}'")


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


def _static(ctx, path):
    rel = path.lstrip("/") or "index.html"
    full = os.path.abspath(os.path.join(ctx.ui_dir, rel))
    if not full.startswith(ctx.ui_dir + os.sep) and full != ctx.ui_dir:
        return _error(404, "not found")
    if os.path.isdir(full):
        full = os.path.join(full, "index.html")
    if not os.path.isfile(full):
        return _error(404, f"unknown route '{path}'")
    ext = os.path.splitext(full)[1]
    with open(full, "rb") as f:
        return 200, _CONTENT_TYPES.get(ext, "application/octet-stream"), f.read()


def make_server(db, universe, port=0, ui_dir=None, host="127.0.0.1"):
    """ThreadingHTTPServer bound to the port (0 = ephemeral)."""
    ctx = ApiContext(db, universe, ui_dir)

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            parsed = urlparse(self.path)
            status, ctype, body = respond(ctx, parsed.path, parsed.query)
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer((host, port), Handler)
    server.ctx = ctx
    return server


def serve_api(db, universe, port, ui_dir=None, host="127.0.0.1",
              in_background=False):
    """Run the read-only service; returns the server (background mode) or
    blocks until interrupted."""
    server = make_server(db, universe, port, ui_dir, host)
    if in_background:
        t = threading.Thread(target=server.serve_forever, daemon=True)
        t.start()
        return server
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return server
