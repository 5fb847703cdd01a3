#!/usr/bin/env python3
"""Record API responses and the CLI report for the viewer's headless
API-replay test.

Builds the loopper corpus coverage database, replays the exact endpoint
handlers for three test selections, and stores the JSON bodies together
with the CLI hierarchy report so the browser test can verify that every
rendered number equals both sources.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hypertest import api, covdb, funcsim, gif, ir  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..")
CORPUS = os.path.join(ROOT, "src", "hypertest", "corpus")
OUT = os.path.join(ROOT, "frontend", "test", "fixtures", "loopper.json")

SELECTIONS = [[], ["go_full"], ["go_full", "po_full"]]
ITEM_PATHS = ["", "per", "per.scr", "per.stat", "per.rxmux"]


def record(ctx, path, query):
    status, _ctype, body = api.respond(ctx, path, query)
    assert status == 200, (path, query, body)
    return json.loads(body)


def main():
    c = ir.parse_circuit(open(os.path.join(CORPUS, "loopper.ckt")).read())
    u = gif.enumerate_gifs(c, "site", "PO")
    progs = [funcsim.parse_program(
        open(os.path.join(CORPUS, "tests", "loopper", f"{n}.vec")).read(), name=n)
        for n in ("go_full", "po_full")]
    covs = gif.gif_fault_sim(c, progs, u)
    db = covdb.from_coverage(c.name, "site", "PO", [covs[p.name] for p in progs])
    ctx = api.ApiContext(db, u)

    fixtures = {
        "meta": record(ctx, "/api/meta", ""),
        "tests": record(ctx, "/api/tests", ""),
        "selections": [],
    }
    for sel in SELECTIONS:
        q = "tests=" + ",".join(sel)
        entry = {
            "tests": sel,
            "tree": record(ctx, "/api/tree", q),
            "cli_report": covdb.format_hierarchy(
                covdb.report_hierarchy(db, sel, u)),
            "items_uncovered": {},
            "items_all": {},
        }
        for path in ITEM_PATHS:
            pq = f"path={path}&covered=false&{q}"
            entry["items_uncovered"][path] = record(ctx, "/api/items", pq)
            entry["items_all"][path] = record(ctx, "/api/items", f"path={path}&{q}")
        fixtures["selections"].append(entry)

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as f:
        json.dump(fixtures, f, indent=1, sort_keys=True)
    print(f"wrote {OUT} ({os.path.getsize(OUT)} bytes)")


if __name__ == "__main__":
    main()
