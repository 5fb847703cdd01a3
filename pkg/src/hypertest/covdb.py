"""Persistent coverage database (.gcdb), merge algebra and hierarchy
rollup.

A database stores, for one circuit/universe, the covered-item bitset of
each named test.  Merging unions test lists; accumulated coverage is the
bitwise OR of the selected tests.  The hierarchy report rolls covered/total
counts up a tree keyed by the gates' dot-separated reporting paths.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

from . import __version__

GCDB_VERSION = "gcdb v1"
CHUNK = 64  # items per cov line


class DbError(Exception):
    pass


@dataclass
class CoverageDb:
    circuit: str
    universe_hash: str
    mode: str
    model: str
    tool_version: str = __version__
    tests: list = field(default_factory=list)   # (name, cycles, bitset)

    def test_names(self):
        return [name for name, _c, _b in self.tests]

    def get(self, name):
        for n, cyc, bits in self.tests:
            if n == name:
                return (n, cyc, bits)
        raise KeyError(name)

    def accumulated(self, names=None):
        sel = self.test_names() if names is None else names
        acc = 0
        for n in sel:
            acc |= self.get(n)[2]
        return acc

    def add_test(self, name, cycles, bitset):
        if name in self.test_names():
            raise DbError(f"duplicate test name '{name}'")
        self.tests.append((name, cycles, bitset))


def from_coverage(circuit, mode, model, covs) -> CoverageDb:
    """Build a db from gif.CoverageSet results."""
    covs = list(covs)
    if not covs:
        raise DbError("no coverage sets")
    db = CoverageDb(circuit, covs[0].universe_hash, mode, model)
    for cov in covs:
        if cov.universe_hash != db.universe_hash:
            raise DbError("coverage sets span different universes")
        db.add_test(cov.test_name, cov.cycles, cov.covered)
    return db


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def print_db(db: CoverageDb, item_count=None) -> str:
    lines = [GCDB_VERSION,
             f"circuit {db.circuit}",
             f"hash {db.universe_hash}",
             f"mode {db.mode}",
             f"model {db.model}",
             f"tool {db.tool_version}"]
    for name, cycles, bits in db.tests:
        lines.append(f"test {name} cycles={cycles}")
        n_chunks = max(1, -(-max(bits.bit_length(), 1) // CHUNK))
        if item_count is not None:
            n_chunks = max(n_chunks, -(-item_count // CHUNK) or 1)
        for k in range(n_chunks):
            chunk = (bits >> (k * CHUNK)) & ((1 << CHUNK) - 1)
            lines.append(f"cov {chunk:016x}")
    return "\n".join(lines) + "\n"


def parse_db(text: str) -> CoverageDb:
    lines = text.splitlines()
    if not lines or lines[0].strip() != GCDB_VERSION:
        raise DbError(f"bad or missing header, expected '{GCDB_VERSION}'")
    db = CoverageDb("", "", "", "", "")
    cur = None
    chunk_index = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key == "circuit":
            db.circuit = rest
        elif key == "hash":
            db.universe_hash = rest
        elif key == "mode":
            db.mode = rest
        elif key == "model":
            db.model = rest
        elif key == "tool":
            db.tool_version = rest
        elif key == "test":
            name, _, cyc = rest.partition(" ")
            if not cyc.startswith("cycles="):
                raise DbError(f"line {lineno}: malformed test line")
            if name in db.test_names():
                raise DbError(f"line {lineno}: duplicate test '{name}'")
            db.tests.append((name, int(cyc[len("cycles="):]), 0))
            cur = len(db.tests) - 1
            chunk_index = 0
        elif key == "cov":
            if cur is None:
                raise DbError(f"line {lineno}: cov before any test")
            try:
                chunk = int(rest, 16)
            except ValueError:
                raise DbError(f"line {lineno}: corrupt cov chunk") from None
            if chunk >= (1 << CHUNK):
                raise DbError(f"line {lineno}: cov chunk too wide")
            name, cyc, bits = db.tests[cur]
            db.tests[cur] = (name, cyc, bits | (chunk << (chunk_index * CHUNK)))
            chunk_index += 1
        else:
            raise DbError(f"line {lineno}: unknown key '{key}'")
    if not db.circuit or not db.universe_hash:
        raise DbError("incomplete header")
    if not db.tool_version:
        raise DbError("missing tool version")
    return db


def write_db(db: CoverageDb, path, item_count=None):
    """Atomic write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".gcdb-", dir=directory)
    try:
        with os.fdopen(fd, "w") as f:
            f.write(print_db(db, item_count=item_count))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_db(path) -> CoverageDb:
    with open(path) as f:
        return parse_db(f.read())


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------

def merge(dbs) -> CoverageDb:
    """Union of test lists across databases of the same universe.

    Same-named tests must carry identical data (then they merge to one
    entry), otherwise the merge is rejected.  The result's test order is
    canonical (sorted by name), which makes merge associative, commutative
    and idempotent."""
    dbs = list(dbs)
    if not dbs:
        raise DbError("nothing to merge")
    head = dbs[0]
    byname = {}
    for db in dbs:
        if db.universe_hash != head.universe_hash:
            raise DbError(
                f"universe hash mismatch: {db.universe_hash} vs {head.universe_hash}")
        for name, cycles, bits in db.tests:
            if name in byname and byname[name] != (cycles, bits):
                raise DbError(f"conflicting data for test '{name}'")
            byname[name] = (cycles, bits)
    out = CoverageDb(head.circuit, head.universe_hash, head.mode, head.model,
                     head.tool_version)
    for name in sorted(byname):
        cycles, bits = byname[name]
        out.tests.append((name, cycles, bits))
    return out


# ---------------------------------------------------------------------------
# hierarchy rollup
# ---------------------------------------------------------------------------

@dataclass
class HierNode:
    path: str
    total: int = 0
    covered: int = 0
    own_total: int = 0
    own_covered: int = 0
    children: dict = field(default_factory=dict)

    @property
    def percent(self):
        return 100.0 * self.covered / self.total if self.total else 0.0

    def walk(self):
        yield self
        for k in sorted(self.children):
            yield from self.children[k].walk()


def report_hierarchy(db: CoverageDb, selected, universe) -> HierNode:
    """Roll up per-node coverage over the universe items' loc paths.

    selected: iterable of test names ('all' handled by the caller).
    Returns the root node (path '')."""
    if universe.universe_hash != db.universe_hash:
        raise DbError("universe does not match database (hash mismatch)")
    for name in selected:
        db.get(name)  # raises KeyError for unknown tests
    acc = db.accumulated(list(selected))
    root = HierNode("")

    def node_for(path):
        node = root
        if not path:
            return node
        parts = path.split(".")
        for i, part in enumerate(parts):
            key = ".".join(parts[:i + 1])
            node = node.children.setdefault(part, HierNode(key))
        return node

    for idx, item in enumerate(universe.items):
        leaf = node_for(item.loc)
        hit = (acc >> idx) & 1
        leaf.own_total += 1
        leaf.own_covered += hit
        node = root
        node.total += 1
        node.covered += hit
        if item.loc:
            parts = item.loc.split(".")
            for i, part in enumerate(parts):
                node = node.children[part]
                node.total += 1
                node.covered += hit
    return root


def check_hierarchy(root: HierNode):
    """Parent totals equal the sum of child totals plus own items."""
    for node in root.walk():
        t = node.own_total + sum(c.total for c in node.children.values())
        cv = node.own_covered + sum(c.covered for c in node.children.values())
        if t != node.total or cv != node.covered:
            return False
        if not 0.0 <= node.percent <= 100.0:
            return False
    return True


def format_hierarchy(root: HierNode) -> str:
    lines = []

    def emit(node, depth):
        name = node.path.split(".")[-1] if node.path else "(root)"
        lines.append(f"{'  ' * depth}{name} {node.covered}/{node.total} "
                     f"{node.percent:.2f}%")
        for k in sorted(node.children):
            emit(node.children[k], depth + 1)

    emit(root, 0)
    return "\n".join(lines) + "\n"
