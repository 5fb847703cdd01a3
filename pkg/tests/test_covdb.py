import random

import pytest
from hypothesis import given, settings, strategies as st

from hypertest import covdb, funcsim, gif, ir


def small_db(seed=0, tests=3, items=100):
    rng = random.Random(seed)
    db = covdb.CoverageDb("c", "abcd1234abcd1234", "site", "PO")
    for i in range(tests):
        bits = rng.getrandbits(items)
        db.add_test(f"t{i}", rng.randrange(1, 50), bits)
    return db


def test_roundtrip_lossless(tmp_path):
    db = small_db()
    p = tmp_path / "x.gcdb"
    covdb.write_db(db, str(p), item_count=100)
    back = covdb.read_db(str(p))
    assert back.tests == db.tests
    assert (back.circuit, back.universe_hash, back.mode, back.model) == \
        ("c", "abcd1234abcd1234", "site", "PO")


def test_version_mismatch_rejected():
    with pytest.raises(covdb.DbError):
        covdb.parse_db("gcdb v9\ncircuit c\nhash h\n")


def test_corrupt_file_rejected():
    text = covdb.print_db(small_db())
    with pytest.raises(covdb.DbError):
        covdb.parse_db(text.replace("cov ", "cov zz", 1))


def test_hash_mismatch_on_merge():
    a = small_db(1)
    b = small_db(2)
    b.universe_hash = "feedfeedfeedfeed"
    with pytest.raises(covdb.DbError):
        covdb.merge([a, b])


def test_merge_identity_with_empty():
    a = small_db(3)
    empty = covdb.CoverageDb("c", a.universe_hash, "site", "PO")
    m = covdb.merge([a, empty])
    assert dict((n, (c, b)) for n, c, b in m.tests) == \
        dict((n, (c, b)) for n, c, b in a.tests)


@given(st.integers(0, 2**60 - 1), st.integers(0, 2**60 - 1), st.integers(0, 2**60 - 1))
@settings(max_examples=60, deadline=None)
def test_merge_algebra(b1, b2, b3):
    def mk(name, bits):
        db = covdb.CoverageDb("c", "h" * 16, "site", "GO")
        db.add_test(name, 5, bits)
        return db
    a, b, c = mk("a", b1), mk("b", b2), mk("c", b3)
    ab_c = covdb.merge([covdb.merge([a, b]), c])
    a_bc = covdb.merge([a, covdb.merge([b, c])])
    ba = covdb.merge([b, a])
    ab = covdb.merge([a, b])
    assert ab_c.tests == a_bc.tests            # associative
    assert ab.tests == ba.tests                # commutative
    assert covdb.merge([a, a]).tests == a.tests  # idempotent
    assert ab.accumulated() == b1 | b2


def test_merge_of_roundtripped_equals_in_memory(tmp_path):
    a, b = small_db(7, tests=2), small_db(8, tests=2)
    for i, db in enumerate((a, b)):
        db.tests = [(f"{n}_{i}", c, bits) for n, c, bits in db.tests]
    m1 = covdb.merge([a, b])
    pa, pb = tmp_path / "a.gcdb", tmp_path / "b.gcdb"
    covdb.write_db(a, str(pa)), covdb.write_db(b, str(pb))
    m2 = covdb.merge([covdb.read_db(str(pa)), covdb.read_db(str(pb))])
    assert m1.tests == m2.tests


def corpus_db():
    text = open("src/hypertest/corpus/dup2po.ckt").read()
    c = ir.parse_circuit(text)
    u = gif.enumerate_gifs(c, "site", "PO")
    progs = []
    for n in ("go_full", "po_full"):
        vec = open(f"src/hypertest/corpus/tests/dup2po/{n}.vec").read()
        progs.append(funcsim.parse_program(vec, name=n))
    covs = gif.gif_fault_sim(c, progs, u)
    db = covdb.from_coverage(c.name, "site", "PO", [covs[p.name] for p in progs])
    return c, u, db


def test_hierarchy_rollup_consistency():
    _c, u, db = corpus_db()
    for sel in ([], ["go_full"], ["go_full", "po_full"]):
        root = covdb.report_hierarchy(db, sel, u)
        assert covdb.check_hierarchy(root)
        if not sel:
            assert all(n.covered == 0 and n.percent == 0.0 for n in root.walk())


class _StubItem:
    def __init__(self, loc):
        self.loc = loc


class _StubUniverse:
    def __init__(self, locs, h="s" * 16):
        self.items = [_StubItem(x) for x in locs]
        self.universe_hash = h


def test_hierarchy_subtree_full_coverage_isolated():
    u = _StubUniverse(["a.x", "a.x", "a.y", "b.z"])
    db = covdb.CoverageDb("c", u.universe_hash, "site", "PO")
    db.add_test("t", 1, 0b0011)  # both a.x items, nothing else
    root = covdb.report_hierarchy(db, ["t"], u)
    a = root.children["a"]
    assert a.children["x"].percent == 100.0
    assert a.children["y"].percent == 0.0
    assert root.children["b"].percent == 0.0
    assert covdb.check_hierarchy(root)


def test_unknown_test_selection_raises():
    _c, u, db = corpus_db()
    with pytest.raises(KeyError):
        covdb.report_hierarchy(db, ["nope"], u)


def test_accumulated_union_matches_single_runs():
    _c, u, db = corpus_db()
    acc = db.accumulated(["go_full", "po_full"])
    assert acc == db.get("go_full")[2] | db.get("po_full")[2]
