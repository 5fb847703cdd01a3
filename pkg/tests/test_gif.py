import pytest

from hypertest import funcsim, gif, ir


def single(kind, ins, out_w, extra=""):
    lines = ["circuit t"]
    names = []
    for i, w in enumerate(ins):
        names.append(f"i{i}")
        lines.append(f"input i{i}:{w}")
    lines.append(f"output y:{out_w}")
    lines.append(f"gate g kind={kind}{extra} in=({','.join(names)}) out=(y) loc=top.g")
    lines.append("end")
    return ir.parse_circuit("\n".join(lines))


def exhaustive_program(widths, names=None):
    total = sum(widths)
    names = names or [f"i{i}" for i in range(len(widths))]
    lines = []
    for m in range(1 << total):
        toks = []
        pos = 0
        for n, w in zip(names, widths):
            toks.append(f"{n}={(m >> pos) & ((1 << w) - 1)}")
            pos += w
        lines.append("set " + " ".join(toks))
    return funcsim.parse_program("\n".join(lines), name="exhaustive")


def test_xor2_site_go_item_count():
    c = single("XOR", (1, 1), 1)
    u = gif.enumerate_gifs(c, "site", "GO")
    assert len(u.items) == 6


def test_and2_site_go_item_count():
    c = single("AND", (1, 1), 1)
    u = gif.enumerate_gifs(c, "site", "GO")
    assert len(u.items) == 4


def test_not_site_go_universe_and_full_coverage():
    c = single("NOT", (1,), 1)
    u = gif.enumerate_gifs(c, "site", "GO")
    assert len(u.items) == 2
    p = funcsim.parse_program("set i0=0\nset i0=1", name="t01")
    cov = gif.gif_fault_sim(c, [p], u)["t01"]
    assert cov.count() == len(u.items)


def test_mux2_kmap_go_count_and_exhaustive_sweep():
    c = single("MUX2", (1, 1, 1), 1)
    u = gif.enumerate_gifs(c, "kmap", "GO")
    assert len(u.items) == 8
    p = exhaustive_program((1, 1, 1))
    cov = gif.gif_fault_sim(c, [p], u)[p.name]
    assert cov.count() == 8


def test_kmap_width_cap():
    c = single("ADD", (8, 8), 8)
    with pytest.raises(gif.KmapWidthExceeded):
        gif.enumerate_gifs(c, "kmap", "GO")


def test_path_cap():
    c = single("MUL", (4, 4), 4)
    with pytest.raises(gif.PathCapExceeded):
        gif.enumerate_gifs(c, "path", "GO", path_cap=10)


def test_empty_test_empty_coverage():
    c = single("XOR", (2, 2), 2)
    u = gif.enumerate_gifs(c, "site", "PO")
    p = funcsim.VectorProgram("empty", [])
    cov = gif.gif_fault_sim(c, [p], u)["empty"]
    assert cov.covered == 0


def test_universe_hash_changes_with_inputs():
    c = single("XOR", (1, 1), 1)
    h1 = gif.enumerate_gifs(c, "site", "GO").universe_hash
    h2 = gif.enumerate_gifs(c, "site", "PO").universe_hash
    h3 = gif.enumerate_gifs(c, "kmap", "GO").universe_hash
    c2 = single("OR", (1, 1), 1)
    h4 = gif.enumerate_gifs(c2, "site", "GO").universe_hash
    assert len({h1, h2, h3, h4}) == 4


def test_determinism_and_serial_equals_concurrent():
    c = single("ADD", (3, 3), 3)
    u1 = gif.enumerate_gifs(c, "site", "PO")
    u2 = gif.enumerate_gifs(c, "site", "PO")
    assert [i.canonical() for i in u1.items] == [i.canonical() for i in u2.items]
    p = exhaustive_program((3, 3))
    p.cycles = p.cycles[:17]
    conc = gif.gif_fault_sim(c, [p], u1, mode="concurrent")[p.name]
    ser = gif.gif_fault_sim(c, [p], u1, mode="serial")[p.name]
    assert conc.covered == ser.covered


def test_monotonicity_appending_cycles():
    c = single("LT", (3, 3), 1)
    u = gif.enumerate_gifs(c, "site", "PO")
    full = exhaustive_program((3, 3))
    prev = 0
    for n in (1, 5, 13, 29, 64):
        p = funcsim.VectorProgram("pfx", full.cycles[:n])
        cov = gif.gif_fault_sim(c, [p], u)["pfx"]
        assert cov.covered & prev == prev  # superset
        prev = cov.covered


def test_go_po_dominance():
    c = single("SUB", (2, 2), 2)
    ugo = gif.enumerate_gifs(c, "site", "GO")
    upo = gif.enumerate_gifs(c, "site", "PO")
    p = exhaustive_program((2, 2))
    covgo = gif.gif_fault_sim(c, [p], ugo)[p.name]
    covpo = gif.gif_fault_sim(c, [p], upo)[p.name]
    go_covered = {(it.gate_id, it.i) for n, it in enumerate(ugo.items)
                  if covgo.has(n)}
    for n, it in enumerate(upo.items):
        if covpo.has(n):
            assert (it.gate_id, it.i) in go_covered


def test_classify_masked_gate_uncoverable():
    text = """
circuit masked
input a:1
input b:1
output y:1
wire w:1
wire z:1
gate g1 kind=XOR in=(a,b) out=(w) loc=top.x
gate cz kind=CONST value=0 width=1 out=(z) loc=top.c
gate g2 kind=AND in=(w,z) out=(y) loc=top.a
end
"""
    c = ir.parse_circuit(text)
    u = gif.enumerate_gifs(c, "site", "PO")
    verdict = gif.classify_universe(c, u)
    xor_items = [v for v, it in zip(verdict, u.items) if it.gate_id == "g1"]
    assert xor_items and all(v == "uncoverable" for v in xor_items)
    not_all = [v for v in verdict if v == "coverable"]
    assert not_all  # some AND-gate items remain coverable


def test_classify_not_gate_all_go_items_coverable():
    c = single("NOT", (4,), 4)
    u = gif.enumerate_gifs(c, "site", "GO")
    assert set(gif.classify_universe(c, u)) == {"coverable"}


def test_classify_not_gate_po_single_polarity_rule():
    # an inverter flips each output in exactly one direction per fault
    # class, so one alpha polarity per (class, j) is inherently uncoverable
    c = single("NOT", (4,), 4)
    u = gif.enumerate_gifs(c, "site", "PO")
    verdict = gif.classify_universe(c, u)
    by_core = {}
    for v, it in zip(verdict, u.items):
        by_core.setdefault((it.gate_id, it.i, it.j), []).append(v)
    for vs in by_core.values():
        assert sorted(vs) == ["coverable", "uncoverable"]


def test_classify_cap_exceeded():
    c = single("ADD", (12, 12), 12)
    u = gif.enumerate_gifs(c, "site", "GO")
    assert set(gif.classify_universe(c, u, bit_cap=20)) == {"unclassified"}


def test_uncovered_annotations():
    c = single("OR", (1, 1), 1)
    u = gif.enumerate_gifs(c, "site", "GO")
    empty = gif.CoverageSet(u.universe_hash, "none", 0)
    unc = gif.uncovered(u, empty)
    assert len(unc) == len(u.items)
    assert all(loc == "top.g" and kind == "OR" for _i, loc, kind in unc)
    p = exhaustive_program((1, 1))
    cov = gif.gif_fault_sim(c, [p], u)[p.name]
    assert gif.uncovered(u, cov) == []


def test_hash_mismatch_rejected():
    c = single("OR", (1, 1), 1)
    u = gif.enumerate_gifs(c, "site", "GO")
    bad = gif.CoverageSet("feedbeef", "x", 1)
    with pytest.raises(gif.UniverseError):
        gif.uncovered(u, bad)


def test_accumulate_unions_partitions():
    c = single("ADD", (2, 2), 2)
    u = gif.enumerate_gifs(c, "site", "PO")
    full = exhaustive_program((2, 2))
    p1 = funcsim.VectorProgram("p1", full.cycles[:6])
    p2 = funcsim.VectorProgram("p2", full.cycles[6:])
    covs = gif.gif_fault_sim(c, [p1, p2], u)
    acc = gif.accumulate([covs["p1"], covs["p2"]])
    both = gif.accumulate([covs["p2"], covs["p1"]])
    assert acc.covered == both.covered == covs["p1"].covered | covs["p2"].covered
    assert acc.cycles == len(full)
    with pytest.raises(gif.UniverseError):
        gif.accumulate([covs["p1"], gif.CoverageSet("beef" * 4, "z", 0)])
