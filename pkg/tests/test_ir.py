import pytest

from hypertest import ir


def parse(text):
    return ir.parse_circuit(text)


def test_smallest_circuit():
    c = parse("circuit t\ninput a\noutput y\ngate g1 kind=NOT in=(a) out=(y)\nend\n")
    assert len(c.gates) == 1
    assert len(c.registers) == 0
    assert c.nets == {"a": 1, "y": 1}


def test_unknown_kind_reports_line():
    _, diags = ir.try_parse("circuit t\ninput a\noutput y\ngate g1 kind=NAND in=(a) out=(y)\nend\n")
    assert any(d.code == "unknown-kind" and d.line == 4 for d in diags)


def test_width_mismatch():
    _, diags = ir.try_parse(
        "circuit t\ninput a:4\ninput b:2\noutput y:4\ngate g1 kind=AND in=(a,b) out=(y)\nend\n")
    assert any(d.code == "width-mismatch" for d in diags)


def test_multiple_drivers():
    _, diags = ir.try_parse(
        "circuit t\ninput a\noutput y\n"
        "gate g1 kind=NOT in=(a) out=(y)\ngate g2 kind=NOT in=(a) out=(y)\nend\n")
    assert any(d.code == "multiple-drivers" for d in diags)


def test_self_loop_is_cyclic():
    _, diags = ir.try_parse(
        "circuit t\nwire w\noutput y\ngate g1 kind=NOT in=(w) out=(w)\n"
        "gate g2 kind=NOT in=(w) out=(y)\nend\n")
    assert any(d.code == "combinational-cycle" for d in diags)


def test_cycle_through_register_is_fine():
    c = parse(
        "circuit t\noutput q:4\nreg r:4 init=0\nwire one:4\n"
        "gate c1 kind=CONST value=1 width=4 out=(one)\n"
        "gate inc kind=ADD in=(r,one) out=(r)\n"
        "gate ob kind=SLICE lo=0 hi=3 in=(r) out=(q)\nend\n")
    assert ir.validate(c) == []


def test_no_driver_detected():
    _, diags = ir.try_parse("circuit t\nwire w\noutput y\ngate g kind=NOT in=(w) out=(y)\nend\n")
    assert any(d.code == "no-driver" for d in diags)


def test_reg_init_exceeds_width():
    _, diags = ir.try_parse("circuit t\noutput q\nreg r:2 init=5\n"
                            "gate ob kind=SLICE lo=0 hi=1 in=(r) out=(q)\nend\n")
    assert diags


def test_levelize_chain():
    c = parse(
        "circuit t\ninput a\noutput y\nwire w1\nwire w2\n"
        "gate g1 kind=NOT in=(a) out=(w1)\n"
        "gate g2 kind=NOT in=(w1) out=(w2)\n"
        "gate g3 kind=NOT in=(w2) out=(y)\nend\n")
    _, levels = ir.levelize(c)
    assert levels == {"g1": 1, "g2": 2, "g3": 3}


def test_levelize_parallel():
    c = parse(
        "circuit t\ninput a\noutput y1\noutput y2\n"
        "gate g1 kind=NOT in=(a) out=(y1)\n"
        "gate g2 kind=NOT in=(a) out=(y2)\nend\n")
    _, levels = ir.levelize(c)
    assert levels == {"g1": 1, "g2": 1}


def test_levelize_deterministic():
    text = ("circuit t\ninput a\noutput y\nwire w1\nwire w2\n"
            "gate g2 kind=NOT in=(w1) out=(w2)\n"
            "gate g1 kind=NOT in=(a) out=(w1)\n"
            "gate g3 kind=AND in=(w2,a) out=(y)\nend\n")
    runs = [ir.levelize(parse(text)) for _ in range(3)]
    orders = [[g.gate_id for g in order] for order, _ in runs]
    assert orders[0] == orders[1] == orders[2] == ["g1", "g2", "g3"]


def test_roundtrip_print_parse():
    text = ("circuit t\ninput ld\ninput lv:4\noutput q:4\n"
            "reg count:4 init=a load=ld loaddata=lv loc=top.ctr\n"
            "wire one:4\n"
            "gate c1 kind=CONST value=1 width=4 out=(one)\n"
            "gate inc kind=ADD in=(count,one) out=(count) loc=top.add\n"
            "gate ob kind=SLICE lo=0 hi=3 in=(count) out=(q)\nend\n")
    c = parse(text)
    assert ir.parse_circuit(ir.print_circuit(c)) == c


def test_case_gate_validation():
    c = parse(
        "circuit t\ninput s:2\ninput d0:4\ninput d1:4\ninput dd:4\noutput y:4\n"
        "gate g kind=CASE arms=0,3 in=(s,d0,d1,dd) out=(y)\nend\n")
    assert c.gates[0].param("arms") == (0, 3)
    _, diags = ir.try_parse(
        "circuit t\ninput s:2\ninput d0:4\ninput d1:4\ninput dd:4\noutput y:4\n"
        "gate g kind=CASE arms=0,7 in=(s,d0,d1,dd) out=(y)\nend\n")
    assert any("exceeds selector" in d.message for d in diags)


def test_parse_circuit_raises():
    with pytest.raises(ir.CircuitError):
        parse("circuit t\ninput a\noutput y\ngate g kind=BOGUS in=(a) out=(y)\nend\n")
