"""Simple-gate decomposition templates for every RTL gate kind.

Two template families are shipped: "A" (textbook structural forms, e.g. a
ripple-carry adder) and "B" (alternative forms, e.g. carry-select with mux
trees).  Both are functionally equivalent to the reference semantics; for
ADD, MUL, EQ and CASE (and several others) they are structurally distinct,
which is what the stuck-at oracle's synthesis-independence check needs.

A template receives a NetworkBuilder plus the input bit nets and returns
the output bit nets.  SLICE/CONCAT/CONST produce pure wiring/tie nets.
"""

from __future__ import annotations

DECOMP_IDS = ("A", "B")


def _or_tree(b, bits):
    """Balanced OR reduction (template A flavor)."""
    layer = list(bits)
    while len(layer) > 1:
        nxt = []
        for i in range(0, len(layer) - 1, 2):
            nxt.append(b.gate("OR2", layer[i], layer[i + 1]))
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def _or_chain(b, bits):
    acc = bits[0]
    for x in bits[1:]:
        acc = b.gate("OR2", acc, x)
    return acc


def _and_chain(b, bits):
    acc = bits[0]
    for x in bits[1:]:
        acc = b.gate("AND2", acc, x)
    return acc


def _full_adder_a(b, x, y, cin):
    """Sum/carry with the and-or carry form; 2 XOR2 + 2 AND2 + 1 OR2."""
    p = b.gate("XOR2", x, y)
    s = b.gate("XOR2", p, cin)
    g = b.gate("AND2", x, y)
    t = b.gate("AND2", p, cin)
    cout = b.gate("OR2", g, t)
    return s, cout


def _full_adder_b(b, x, y, cin):
    """Sum with majority carry; structurally distinct from the A form."""
    p = b.gate("XOR2", x, y)
    s = b.gate("XOR2", p, cin)
    t1 = b.gate("AND2", x, y)
    t2 = b.gate("AND2", x, cin)
    t3 = b.gate("AND2", y, cin)
    cout = b.gate("OR2", b.gate("OR2", t1, t2), t3)
    return s, cout


def _ripple_add(b, xs, ys, cin, fa):
    outs = []
    c = cin
    for x, y in zip(xs, ys):
        s, c = fa(b, x, y, c)
        outs.append(s)
    return outs, c


def _xnor_sop(b, x, y):
    """x==y as OR(AND(x,y), AND(!x,!y)) -- the B-family equality bit."""
    both = b.gate("AND2", x, y)
    neither = b.gate("AND2", b.gate("NOT", x), b.gate("NOT", y))
    return b.gate("OR2", both, neither)


def _match_const_a(b, sel_bits, value):
    """sel == constant via XOR-fold + OR tree + NOT (A family)."""
    diffs = []
    for i, s in enumerate(sel_bits):
        if (value >> i) & 1:
            diffs.append(b.gate("NOT", s))
        else:
            diffs.append(s)
    return b.gate("NOT", _or_tree(b, diffs))


def _match_const_b(b, sel_bits, value):
    """sel == constant via per-bit equality AND chain (B family)."""
    eqs = []
    for i, s in enumerate(sel_bits):
        if (value >> i) & 1:
            eqs.append(s)
        else:
            eqs.append(b.gate("NOT", s))
    return _and_chain(b, eqs)


def _mux_bit_b(b, sel, a, c):
    """sel ? c : a in and-or form."""
    ns = b.gate("NOT", sel)
    return b.gate("OR2", b.gate("AND2", ns, a), b.gate("AND2", sel, c))


def build_network(builder, kind, params, ins, out_width, decomp):
    """Emit the simple-gate network; returns the list of output bit nets."""
    p = dict(params)
    b = builder

    if kind == "NOT":
        return [b.gate("NOT", x) for x in ins[0]]

    if kind == "AND":
        return [b.gate("AND2", x, y) for x, y in zip(ins[0], ins[1])]

    if kind == "OR":
        if decomp == "A":
            return [b.gate("OR2", x, y) for x, y in zip(ins[0], ins[1])]
        out = []
        for x, y in zip(ins[0], ins[1]):
            out.append(b.gate("NOT", b.gate("AND2", b.gate("NOT", x), b.gate("NOT", y))))
        return out

    if kind == "XOR":
        if decomp == "A":
            return [b.gate("XOR2", x, y) for x, y in zip(ins[0], ins[1])]
        out = []
        for x, y in zip(ins[0], ins[1]):
            either = b.gate("OR2", x, y)
            nboth = b.gate("NOT", b.gate("AND2", x, y))
            out.append(b.gate("AND2", either, nboth))
        return out

    if kind == "MUX2":
        sel = ins[0][0]
        if decomp == "A":
            return [b.gate("MUX2", sel, x, y) for x, y in zip(ins[1], ins[2])]
        return [_mux_bit_b(b, sel, x, y) for x, y in zip(ins[1], ins[2])]

    if kind == "EQ":
        if decomp == "A":
            diffs = [b.gate("XOR2", x, y) for x, y in zip(ins[0], ins[1])]
            return [b.gate("NOT", _or_tree(b, diffs))]
        eqs = [_xnor_sop(b, x, y) for x, y in zip(ins[0], ins[1])]
        return [_and_chain(b, eqs)]

    if kind == "NEQ":
        if decomp == "A":
            diffs = [b.gate("XOR2", x, y) for x, y in zip(ins[0], ins[1])]
            return [_or_tree(b, diffs)]
        eqs = [_xnor_sop(b, x, y) for x, y in zip(ins[0], ins[1])]
        return [b.gate("NOT", _and_chain(b, eqs))]

    if kind == "LT":
        if decomp == "A":
            # mux chain, LSB to MSB: keep previous verdict while bits agree
            r = b.tie(0)
            for x, y in zip(ins[0], ins[1]):
                d = b.gate("XOR2", x, y)
                r = b.gate("MUX2", d, r, y)
            return [r]
        bor = b.tie(0)
        for x, y in zip(ins[0], ins[1]):
            t1 = b.gate("AND2", b.gate("NOT", x), y)
            nd = b.gate("NOT", b.gate("XOR2", x, y))
            bor = b.gate("OR2", t1, b.gate("AND2", nd, bor))
        return [bor]

    if kind == "ADD":
        if decomp == "A":
            outs, _ = _ripple_add(b, ins[0], ins[1], b.tie(0), _full_adder_a)
            return outs
        w = out_width
        if w == 1:
            either = b.gate("OR2", ins[0][0], ins[1][0])
            nboth = b.gate("NOT", b.gate("AND2", ins[0][0], ins[1][0]))
            return [b.gate("AND2", either, nboth)]
        half = w // 2
        lo, carry = _ripple_add(b, ins[0][:half], ins[1][:half], b.tie(0), _full_adder_b)
        hi0, _ = _ripple_add(b, ins[0][half:], ins[1][half:], b.tie(0), _full_adder_b)
        hi1, _ = _ripple_add(b, ins[0][half:], ins[1][half:], b.tie(1), _full_adder_b)
        hi = [b.gate("MUX2", carry, u, v) for u, v in zip(hi0, hi1)]
        return lo + hi

    if kind == "SUB":
        if decomp == "A":
            nys = [b.gate("NOT", y) for y in ins[1]]
            outs, _ = _ripple_add(b, ins[0], nys, b.tie(1), _full_adder_a)
            return outs
        outs = []
        bor = b.tie(0)
        for x, y in zip(ins[0], ins[1]):
            d = b.gate("XOR2", x, y)
            outs.append(b.gate("XOR2", d, bor))
            t1 = b.gate("AND2", b.gate("NOT", x), y)
            t2 = b.gate("AND2", b.gate("NOT", d), bor)
            bor = b.gate("OR2", t1, t2)
        return outs

    if kind == "MUL":
        w = out_width
        if decomp == "A":
            acc = [b.gate("AND2", x, ins[1][0]) for x in ins[0]]
            for j in range(1, w):
                row = [b.gate("AND2", ins[0][i], ins[1][j]) for i in range(w - j)]
                c = b.tie(0)
                for i, bit in enumerate(row):
                    acc[j + i], c = _full_adder_a(b, acc[j + i], bit, c)
            return acc
        acc = [_mux_bit_b(b, ins[1][0], b.tie(0), x) for x in ins[0]]
        for j in range(1, w):
            row = [b.gate("MUX2", ins[1][j], b.tie(0), ins[0][i]) for i in range(w - j)]
            c = b.tie(0)
            for i, bit in enumerate(row):
                acc[j + i], c = _full_adder_b(b, acc[j + i], bit, c)
        return acc

    if kind in ("SHL", "SHR"):
        w = out_width
        cur = list(ins[0])
        for t, sbit in enumerate(ins[1]):
            amt = 1 << t
            nxt = []
            for o in range(w):
                if kind == "SHL":
                    src = cur[o - amt] if o - amt >= 0 and amt < w else b.tie(0)
                else:
                    src = cur[o + amt] if o + amt < w and amt < w else b.tie(0)
                if decomp == "A":
                    nxt.append(b.gate("MUX2", sbit, cur[o], src))
                else:
                    nxt.append(_mux_bit_b(b, sbit, cur[o], src))
            cur = nxt
        return cur

    if kind == "CASE":
        arms = p["arms"]
        sel = ins[0]
        data = ins[1:1 + len(arms)]
        default = ins[1 + len(arms)]
        if decomp == "A":
            matches = [_match_const_a(b, sel, a) for a in arms]
            outs = list(default)
            for k in range(len(arms) - 1, -1, -1):
                outs = [b.gate("MUX2", matches[k], r, d) for r, d in zip(outs, data[k])]
            return outs
        matches = [_match_const_b(b, sel, a) for a in arms]
        none = b.gate("NOT", _or_chain(b, matches))
        outs = []
        for bit in range(out_width):
            terms = [b.gate("AND2", matches[k], data[k][bit]) for k in range(len(arms))]
            terms.append(b.gate("AND2", none, default[bit]))
            outs.append(_or_chain(b, terms))
        return outs

    if kind == "CONST":
        value = p["value"]
        return [b.tie((value >> i) & 1) for i in range(out_width)]

    if kind == "SLICE":
        return list(ins[0][p["lo"]:p["hi"] + 1])

    if kind == "CONCAT":
        out = []
        for bits in ins:
            out.extend(bits)
        return out

    raise ValueError(f"unknown kind {kind}")
