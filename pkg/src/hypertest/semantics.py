"""Reference semantics of the RTL-level gate kinds.

Values are Python ints masked to the net width.  CONCAT places its first
input in the least significant bits.  Shift amounts at or beyond the value
width produce 0.  ADD/SUB/MUL wrap modulo 2^width.
"""

from __future__ import annotations


def mask(width):
    return (1 << width) - 1


def eval_gate(kind, params, values, in_widths, out_width):
    """Evaluate one gate; `values` are the input net values in pin order."""
    m = mask(out_width)
    if kind == "NOT":
        return ~values[0] & m
    if kind == "AND":
        return values[0] & values[1]
    if kind == "OR":
        return values[0] | values[1]
    if kind == "XOR":
        return values[0] ^ values[1]
    if kind == "MUX2":
        return values[2] if values[0] else values[1]
    if kind == "EQ":
        return 1 if values[0] == values[1] else 0
    if kind == "NEQ":
        return 1 if values[0] != values[1] else 0
    if kind == "LT":
        return 1 if values[0] < values[1] else 0
    if kind == "ADD":
        return (values[0] + values[1]) & m
    if kind == "SUB":
        return (values[0] - values[1]) & m
    if kind == "MUL":
        return (values[0] * values[1]) & m
    if kind == "SHL":
        sh = values[1]
        return (values[0] << sh) & m if sh < out_width else 0
    if kind == "SHR":
        sh = values[1]
        return (values[0] >> sh) if sh < out_width else 0
    if kind == "CASE":
        arms = dict(params)["arms"]
        sel = values[0]
        for i, a in enumerate(arms):
            if sel == a:
                return values[1 + i]
        return values[-1]
    if kind == "CONST":
        return dict(params)["value"]
    if kind == "SLICE":
        p = dict(params)
        return (values[0] >> p["lo"]) & m
    if kind == "CONCAT":
        acc = 0
        shift = 0
        for v, w in zip(values, in_widths):
            acc |= v << shift
            shift += w
        return acc
    raise ValueError(f"unknown kind {kind}")


def output_bit_deps(kind, params, in_widths, out_width):
    """Per output bit, the set of (input pin, bit) pairs it can depend on.

    Conservative (never misses a real dependency); used for structural
    reachability.  Returns list indexed by output bit.
    """
    deps = [set() for _ in range(out_width)]

    def all_bits(pin):
        return {(pin, b) for b in range(in_widths[pin])}

    if kind == "NOT":
        for o in range(out_width):
            deps[o].add((0, o))
    elif kind in ("AND", "OR", "XOR"):
        for o in range(out_width):
            deps[o].add((0, o))
            deps[o].add((1, o))
    elif kind == "MUX2":
        for o in range(out_width):
            deps[o].add((0, 0))
            deps[o].add((1, o))
            deps[o].add((2, o))
    elif kind in ("EQ", "NEQ", "LT"):
        deps[0] = all_bits(0) | all_bits(1)
    elif kind in ("ADD", "SUB", "MUL"):
        for o in range(out_width):
            for b in range(o + 1):
                deps[o].add((0, b))
                deps[o].add((1, b))
    elif kind == "SHL":
        for o in range(out_width):
            for b in range(o + 1):
                deps[o].add((0, b))
            deps[o] |= all_bits(1)
    elif kind == "SHR":
        for o in range(out_width):
            for b in range(o, in_widths[0]):
                deps[o].add((0, b))
            deps[o] |= all_bits(1)
    elif kind == "CASE":
        for o in range(out_width):
            deps[o] |= all_bits(0)
            for pin in range(1, len(in_widths)):
                deps[o].add((pin, o))
    elif kind == "CONST":
        pass
    elif kind == "SLICE":
        lo = dict(params)["lo"]
        for o in range(out_width):
            deps[o].add((0, lo + o))
    elif kind == "CONCAT":
        pos = 0
        for pin, w in enumerate(in_widths):
            for b in range(w):
                deps[pos].add((pin, b))
                pos += 1
    else:
        raise ValueError(f"unknown kind {kind}")
    return deps
