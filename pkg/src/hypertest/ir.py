"""Netlist intermediate representation and the .ckt text format.

A circuit is a flat list of nets, ports, registers and RTL-level complex
gates.  Gates compute pure functions of their input nets; registers hold
state between macro-cycles.  A register statement declares a net: readers
of that net see the register's current value (Q), and the single gate that
names the net as its output feeds the register's next-state input (D).
Cycles through register nets are therefore legal; purely combinational
cycles are not.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

MAX_WIDTH = 64

GATE_KINDS = (
    "NOT", "AND", "OR", "XOR", "MUX2", "EQ", "NEQ", "LT",
    "ADD", "SUB", "MUL", "SHL", "SHR", "CASE", "CONST", "SLICE", "CONCAT",
)


class CircuitError(Exception):
    """Raised when a .ckt file cannot be parsed into a valid Circuit."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    code: str
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.code}: {self.message}"


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # 'input' | 'output'
    width: int


@dataclass(frozen=True)
class StorageElement:
    name: str
    width: int
    init: int
    load_en: str | None = None   # 1-bit net, overrides D when 1
    load_data: str | None = None  # same width as the register
    loc: str = ""


@dataclass(frozen=True)
class GateInstance:
    gate_id: str
    kind: str
    params: tuple  # sorted (key, value) pairs; values are int or tuple of int
    inputs: tuple
    outputs: tuple
    loc: str = ""

    def param(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


def make_params(**kwargs):
    """Normalize gate parameters into the canonical tuple form."""
    items = []
    for k in sorted(kwargs):
        v = kwargs[k]
        if isinstance(v, (list, tuple)):
            v = tuple(int(x) for x in v)
        else:
            v = int(v)
        items.append((k, v))
    return tuple(items)


@dataclass
class Circuit:
    name: str
    ports: list = field(default_factory=list)
    nets: dict = field(default_factory=dict)       # name -> width, declaration order
    registers: list = field(default_factory=list)
    gates: list = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.name, self.ports, self.nets, self.registers, self.gates) == (
            other.name, other.ports, other.nets, other.registers, other.gates)

    # -- lookups ---------------------------------------------------------

    def width(self, net):
        return self.nets[net]

    def input_ports(self):
        return [p for p in self.ports if p.direction == "input"]

    def output_ports(self):
        return [p for p in self.ports if p.direction == "output"]

    def register_names(self):
        return {r.name for r in self.registers}

    def gate_by_id(self, gate_id):
        for g in self.gates:
            if g.gate_id == gate_id:
                return g
        raise KeyError(gate_id)

    def driver_map(self):
        """Map net -> ('input', Port) | ('reg', StorageElement) | ('gate', GateInstance).

        For register nets this names the combinational value source (the
        register's Q); the gate feeding its D is reported by d_feed_map.
        """
        drv = {}
        for p in self.ports:
            if p.direction == "input":
                drv[p.name] = ("input", p)
        for r in self.registers:
            drv[r.name] = ("reg", r)
        regs = self.register_names()
        for g in self.gates:
            for out in g.outputs:
                if out not in regs:
                    drv[out] = ("gate", g)
        return drv

    def d_feed_map(self):
        """Map register net -> gate whose output feeds the register's D."""
        regs = self.register_names()
        feed = {}
        for g in self.gates:
            for out in g.outputs:
                if out in regs:
                    feed[out] = g
        return feed

    def hierarchy(self):
        """Map gate id and net name -> reporting path (dot separated)."""
        h = {}
        for g in self.gates:
            h[g.gate_id] = g.loc
            for out in g.outputs:
                h.setdefault(out, g.loc)
        for r in self.registers:
            h[r.name] = r.loc
        return h


# ---------------------------------------------------------------------------
# per-kind pin signatures
# ---------------------------------------------------------------------------

def gate_signature(kind, params, in_widths):
    """Return (expected input widths, output width) or an error string.

    in_widths is the tuple of widths of the actually connected input nets;
    several kinds derive their legal signature from it (e.g. bitwise ops
    take any equal pair of widths).
    """
    n = len(in_widths)
    if kind == "NOT":
        if n != 1:
            return "NOT takes 1 input"
        return list(in_widths), in_widths[0]
    if kind in ("AND", "OR", "XOR"):
        if n != 2:
            return f"{kind} takes 2 inputs"
        if in_widths[0] != in_widths[1]:
            return f"{kind} input widths differ"
        return list(in_widths), in_widths[0]
    if kind == "MUX2":
        if n != 3:
            return "MUX2 takes 3 inputs (sel, a, b)"
        if in_widths[0] != 1:
            return "MUX2 selector must be 1 bit"
        if in_widths[1] != in_widths[2]:
            return "MUX2 data widths differ"
        return list(in_widths), in_widths[1]
    if kind in ("EQ", "NEQ", "LT"):
        if n != 2:
            return f"{kind} takes 2 inputs"
        if in_widths[0] != in_widths[1]:
            return f"{kind} input widths differ"
        return list(in_widths), 1
    if kind in ("ADD", "SUB", "MUL"):
        if n != 2:
            return f"{kind} takes 2 inputs"
        if in_widths[0] != in_widths[1]:
            return f"{kind} input widths differ"
        return list(in_widths), in_widths[0]
    if kind in ("SHL", "SHR"):
        if n != 2:
            return f"{kind} takes 2 inputs (value, amount)"
        return list(in_widths), in_widths[0]
    if kind == "CASE":
        arms = dict(params).get("arms")
        if arms is None:
            return "CASE requires arms=<hex,...>"
        if n != len(arms) + 2:
            return f"CASE with {len(arms)} arms takes {len(arms) + 2} inputs (sel, arm data..., default)"
        sel_w = in_widths[0]
        data_w = in_widths[1]
        for w in in_widths[1:]:
            if w != data_w:
                return "CASE data widths differ"
        if len(set(arms)) != len(arms):
            return "CASE arm values must be distinct"
        for a in arms:
            if a >= (1 << sel_w):
                return f"CASE arm value {a:#x} exceeds selector range"
        return list(in_widths), data_w
    if kind == "CONST":
        p = dict(params)
        if "width" not in p or "value" not in p:
            return "CONST requires width= and value="
        if n != 0:
            return "CONST takes no inputs"
        if not 1 <= p["width"] <= MAX_WIDTH:
            return "CONST width out of range"
        if p["value"] >= (1 << p["width"]):
            return "CONST value exceeds width"
        return [], p["width"]
    if kind == "SLICE":
        p = dict(params)
        if "lo" not in p or "hi" not in p:
            return "SLICE requires lo= and hi="
        if n != 1:
            return "SLICE takes 1 input"
        lo, hi = p["lo"], p["hi"]
        if not (0 <= lo <= hi < in_widths[0]):
            return "SLICE range out of bounds"
        return list(in_widths), hi - lo + 1
    if kind == "CONCAT":
        if n < 1:
            return "CONCAT takes at least 1 input"
        return list(in_widths), sum(in_widths)
    return f"unknown kind {kind}"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_NET_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_LOC_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def _split_decl(tok):
    """'name:8' -> (name, 8); bare 'name' -> (name, 1)."""
    if ":" in tok:
        name, w = tok.split(":", 1)
        return name, w
    return tok, "1"


class _Parser:
    def __init__(self, text):
        self.text = text
        self.diags = []
        self.circuit = None

    def err(self, line, col, code, msg):
        self.diags.append(Diagnostic(line, col, code, msg))

    def parse(self):
        name = None
        ports, nets, registers, gates = [], {}, [], []
        seen_end = False
        net_lines = {}

        def declare(net, width_tok, line, col):
            if not _NET_RE.match(net):
                self.err(line, col, "bad-name", f"invalid net name '{net}'")
                return None
            try:
                width = int(width_tok, 10)
            except ValueError:
                self.err(line, col, "bad-width", f"invalid width '{width_tok}'")
                return None
            if not 1 <= width <= MAX_WIDTH:
                self.err(line, col, "bad-width", f"width {width} outside 1..{MAX_WIDTH}")
                return None
            if net in nets:
                self.err(line, col, "redeclared", f"net '{net}' already declared at line {net_lines[net]}")
                return None
            nets[net] = width
            net_lines[net] = line
            return width

        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            if seen_end:
                self.err(lineno, 1, "trailing", "statement after 'end'")
                continue
            toks = line.split()
            stmt = toks[0]
            col = raw.index(stmt) + 1

            if stmt == "circuit":
                if name is not None:
                    self.err(lineno, col, "duplicate", "second 'circuit' statement")
                elif len(toks) != 2:
                    self.err(lineno, col, "syntax", "usage: circuit <name>")
                else:
                    name = toks[1]
            elif stmt in ("input", "output", "wire"):
                if len(toks) != 2:
                    self.err(lineno, col, "syntax", f"usage: {stmt} <net>[:<w>]")
                    continue
                net, w = _split_decl(toks[1])
                width = declare(net, w, lineno, col)
                if width is not None and stmt != "wire":
                    ports.append(Port(net, stmt, width))
            elif stmt == "reg":
                if len(toks) < 2:
                    self.err(lineno, col, "syntax", "usage: reg <net>[:<w>] init=<hex> ...")
                    continue
                net, w = _split_decl(toks[1])
                width = declare(net, w, lineno, col)
                if width is None:
                    continue
                init = 0
                load_en = load_data = None
                loc = ""
                ok = True
                for tok in toks[2:]:
                    if "=" not in tok:
                        self.err(lineno, col, "syntax", f"bad token '{tok}' in reg statement")
                        ok = False
                        continue
                    k, v = tok.split("=", 1)
                    if k == "init":
                        try:
                            init = int(v, 16)
                        except ValueError:
                            self.err(lineno, col, "bad-value", f"bad init '{v}'")
                            ok = False
                    elif k == "load":
                        load_en = v
                    elif k == "loaddata":
                        load_data = v
                    elif k == "loc":
                        loc = v
                    else:
                        self.err(lineno, col, "syntax", f"unknown reg attribute '{k}'")
                        ok = False
                if init >= (1 << width):
                    self.err(lineno, col, "bad-value", f"init {init:#x} exceeds {width}-bit width")
                    ok = False
                if ok:
                    registers.append(StorageElement(net, width, init, load_en, load_data, loc))
            elif stmt == "gate":
                g = self._parse_gate(toks, raw, lineno, col)
                if g is not None:
                    gates.append(g)
            elif stmt == "end":
                seen_end = True
            else:
                self.err(lineno, col, "syntax", f"unknown statement '{stmt}'")

        if name is None:
            self.err(1, 1, "syntax", "missing 'circuit' statement")
        if not seen_end:
            self.err(len(self.text.splitlines()) or 1, 1, "syntax", "missing 'end'")
        if self.diags:
            return None
        return Circuit(name, ports, nets, registers, gates)

    def _parse_gate(self, toks, raw, lineno, col):
        if len(toks) < 3:
            self.err(lineno, col, "syntax", "usage: gate <id> kind=<KIND> ... in=(..) out=(..)")
            return None
        gate_id = toks[1]
        kind = None
        params = {}
        inputs = outputs = None
        loc = ""
        for tok in toks[2:]:
            if "=" not in tok:
                self.err(lineno, col, "syntax", f"bad token '{tok}' in gate statement")
                return None
            k, v = tok.split("=", 1)
            if k == "kind":
                kind = v
            elif k in ("in", "out"):
                if not (v.startswith("(") and v.endswith(")")):
                    self.err(lineno, col, "syntax", f"{k}= expects a parenthesized net list")
                    return None
                body = v[1:-1]
                names = tuple(x for x in body.split(",") if x) if body else ()
                if k == "in":
                    inputs = names
                else:
                    outputs = names
            elif k == "loc":
                if not _LOC_RE.match(v):
                    self.err(lineno, col, "bad-value", f"bad loc path '{v}'")
                    return None
                loc = v
            elif k == "arms":
                try:
                    params["arms"] = tuple(int(x, 16) for x in v.split(","))
                except ValueError:
                    self.err(lineno, col, "bad-value", f"bad arms list '{v}'")
                    return None
            elif k == "value":
                try:
                    params["value"] = int(v, 16)
                except ValueError:
                    self.err(lineno, col, "bad-value", f"bad value '{v}'")
                    return None
            elif k in ("width", "lo", "hi"):
                try:
                    params[k] = int(v, 10)
                except ValueError:
                    self.err(lineno, col, "bad-value", f"bad {k} '{v}'")
                    return None
            else:
                self.err(lineno, col, "syntax", f"unknown gate attribute '{k}'")
                return None
        if kind is None:
            self.err(lineno, col, "syntax", "gate missing kind=")
            return None
        if kind not in GATE_KINDS:
            kcol = raw.index("kind=") + 1 if "kind=" in raw else col
            self.err(lineno, kcol, "unknown-kind", f"unknown kind '{kind}'")
            return None
        if outputs is None or len(outputs) != 1:
            self.err(lineno, col, "syntax", "gate must drive exactly one output net")
            return None
        if inputs is None:
            inputs = ()
        return GateInstance(gate_id, kind, make_params(**params), inputs, outputs, loc)


def try_parse(text):
    """Parse .ckt source. Returns (Circuit or None, diagnostics).

    Diagnostics combine syntax errors and semantic validation results; the
    circuit is returned only when both are clean.
    """
    p = _Parser(text)
    c = p.parse()
    if c is None:
        return None, p.diags
    diags = validate(c)
    if diags:
        return None, diags
    return c, []


def parse_circuit(text):
    """Parse and validate, raising CircuitError on any diagnostic."""
    c, diags = try_parse(text)
    if c is None:
        raise CircuitError(diags)
    return c


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(c: Circuit) -> list:
    """Check Circuit invariants; returns [] iff the circuit is well formed."""
    diags = []

    def err(code, msg):
        diags.append(Diagnostic(0, 0, code, msg))

    regs = c.register_names()
    gate_ids = set()
    input_nets = {p.name for p in c.ports if p.direction == "input"}

    for r in c.registers:
        for attr, want_w in (("load_en", 1), ("load_data", r.width)):
            netname = getattr(r, attr)
            if netname is None:
                continue
            if netname not in c.nets:
                err("unknown-net", f"reg '{r.name}' {attr} references unknown net '{netname}'")
            elif c.nets[netname] != want_w:
                err("width-mismatch",
                    f"reg '{r.name}' {attr} net '{netname}' is {c.nets[netname]} bits, expected {want_w}")
        if (r.load_en is None) != (r.load_data is None):
            err("bad-load", f"reg '{r.name}' must declare load= and loaddata= together")

    # driver accounting: every non-source net needs exactly one driving gate
    drive_counts = {n: 0 for n in c.nets}
    d_feed_counts = {r.name: 0 for r in c.registers}
    for g in c.gates:
        if g.gate_id in gate_ids:
            err("duplicate-gate", f"gate id '{g.gate_id}' reused")
        gate_ids.add(g.gate_id)
        for net in list(g.inputs) + list(g.outputs):
            if net not in c.nets:
                err("unknown-net", f"gate '{g.gate_id}' references unknown net '{net}'")
        for net in g.outputs:
            if net not in c.nets:
                continue
            if net in regs:
                d_feed_counts[net] += 1
            elif net in input_nets:
                err("multiple-drivers", f"gate '{g.gate_id}' drives input port net '{net}'")
            else:
                drive_counts[net] += 1
        if any(net not in c.nets for net in list(g.inputs) + list(g.outputs)):
            continue
        in_widths = tuple(c.nets[n] for n in g.inputs)
        sig = gate_signature(g.kind, g.params, in_widths)
        if isinstance(sig, str):
            err("width-mismatch", f"gate '{g.gate_id}': {sig}")
            continue
        _, out_w = sig
        if c.nets[g.outputs[0]] != out_w:
            err("width-mismatch",
                f"gate '{g.gate_id}' output '{g.outputs[0]}' is {c.nets[g.outputs[0]]} bits, expected {out_w}")

    for net, cnt in drive_counts.items():
        if cnt > 1:
            err("multiple-drivers", f"net '{net}' driven by {cnt} gates")
        elif cnt == 0 and net not in input_nets and net not in regs:
            err("no-driver", f"net '{net}' has no driver")
    for net, cnt in d_feed_counts.items():
        if cnt > 1:
            err("multiple-drivers", f"register '{net}' fed by {cnt} gates")

    if not diags:
        diags.extend(_check_cycles(c))
    return diags


def _comb_edges(c: Circuit):
    """Gate-to-gate edges through non-register nets."""
    regs = c.register_names()
    producers = {}
    for g in c.gates:
        for out in g.outputs:
            if out not in regs:
                producers[out] = g
    edges = {g.gate_id: [] for g in c.gates}
    for g in c.gates:
        for net in g.inputs:
            src = producers.get(net)
            if src is not None:
                edges[src.gate_id].append(g.gate_id)
    return edges


def _check_cycles(c: Circuit):
    edges = _comb_edges(c)
    state = {}  # 0 visiting, 1 done
    order_stack = []
    diags = []

    for start in edges:
        if start in state:
            continue
        stack = [(start, iter(edges[start]))]
        state[start] = 0
        order_stack.append(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in state:
                    state[nxt] = 0
                    order_stack.append(nxt)
                    stack.append((nxt, iter(edges[nxt])))
                    advanced = True
                    break
                if state[nxt] == 0:
                    cyc = order_stack[order_stack.index(nxt):] + [nxt]
                    diags.append(Diagnostic(0, 0, "combinational-cycle",
                                            "combinational cycle through gates: " + " -> ".join(cyc)))
                    return diags
            if not advanced:
                state[node] = 1
                stack.pop()
                order_stack.pop()
    return diags


# ---------------------------------------------------------------------------
# levelization
# ---------------------------------------------------------------------------

def levelize(c: Circuit):
    """Assign a topological level to every gate.

    Gates whose inputs come only from level-0 sources (input ports,
    register outputs, CONST) get level 1; otherwise 1 + max over
    combinational predecessors.  Returns (ordered gate list, {gate_id: level}).
    Ordering is deterministic: by level, then declaration order.
    """
    regs = c.register_names()
    producers = {}
    for g in c.gates:
        for out in g.outputs:
            if out not in regs:
                producers[out] = g

    levels = {}
    decl_index = {g.gate_id: i for i, g in enumerate(c.gates)}

    def level_of(g, trail):
        if g.gate_id in levels:
            return levels[g.gate_id]
        if g.gate_id in trail:
            raise CircuitError([Diagnostic(0, 0, "combinational-cycle",
                                           f"cycle via gate '{g.gate_id}'")])
        trail.add(g.gate_id)
        best = 0
        for net in g.inputs:
            src = producers.get(net)
            if src is not None:
                best = max(best, level_of(src, trail))
        trail.discard(g.gate_id)
        levels[g.gate_id] = best + 1
        return best + 1

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * len(c.gates) + 100))
    try:
        for g in c.gates:
            level_of(g, set())
    finally:
        sys.setrecursionlimit(old)

    ordered = sorted(c.gates, key=lambda g: (levels[g.gate_id], decl_index[g.gate_id]))
    return ordered, levels


# ---------------------------------------------------------------------------
# printing (canonical form; reparses to an identical Circuit)
# ---------------------------------------------------------------------------

def print_circuit(c: Circuit) -> str:
    lines = [f"circuit {c.name}"]
    port_nets = {p.name for p in c.ports}
    reg_nets = c.register_names()
    for p in c.ports:
        lines.append(f"{p.direction} {p.name}:{p.width}")
    for r in c.registers:
        s = f"reg {r.name}:{r.width} init={r.init:x}"
        if r.load_en is not None:
            s += f" load={r.load_en} loaddata={r.load_data}"
        if r.loc:
            s += f" loc={r.loc}"
        lines.append(s)
    for net, w in c.nets.items():
        if net not in port_nets and net not in reg_nets:
            lines.append(f"wire {net}:{w}")
    for g in c.gates:
        s = f"gate {g.gate_id} kind={g.kind}"
        for k, v in g.params:
            if k == "arms":
                s += " arms=" + ",".join(f"{x:x}" for x in v)
            elif k == "value":
                s += f" value={v:x}"
            else:
                s += f" {k}={v}"
        s += " in=(" + ",".join(g.inputs) + ")"
        s += " out=(" + ",".join(g.outputs) + ")"
        if g.loc:
            s += f" loc={g.loc}"
        lines.append(s)
    lines.append("end")
    return "\n".join(lines) + "\n"
