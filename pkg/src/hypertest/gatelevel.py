"""Bit-level simple-gate netlists produced by expanding a Circuit.

Every net is one bit.  Gate ops are NOT, AND2, OR2, XOR2, MUX2 (the mux
returns its third operand when the first is 1).  SLICE/CONCAT and port
connections are pure aliasing, CONST values become tie nets.  Each simple
gate is tagged with the RTL gate it came from, so per-gate fault sites can
be recovered later.

Evaluation is pattern-packed: a net's value is a Python int carrying one
bit per pattern, so the same code evaluates a single vector or a whole
input space / test program in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ir
from .decomp import build_network
from .semantics import mask


@dataclass(frozen=True)
class SimpleGate:
    op: str          # NOT | AND2 | OR2 | XOR2 | MUX2
    ins: tuple       # net ids
    out: int         # net id
    owner: str       # source RTL gate id


@dataclass(frozen=True)
class RegBit:
    reg: str
    bit: int
    init: int
    q_net: int
    d_net: int | None
    load_net: int | None
    ldata_net: int | None


@dataclass
class GateCircuit:
    name: str
    decomp: str
    net_names: list = field(default_factory=list)
    gates: list = field(default_factory=list)
    input_bits: list = field(default_factory=list)    # (port, bit, net)
    output_bits: list = field(default_factory=list)   # (port, bit, net)
    reg_bits: list = field(default_factory=list)
    ties: dict = field(default_factory=dict)          # net -> 0|1
    gate_span: dict = field(default_factory=dict)     # rtl gate id -> (lo, hi)
    gate_out_nets: dict = field(default_factory=dict)  # rtl gate id -> [net]
    gate_in_nets: dict = field(default_factory=dict)   # rtl gate id -> [[net] per pin]

    @property
    def net_count(self):
        return len(self.net_names)

    def simple_gate_count(self):
        return len(self.gates)

    def consumers(self):
        """net -> list of (gate index, pin index)."""
        cons = {n: [] for n in range(len(self.net_names))}
        for gi, g in enumerate(self.gates):
            for pi, n in enumerate(g.ins):
                cons[n].append((gi, pi))
        return cons

    def observation_points(self):
        """Ordered observation points: output port bits, then per register
        the D / load-enable / load-data consumption bits.

        Returns list of (label, net or None, kind); net is None only for
        registers without a combinational D feed.
        """
        obs = []
        for port, bit, net in self.output_bits:
            obs.append((f"{port}[{bit}]", net, "po"))
        by_reg = {}
        for rb in self.reg_bits:
            by_reg.setdefault(rb.reg, []).append(rb)
        for reg, bits in by_reg.items():
            for rb in bits:
                if rb.d_net is not None:
                    obs.append((f"{reg}.d[{rb.bit}]", rb.d_net, "regd"))
            if bits[0].load_net is not None:
                obs.append((f"{reg}.load", bits[0].load_net, "regload"))
                for rb in bits:
                    obs.append((f"{reg}.ldata[{rb.bit}]", rb.ldata_net, "regldata"))
        return obs


class NetworkBuilder:
    """Creates nets/gates for one RTL gate's subnetwork."""

    def __init__(self, gc: GateCircuit, owner: str):
        self.gc = gc
        self.owner = owner
        self._n = 0
        self._tie = {}

    def _new_net(self, suffix=None):
        nid = len(self.gc.net_names)
        if suffix is None:
            suffix = f"n{self._n}"
            self._n += 1
        self.gc.net_names.append(f"{self.owner}.{suffix}")
        return nid

    def gate(self, op, *ins):
        out = self._new_net()
        self.gc.gates.append(SimpleGate(op, tuple(ins), out, self.owner))
        return out

    def tie(self, v):
        if v not in self._tie:
            nid = self._new_net(f"tie{v}")
            self.gc.ties[nid] = v
            self._tie[v] = nid
        return self._tie[v]


def expand(c: ir.Circuit, decomp: str = "A") -> GateCircuit:
    """Expand to a simple-gate netlist under decomposition A or B."""
    if decomp not in ("A", "B"):
        raise ValueError(f"decomposition must be A or B, got {decomp!r}")
    diags = ir.validate(c)
    if diags:
        raise ir.CircuitError(diags)

    gc = GateCircuit(name=c.name, decomp=decomp)
    env = {}  # RTL net name -> list of bit net ids (as read by consumers)

    def fresh(name, width, fmt):
        bits = []
        for i in range(width):
            nid = len(gc.net_names)
            gc.net_names.append(fmt.format(name=name, bit=i))
            bits.append(nid)
        return bits

    for p in c.input_ports():
        bits = fresh(p.name, p.width, "{name}[{bit}]")
        env[p.name] = bits
        for i, nid in enumerate(bits):
            gc.input_bits.append((p.name, i, nid))

    reg_q = {}
    for r in c.registers:
        bits = fresh(r.name, r.width, "{name}.q[{bit}]")
        env[r.name] = bits
        reg_q[r.name] = bits

    order, _ = ir.levelize(c)
    regs = c.register_names()
    d_bits = {}
    for g in order:
        in_bits = [env[n] for n in g.inputs]
        in_widths = tuple(c.nets[n] for n in g.inputs)
        out_net = g.outputs[0]
        out_w = c.nets[out_net]
        builder = NetworkBuilder(gc, g.gate_id)
        lo = len(gc.gates)
        out_bits = build_network(builder, g.kind, g.params, in_bits, out_w, decomp)
        hi = len(gc.gates)
        assert len(out_bits) == out_w
        gc.gate_span[g.gate_id] = (lo, hi)
        gc.gate_out_nets[g.gate_id] = list(out_bits)
        gc.gate_in_nets[g.gate_id] = [list(b) for b in in_bits]
        if out_net in regs:
            d_bits[out_net] = out_bits
        else:
            env[out_net] = out_bits

    for r in c.registers:
        dn = d_bits.get(r.name)
        ld = env[r.load_en] if r.load_en is not None else None
        lv = env[r.load_data] if r.load_data is not None else None
        for i in range(r.width):
            gc.reg_bits.append(RegBit(
                reg=r.name, bit=i, init=(r.init >> i) & 1,
                q_net=reg_q[r.name][i],
                d_net=dn[i] if dn is not None else None,
                load_net=ld[0] if ld is not None else None,
                ldata_net=lv[i] if lv is not None else None,
            ))

    for p in c.output_ports():
        for i, nid in enumerate(env[p.name]):
            gc.output_bits.append((p.name, i, nid))
    return gc


# ---------------------------------------------------------------------------
# pattern-packed evaluation
# ---------------------------------------------------------------------------

def source_env(gc: GateCircuit, ones: int):
    """Environment with tie nets populated for a given pattern mask."""
    env = [0] * gc.net_count
    for nid, v in gc.ties.items():
        env[nid] = ones if v else 0
    return env


def eval_gates(gc: GateCircuit, env, ones, lo=0, hi=None, pin_force=None):
    """Evaluate gates[lo:hi] in order into env (mutates env).

    pin_force maps (gate index, pin index) -> forced value, used for
    branch-fault injection on a single reading pin.
    """
    gates = gc.gates
    if hi is None:
        hi = len(gates)
    for gi in range(lo, hi):
        g = gates[gi]
        if pin_force:
            vals = [pin_force.get((gi, pi), env[n]) for pi, n in enumerate(g.ins)]
        else:
            vals = [env[n] for n in g.ins]
        op = g.op
        if op == "NOT":
            v = ones ^ vals[0]
        elif op == "AND2":
            v = vals[0] & vals[1]
        elif op == "OR2":
            v = vals[0] | vals[1]
        elif op == "XOR2":
            v = vals[0] ^ vals[1]
        else:  # MUX2
            v = (vals[0] & vals[2]) | ((ones ^ vals[0]) & vals[1])
        env[g.out] = v
    return env


def eval_full(gc: GateCircuit, inputs, reg_values, ones):
    """Full evaluation from source values.

    inputs / reg_values: packed value per input port bit / register bit in
    the order of gc.input_bits / gc.reg_bits.
    """
    env = source_env(gc, ones)
    for (port, bit, nid), v in zip(gc.input_bits, inputs):
        env[nid] = v
    for rb, v in zip(gc.reg_bits, reg_values):
        env[rb.q_net] = v
    return eval_gates(gc, env, ones)


def eval_delta(gc: GateCircuit, good_env, ones, forced_nets=(), pin_force=None,
               consumers=None):
    """Sparse faulty re-evaluation.

    forced_nets: list of (net, value) overrides applied on top of the good
    environment (stem faults or injected differences); pin_force as in
    eval_gates (branch faults).  Only the affected cone is recomputed.
    Returns a dict net -> faulty value for nets that differ.
    """
    if consumers is None:
        consumers = gc.consumers()
    delta = {}
    dirty_gates = set()
    for nid, v in forced_nets:
        if v != good_env[nid]:
            delta[nid] = v
            for gi, _pi in consumers[nid]:
                dirty_gates.add(gi)
    if pin_force:
        for (gi, _pi) in pin_force:
            dirty_gates.add(gi)
    if not dirty_gates:
        return delta
    frontier = sorted(dirty_gates)
    pos = 0
    pending = set(frontier)
    while pos < len(frontier):
        gi = frontier[pos]
        pos += 1
        pending.discard(gi)
        g = gc.gates[gi]
        vals = []
        for pi, n in enumerate(g.ins):
            if pin_force and (gi, pi) in pin_force:
                vals.append(pin_force[(gi, pi)])
            else:
                vals.append(delta.get(n, good_env[n]))
        op = g.op
        if op == "NOT":
            v = ones ^ vals[0]
        elif op == "AND2":
            v = vals[0] & vals[1]
        elif op == "OR2":
            v = vals[0] | vals[1]
        elif op == "XOR2":
            v = vals[0] ^ vals[1]
        else:
            v = (vals[0] & vals[2]) | ((ones ^ vals[0]) & vals[1])
        if v != delta.get(g.out, good_env[g.out]):
            delta[g.out] = v
            for gj, _pj in consumers[g.out]:
                if gj > gi and gj not in pending:
                    pending.add(gj)
                    _insort(frontier, pos, gj)
    return delta


def _insort(frontier, pos, gj):
    import bisect
    idx = bisect.bisect_left(frontier, gj, pos)
    frontier.insert(idx, gj)


def variable_masks(k):
    """Packed values enumerating all 2^k assignments of k bits.

    Pattern index p assigns bit i the value (p >> i) & 1; the returned
    list holds, per bit, the packed int over all 2^k patterns.
    """
    total = 1 << k
    vals = []
    for i in range(k):
        half = 1 << i
        v = ((1 << half) - 1) << half
        width = half * 2
        while width < total:
            v |= v << width
            width *= 2
        vals.append(v)
    return vals


def packed_good_env(gc: GateCircuit, program, input_widths):
    """Good-simulation values of every net packed across the program's
    macro-cycles (bit t = value in cycle t).  Registers advance with good
    values; unassigned inputs hold their previous value."""
    held = {p: 0 for p in input_widths}
    regs = [rb.init for rb in gc.reg_bits]
    packed = [0] * gc.net_count
    for t, cyc in enumerate(program.cycles):
        for net, v in cyc.assigns:
            held[net] = v & mask(input_widths[net])
        in_vals = [(held[port] >> bit) & 1 for port, bit, _ in gc.input_bits]
        env = eval_full(gc, in_vals, regs, 1)
        for nid in range(gc.net_count):
            if env[nid]:
                packed[nid] |= 1 << t
        new_regs = []
        for rb, cur in zip(gc.reg_bits, regs):
            nxt = env[rb.d_net] if rb.d_net is not None else cur
            if rb.load_net is not None and env[rb.load_net]:
                nxt = env[rb.ldata_net]
            new_regs.append(nxt)
        regs = new_regs
    return packed, (1 << len(program.cycles)) - 1


# ---------------------------------------------------------------------------
# scalar sequential simulation (cross-check against funcsim)
# ---------------------------------------------------------------------------

def simulate_gatecircuit(gc: GateCircuit, program, input_widths, output_widths):
    """Run a VectorProgram on the expanded netlist; returns per-cycle output
    values {port: int} plus final register state, for equivalence checks."""
    inputs = {p: 0 for p in input_widths}
    regs = [rb.init for rb in gc.reg_bits]
    out = []
    for cyc in program.cycles:
        for net, v in cyc.assigns:
            inputs[net] = v & mask(input_widths[net])
        in_vals = [(inputs[port] >> bit) & 1 for port, bit, _ in gc.input_bits]
        env = eval_full(gc, in_vals, regs, 1)
        sample = {}
        for port, bit, nid in gc.output_bits:
            sample[port] = sample.get(port, 0) | (env[nid] << bit)
        out.append(sample)
        new_regs = []
        for rb, cur in zip(gc.reg_bits, regs):
            nxt = env[rb.d_net] if rb.d_net is not None else cur
            if rb.load_net is not None and env[rb.load_net]:
                nxt = env[rb.ldata_net]
            new_regs.append(nxt)
        regs = new_regs
    return out, regs
