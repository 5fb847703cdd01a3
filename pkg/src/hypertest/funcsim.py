"""Macro-cycle functional simulation of a Circuit driven by vector programs.

This is the reference semantics everything else is checked against:
levelized combinational evaluation, outputs sampled, registers updated at
the end of the cycle (a register's load port, when asserted, overrides its
D input).  Inputs not assigned in a cycle hold their previous value
(initially 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ir
from .semantics import eval_gate, mask


class ProgramError(Exception):
    pass


@dataclass(frozen=True)
class VectorCycle:
    assigns: tuple = ()   # (net, value) pairs
    expects: tuple = ()   # (net, value) pairs


@dataclass
class VectorProgram:
    name: str
    cycles: list = field(default_factory=list)

    def __len__(self):
        return len(self.cycles)


@dataclass(frozen=True)
class TraceCycle:
    inputs: tuple     # (net, value) for every input port
    outputs: tuple    # (net, value) for every output port
    regs: tuple       # (name, value) for every register
    mismatches: tuple  # (net, expected, actual) for failed expectations


@dataclass
class Trace:
    circuit: str
    program: str
    cycles: list = field(default_factory=list)

    def __len__(self):
        return len(self.cycles)

    @property
    def mismatch_count(self):
        return sum(len(c.mismatches) for c in self.cycles)


def parse_program(text, name="prog"):
    """Parse the .vec format: one line per macro-cycle.

    `set a=0x1F b=2 ; expect y=0x21` -- both clauses optional, values
    accept any base int() understands with prefix (0x.., 0b..) or decimal.
    """
    cycles = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        set_part, _, expect_part = line.partition(";")
        assigns = _parse_clause(set_part.strip(), "set", lineno)
        expects = _parse_clause(expect_part.strip(), "expect", lineno)
        cycles.append(VectorCycle(assigns, expects))
    return VectorProgram(name, cycles)


def _parse_clause(clause, keyword, lineno):
    if not clause:
        return ()
    toks = clause.split()
    if toks[0] != keyword:
        raise ProgramError(f"line {lineno}: expected '{keyword}', got '{toks[0]}'")
    pairs = []
    for tok in toks[1:]:
        if "=" not in tok:
            raise ProgramError(f"line {lineno}: bad assignment '{tok}'")
        net, v = tok.split("=", 1)
        try:
            pairs.append((net, int(v, 0)))
        except ValueError:
            raise ProgramError(f"line {lineno}: bad value '{v}'") from None
    return tuple(pairs)


def print_program(p: VectorProgram) -> str:
    lines = []
    for cyc in p.cycles:
        parts = []
        if cyc.assigns:
            parts.append("set " + " ".join(f"{n}=0x{v:x}" for n, v in cyc.assigns))
        if cyc.expects:
            parts.append("expect " + " ".join(f"{n}=0x{v:x}" for n, v in cyc.expects))
        lines.append(" ; ".join(parts) if parts else "set")
    return "\n".join(lines) + "\n"


def check_program(c: ir.Circuit, p: VectorProgram):
    """Raise ProgramError if the program references nets it may not."""
    inputs = {q.name: q.width for q in c.input_ports()}
    outputs = {q.name: q.width for q in c.output_ports()}
    for i, cyc in enumerate(p.cycles):
        for net, v in cyc.assigns:
            if net not in inputs:
                raise ProgramError(f"cycle {i}: '{net}' is not an input port")
            if v >= (1 << inputs[net]):
                raise ProgramError(f"cycle {i}: value {v:#x} exceeds width of '{net}'")
        for net, v in cyc.expects:
            if net not in outputs:
                raise ProgramError(f"cycle {i}: '{net}' is not an output port")
            if v >= (1 << outputs[net]):
                raise ProgramError(f"cycle {i}: value {v:#x} exceeds width of '{net}'")


class SimState:
    """Mutable per-instance simulation state over a shared Circuit."""

    def __init__(self, c: ir.Circuit):
        self.circuit = c
        self.regs = {r.name: r.init for r in c.registers}
        self.inputs = {p.name: 0 for p in c.input_ports()}
        self._order, _ = ir.levelize(c)
        self._dfeed = c.d_feed_map()

    def clone(self):
        s = SimState.__new__(SimState)
        s.circuit = self.circuit
        s.regs = dict(self.regs)
        s.inputs = dict(self.inputs)
        s._order = self._order
        s._dfeed = self._dfeed
        return s

    def eval_comb(self):
        """Evaluate all gates; returns the full net value environment."""
        c = self.circuit
        env = dict(self.inputs)
        env.update(self.regs)
        for g in self._order:
            vals = [env[n] for n in g.inputs]
            in_w = tuple(c.nets[n] for n in g.inputs)
            out_net = g.outputs[0]
            out_w = c.nets[out_net]
            v = eval_gate(g.kind, g.params, vals, in_w, out_w)
            if out_net in self.regs:
                env["%d:" + out_net] = v   # D value, keyed separately from Q
            else:
                env[out_net] = v
        return env

    def next_regs(self, env):
        new = {}
        for r in self.circuit.registers:
            d_key = "%d:" + r.name
            nxt = env.get(d_key, self.regs[r.name])
            if r.load_en is not None and env[r.load_en] & 1:
                nxt = env[r.load_data]
            new[r.name] = nxt & mask(r.width)
        return new


def step_macro_cycle(state: SimState, assigns):
    """Advance one macro-cycle.  Mutates state; returns (env, outputs)."""
    for net, v in assigns:
        if net not in state.inputs:
            raise ProgramError(f"'{net}' is not an input port")
        state.inputs[net] = v & mask(state.circuit.nets[net])
    env = state.eval_comb()
    outputs = tuple((p.name, env[p.name]) for p in state.circuit.output_ports())
    state.regs = state.next_regs(env)
    return env, outputs


def simulate(c: ir.Circuit, p: VectorProgram) -> Trace:
    check_program(c, p)
    state = SimState(c)
    trace = Trace(c.name, p.name)
    for cyc in p.cycles:
        reg_before = tuple(state.regs.items())
        env, outputs = step_macro_cycle(state, cyc.assigns)
        out_map = dict(outputs)
        mism = tuple((net, want, out_map[net]) for net, want in cyc.expects
                     if out_map[net] != want)
        trace.cycles.append(TraceCycle(
            inputs=tuple(state.inputs.items()),
            outputs=outputs,
            regs=reg_before,
            mismatches=mism,
        ))
    return trace


def format_trace(t: Trace) -> str:
    lines = [f"trace circuit={t.circuit} program={t.program} cycles={len(t.cycles)}"]
    for i, cyc in enumerate(t.cycles):
        outs = " ".join(f"{n}=0x{v:x}" for n, v in cyc.outputs)
        regs = " ".join(f"{n}=0x{v:x}" for n, v in cyc.regs)
        line = f"cycle {i} out {outs}"
        if regs:
            line += f" regs {regs}"
        for net, want, got in cyc.mismatches:
            line += f" MISMATCH {net} expected=0x{want:x} got=0x{got:x}"
        lines.append(line)
    return "\n".join(lines) + "\n"
