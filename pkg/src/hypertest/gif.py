"""Inherent-fault universes of RTL-level complex gates and their coverage
under functional tests.

Three universe modes over each gate's decomposition-A structure:

* site (default): collapsed stuck-at sites of the gate's internal
  structure.  One item per (fault class, reachable gate-output bit); the
  alpha field records the canonical fault-free output value derived from
  the stuck polarity and structural path parity.
* path: structural input-to-output paths (deterministic order, capped);
  an item is covered when every segment of the path is locally sensitized
  in the same cycle.
* kmap: one item per (output bit, input minterm) -- the truth-table-entry
  view; capped by total gate input width.

Two observation models: GO items detect at the gate's own output bit; PO
items additionally require the difference to reach a specific primary
output or register-consumed bit j with fault-free value alpha, expanded
over every combinationally reachable j with both polarities.

Detection never accumulates faulty state across macro-cycles: register
data inputs count as observation points, so a would-be state divergence
is itself a detection.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import __version__, ir
from .faults import build_sites, class_delta, obs_reach_masks, output_parity
from .funcsim import VectorProgram, check_program
from .gatelevel import (GateCircuit, eval_full, expand, packed_good_env,
                        variable_masks)
from .semantics import mask

PATH_CAP_DEFAULT = 4096
KMAP_WIDTH_CAP = 12
CLASSIFY_BIT_CAP = 20

MODES = ("site", "path", "kmap")
MODELS = ("GO", "PO")


class UniverseError(Exception):
    pass


class PathCapExceeded(UniverseError):
    pass


class KmapWidthExceeded(UniverseError):
    pass


@dataclass(frozen=True)
class GifItem:
    gate_id: str
    kind: str
    loc: str
    gi: int            # canonical gate input bit
    go: int            # gate output bit
    i: int             # site class / path / minterm index
    alpha: int
    j: str | None = None   # observation label for PO items

    def canonical(self):
        s = f"gif {self.gate_id} gi={self.gi} go={self.go} i={self.i}"
        if self.j is not None:
            s += f" j={self.j}"
        return s + f" a={self.alpha}"


@dataclass
class GifUniverse:
    circuit_name: str
    mode: str
    model: str
    universe_hash: str
    items: list = field(default_factory=list)
    # simulation plan, parallel to items:
    #   per gate: (gate_id, [work units]); a work unit carries the injection
    #   or stimulus condition plus the item indices it decides
    plan: list = field(default_factory=list)
    gc: GateCircuit | None = None

    def __len__(self):
        return len(self.items)

    def index_of(self):
        return {it.canonical(): n for n, it in enumerate(self.items)}


@dataclass
class CoverageSet:
    universe_hash: str
    test_name: str
    cycles: int
    covered: int = 0     # bitset over item indices

    def count(self):
        return bin(self.covered).count("1")

    def has(self, idx):
        return (self.covered >> idx) & 1 == 1


def universe_hash(c: ir.Circuit, mode, model):
    h = hashlib.sha256()
    h.update(ir.print_circuit(c).encode())
    h.update(f"|{mode}|{model}|{__version__}|A".encode())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _gate_input_bit_index(gc: GateCircuit, gate_id, nid):
    """Global bit index of nid within the gate's concatenated input pins."""
    pos = 0
    for pin_nets in gc.gate_in_nets[gate_id]:
        for b, n in enumerate(pin_nets):
            if n == nid:
                return pos + b
        pos += len(pin_nets)
    return None


def _backward_input_bits(gc, gate_id, span, ref):
    """Gate input bits with a structural path to the given site."""
    lo, hi = span
    produced_by = {}
    for gi in range(lo, hi):
        produced_by[gc.gates[gi].out] = gi
    if ref[0] in ("out",):
        start_gates = [ref[1]]
    elif ref[0] == "in":
        nid = gc.gates[ref[1]].ins[ref[2]]
        idx = _gate_input_bit_index(gc, gate_id, nid)
        if idx is not None:
            return {idx}
        start_gates = [produced_by[nid]] if nid in produced_by else []
    else:  # tie
        return set()
    seen = set(start_gates)
    stack = list(start_gates)
    found = set()
    while stack:
        gi = stack.pop()
        for nid in gc.gates[gi].ins:
            idx = _gate_input_bit_index(gc, gate_id, nid)
            if idx is not None:
                found.add(idx)
            src = produced_by.get(nid)
            if src is not None and src not in seen:
                seen.add(src)
                stack.append(src)
    return found


def _forward_out_bits(gc, gate_id, span, ref):
    """Gate output bits structurally reachable from the site."""
    lo, hi = span
    out_nets = gc.gate_out_nets[gate_id]
    consumers = {}
    for gi in range(lo, hi):
        for pi, nid in enumerate(gc.gates[gi].ins):
            consumers.setdefault(nid, []).append(gi)
    if ref[0] in ("out", "tie"):
        start_nets = [gc.gates[ref[1]].out if ref[0] == "out" else ref[1]]
    else:
        start_nets = [gc.gates[ref[1]].out]
    reach_nets = set()
    stack = list(start_nets)
    while stack:
        nid = stack.pop()
        if nid in reach_nets:
            continue
        reach_nets.add(nid)
        for gi in consumers.get(nid, ()):
            stack.append(gc.gates[gi].out)
    return [b for b, n in enumerate(out_nets) if n in reach_nets], reach_nets


def enumerate_gifs(c: ir.Circuit, mode="site", model="PO",
                   path_cap=PATH_CAP_DEFAULT) -> GifUniverse:
    """Build the fault universe for every gate of the circuit."""
    if mode not in MODES:
        raise UniverseError(f"unknown mode '{mode}'")
    model = model.upper()
    if model not in MODELS:
        raise UniverseError(f"unknown model '{model}'")
    diags = ir.validate(c)
    if diags:
        raise ir.CircuitError(diags)

    gc = expand(c, "A")
    reach = obs_reach_masks(gc)
    obs = gc.observation_points()
    u = GifUniverse(circuit_name=c.name, mode=mode, model=model,
                    universe_hash=universe_hash(c, mode, model))
    u.gc = gc  # kept for simulation; not serialized

    for g in c.gates:
        span = gc.gate_span[g.gate_id]
        if mode == "site":
            _enumerate_site(u, c, gc, g, span, reach, obs)
        elif mode == "path":
            _enumerate_path(u, c, gc, g, span, reach, obs, path_cap)
        else:
            _enumerate_kmap(u, c, gc, g, span, reach, obs)
    return u


def _po_expansion(gc, reach, obs, out_nets, go_bits):
    """Observation indices reachable from any of the given output bits."""
    m = 0
    for b in go_bits:
        m |= reach[out_nets[b]]
    return [oi for oi in range(len(obs)) if (m >> oi) & 1]


def _enumerate_site(u, c, gc, g, span, reach, obs):
    lo, hi = span
    if lo == hi and not any(
            gc.net_names[nid].startswith(g.gate_id + ".") for nid in gc.ties):
        return  # pure wiring: no inherent structure
    ties = [nid for nid in gc.ties
            if gc.net_names[nid].startswith(g.gate_id + ".tie")]
    space = build_sites(gc, scope_gates=range(lo, hi), tie_nets=ties)
    out_nets = gc.gate_out_nets[g.gate_id]
    units = []
    for cls in space.classes:
        rep_loc = space.locations[cls.rep[0]]
        rep_ref = rep_loc.refs[0]
        v = cls.rep[1]
        gi_bits = _backward_input_bits(gc, g.gate_id, span, rep_ref)
        gi = min(gi_bits) if gi_bits else 0
        go_bits, _nets = _forward_out_bits(gc, g.gate_id, span, rep_ref)
        if not go_bits:
            continue
        parities = output_parity(gc, range(lo, hi), rep_ref,
                                 [out_nets[b] for b in go_bits])
        go_items = []
        po_items = []
        for b in go_bits:
            p = parities.get(out_nets[b])
            alpha = (1 - v) ^ p if p is not None else 1 - v
            if u.model == "GO":
                idx = len(u.items)
                u.items.append(GifItem(g.gate_id, g.kind, g.loc, gi, b,
                                       cls.index, alpha))
                go_items.append((idx, out_nets[b]))
        if u.model == "PO":
            go_canon = go_bits[0]
            for oi in _po_expansion(gc, reach, obs, out_nets, go_bits):
                label, nid, _kind = obs[oi]
                for alpha in (0, 1):
                    idx = len(u.items)
                    u.items.append(GifItem(g.gate_id, g.kind, g.loc, gi,
                                           go_canon, cls.index, alpha, j=label))
                    po_items.append((idx, oi, alpha))
        units.append(("class", cls, go_items, po_items,
                      [out_nets[b] for b in go_bits]))
    u.plan.append((g.gate_id, "site", units))


def _path_parity(gc, segs):
    """Inversion parity accumulated along a path; data-dependent segments
    (xor pins, mux selects) count as non-inverting for the canonical value."""
    from .faults import _pin_parity
    parity = 0
    for gi, pi in segs:
        p = _pin_parity(gc.gates[gi].op, pi)
        if p == 1:
            parity ^= 1
    return parity


def _enumerate_path(u, c, gc, g, span, reach, obs, cap):
    lo, hi = span
    out_nets = gc.gate_out_nets[g.gate_id]
    out_bit_of = {n: b for b, n in enumerate(out_nets)}
    consumers = {}
    for gi in range(lo, hi):
        for pi, nid in enumerate(gc.gates[gi].ins):
            consumers.setdefault(nid, []).append((gi, pi))
    # enumerate simple paths from each gate-input bit net to an output net
    units = []
    count = 0
    pos = 0
    for pin_nets in gc.gate_in_nets[g.gate_id]:
        for b, nid in enumerate(pin_nets):
            stack = [(nid, ())]
            while stack:
                net, segs = stack.pop()
                if net in out_bit_of:
                    count += 1
                    if count > cap:
                        raise PathCapExceeded(
                            f"gate '{g.gate_id}': more than {cap} structural paths")
                    go = out_bit_of[net]
                    gi_bit = pos + b
                    idx = len(u.items)
                    alpha = 1 ^ _path_parity(gc, segs)
                    if u.model == "GO":
                        u.items.append(GifItem(g.gate_id, g.kind, g.loc,
                                               gi_bit, go, len(units), alpha))
                        units.append(("path", segs, [(idx, net)], []))
                    else:
                        po_items = []
                        m = reach[net]
                        for oi in range(len(obs)):
                            if (m >> oi) & 1:
                                label = obs[oi][0]
                                for a in (0, 1):
                                    pidx = len(u.items)
                                    u.items.append(GifItem(
                                        g.gate_id, g.kind, g.loc, gi_bit, go,
                                        len(units), a, j=label))
                                    po_items.append((pidx, oi, a))
                        units.append(("path", segs, [], po_items, net))
                # continue through consumers inside the span
                for (gidx, pidx) in consumers.get(net, ()):
                    seg = (gidx, pidx)
                    if seg not in segs:
                        stack.append((gc.gates[gidx].out, segs + (seg,)))
        pos += len(pin_nets)
    u.plan.append((g.gate_id, "path", units))


# ---------------------------------------------------------------------------
# detection
# ---------------------------------------------------------------------------

def _segment_sensitivity(gc, good_env, ones, gi, pi):
    """Patterns where flipping pin pi of gate gi flips its output."""
    g = gc.gates[gi]
    vals = [good_env[n] for n in g.ins]
    if g.op == "NOT":
        return ones
    if g.op == "AND2":
        return vals[1 - pi]
    if g.op == "OR2":
        return ones ^ vals[1 - pi]
    if g.op == "XOR2":
        return ones
    # MUX2: out = sel ? b : a
    if pi == 0:
        return vals[1] ^ vals[2]
    if pi == 1:
        return ones ^ vals[0]
    return vals[0]


def _alpha_mask(good_env, ones, nid, alpha):
    return good_env[nid] if alpha else (ones ^ good_env[nid])


def _detect_unit(gc, unit, good_env, ones, obs, consumers):
    """Evaluate one work unit; returns {item index: pattern mask}."""
    out = {}
    kind = unit[0]
    if kind == "class":
        _, cls, go_items, po_items, go_nets = unit
        delta = class_delta(gc, cls, good_env, ones, consumers=consumers)
        if delta is None:
            return out
        for idx, net in go_items:
            diff = delta.get(net, good_env[net]) ^ good_env[net]
            if diff:
                out[idx] = diff
        if po_items:
            boundary = 0
            for net in go_nets:
                boundary |= delta.get(net, good_env[net]) ^ good_env[net]
            if boundary:
                for idx, oi, alpha in po_items:
                    nid = obs[oi][1]
                    diff = delta.get(nid, good_env[nid]) ^ good_env[nid]
                    m = diff & _alpha_mask(good_env, ones, nid, alpha)
                    if m:
                        out[idx] = m
    elif kind == "path":
        segs = unit[1]
        sens = ones
        for gi, pi in segs:
            sens &= _segment_sensitivity(gc, good_env, ones, gi, pi)
            if not sens:
                return out
        go_items = unit[2]
        po_items = unit[3]
        for idx, _net in go_items:
            out[idx] = sens
        if po_items:
            net = unit[4]
            from .gatelevel import eval_delta
            delta = eval_delta(gc, good_env, ones,
                               forced_nets=[(net, good_env[net] ^ sens)],
                               consumers=consumers)
            for idx, oi, alpha in po_items:
                nid = obs[oi][1]
                diff = delta.get(nid, good_env[nid]) ^ good_env[nid]
                m = diff & _alpha_mask(good_env, ones, nid, alpha)
                if m:
                    out[idx] = m
    else:  # kmap
        _, m_value, in_bits, out_net, go_items, po_items = unit
        match = ones
        for b, nid in enumerate(in_bits):
            bitval = (m_value >> b) & 1
            match &= good_env[nid] if bitval else (ones ^ good_env[nid])
            if not match:
                return out
        for idx, _net in go_items:
            out[idx] = match
        if po_items:
            from .gatelevel import eval_delta
            delta = eval_delta(gc, good_env, ones,
                               forced_nets=[(out_net, good_env[out_net] ^ match)],
                               consumers=consumers)
            for idx, oi, alpha in po_items:
                nid = obs[oi][1]
                diff = delta.get(nid, good_env[nid]) ^ good_env[nid]
                mm = diff & _alpha_mask(good_env, ones, nid, alpha)
                if mm:
                    out[idx] = mm
    return out


def gif_fault_sim(c: ir.Circuit, tests, u: GifUniverse, mode="concurrent"):
    """Coverage of every universe item under each test program.

    Returns {test name: CoverageSet}.  'concurrent' packs all macro-cycles
    of a test into one evaluation; 'serial' runs cycle by cycle.  Results
    are identical by construction and cross-checked in the test suite.
    """
    if u.universe_hash != universe_hash(c, u.mode, u.model):
        raise UniverseError("universe does not match this circuit (hash mismatch)")
    gc = u.gc if u.gc is not None else expand(c, "A")
    obs = gc.observation_points()
    consumers = gc.consumers()
    input_widths = {p.name: p.width for p in c.input_ports()}
    out = {}
    for prog in tests:
        check_program(c, prog)
        cov = CoverageSet(u.universe_hash, prog.name, len(prog))
        if len(prog):
            if mode == "concurrent":
                good, ones = packed_good_env(gc, prog, input_widths)
                for _gate_id, _mode, units in u.plan:
                    for unit in units:
                        for idx, m in _detect_unit(gc, unit, good, ones, obs,
                                                   consumers).items():
                            if m:
                                cov.covered |= 1 << idx
            else:
                for t in range(len(prog)):
                    sub = VectorProgram(prog.name, prog.cycles[:t + 1])
                    good, _ = packed_good_env(gc, sub, input_widths)
                    good = [(v >> t) & 1 for v in good]
                    for _gate_id, _mode, units in u.plan:
                        for unit in units:
                            for idx, m in _detect_unit(gc, unit, good, 1, obs,
                                                       consumers).items():
                                if m:
                                    cov.covered |= 1 << idx
        out[prog.name] = cov
    return out


def accumulate(covs):
    """Union of coverage sets (same universe)."""
    total = 0
    h = None
    cycles = 0
    for cov in covs:
        if h is None:
            h = cov.universe_hash
        elif h != cov.universe_hash:
            raise UniverseError("cannot accumulate across universes")
        total |= cov.covered
        cycles += cov.cycles
    return CoverageSet(h or "", "accumulated", cycles, total)


def uncovered(u: GifUniverse, cov: CoverageSet):
    """Universe items not covered, annotated with hierarchy and gate kind."""
    if cov.universe_hash != u.universe_hash:
        raise UniverseError("coverage set belongs to a different universe")
    out = []
    for idx, item in enumerate(u.items):
        if not cov.has(idx):
            out.append((item, item.loc, item.kind))
    return out


# ---------------------------------------------------------------------------
# coverability classification (exhaustive over controllable bits)
# ---------------------------------------------------------------------------

def controllable_bits(c: ir.Circuit):
    return (sum(p.width for p in c.input_ports())
            + sum(r.width for r in c.registers))


def _controllable_frame(c, gc):
    """Packed evaluation of one combinational frame over every assignment
    of the controllable bits (inputs then register outputs, declaration
    order, LSB first)."""
    k = controllable_bits(c)
    masks = variable_masks(k)
    ones = (1 << (1 << k)) - 1
    in_vals = masks[:len(gc.input_bits)]
    reg_vals = masks[len(gc.input_bits):]
    return eval_full(gc, in_vals, reg_vals, ones), ones


def coverable_witnesses(c: ir.Circuit, u: GifUniverse, bit_cap=CLASSIFY_BIT_CAP):
    """Per item: ('coverable', witness) | ('uncoverable', None) |
    ('unclassified', None).  The witness is the smallest controllable-bit
    assignment under which the item's detection condition holds."""
    k = controllable_bits(c)
    if k > bit_cap:
        return [("unclassified", None)] * len(u.items)
    gc = u.gc if u.gc is not None else expand(c, "A")
    obs = gc.observation_points()
    consumers = gc.consumers()
    good, ones = _controllable_frame(c, gc)
    out = [("uncoverable", None)] * len(u.items)
    for _gate_id, _mode, units in u.plan:
        for unit in units:
            for i, m in _detect_unit(gc, unit, good, ones, obs, consumers).items():
                if m:
                    out[i] = ("coverable", (m & -m).bit_length() - 1)
    return out


def classify_universe(c: ir.Circuit, u: GifUniverse, bit_cap=CLASSIFY_BIT_CAP):
    """Per item: 'coverable' | 'uncoverable' | 'unclassified'.

    Exhaustive search over all assignments of primary inputs and register
    outputs (registers treated as controllable), one combinational frame.
    """
    return [v for v, _w in coverable_witnesses(c, u, bit_cap)]


def classify_coverable(c: ir.Circuit, u: GifUniverse, item_index,
                       bit_cap=CLASSIFY_BIT_CAP):
    return classify_universe(c, u, bit_cap)[item_index]


def decode_assignment(c: ir.Circuit, pattern):
    """Split a controllable-bit pattern into input and register values."""
    ins = {}
    pos = 0
    for p in c.input_ports():
        ins[p.name] = (pattern >> pos) & mask(p.width)
        pos += p.width
    regs = {}
    for r in c.registers:
        regs[r.name] = (pattern >> pos) & mask(r.width)
        pos += r.width
    return ins, regs


def _enumerate_kmap(u, c, gc, g, span, reach, obs):
    in_widths = [len(p) for p in gc.gate_in_nets[g.gate_id]]
    total = sum(in_widths)
    if total > KMAP_WIDTH_CAP:
        raise KmapWidthExceeded(
            f"gate '{g.gate_id}': {total} input bits exceed the "
            f"{KMAP_WIDTH_CAP}-bit truth-table cap")
    out_nets = gc.gate_out_nets[g.gate_id]
    in_bits = [n for pin in gc.gate_in_nets[g.gate_id] for n in pin]
    # only computed outputs get entries: wiring aliases and tie constants
    # carry no truth table of their own, and forcing their nets would leak
    # the flip to readers outside this gate
    produced = {gc.gates[i].out for i in range(span[0], span[1])}
    units = []
    from .semantics import eval_gate
    for go, out_net in enumerate(out_nets):
        if out_net not in produced:
            continue
        for m in range(1 << total):
            vals = []
            posn = 0
            for w in in_widths:
                vals.append((m >> posn) & mask(w))
                posn += w
            f = eval_gate(g.kind, g.params, vals, tuple(in_widths),
                          len(out_nets))
            alpha = (f >> go) & 1
            if u.model == "GO":
                idx = len(u.items)
                u.items.append(GifItem(g.gate_id, g.kind, g.loc, 0, go, m, alpha))
                units.append(("kmap", m, in_bits, out_net, [(idx, out_net)], []))
            else:
                po_items = []
                mm = reach[out_net]
                for oi in range(len(obs)):
                    if (mm >> oi) & 1:
                        label = obs[oi][0]
                        for a in (0, 1):
                            pidx = len(u.items)
                            u.items.append(GifItem(g.gate_id, g.kind, g.loc,
                                                   0, go, m, a, j=label))
                            po_items.append((pidx, oi, a))
                units.append(("kmap", m, in_bits, out_net, [], po_items))
    u.plan.append((g.gate_id, "kmap", units))
