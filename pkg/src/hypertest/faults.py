"""Shared fault-location machinery over simple-gate netlists.

A fault site is a pin location after wiring-level folding: a net with a
single reader folds its driver pin and reader pin into one location, a
multi-reader net keeps a stem location plus one branch location per
reader.  Stuck-at faults are (location, value) pairs; equivalence
collapsing unions faults with provably identical behavior using the
classic local rules (controlling input value and output value of AND/OR,
inversion through NOT) plus the wiring folds.

The same engine serves two scopes: a single RTL gate's subnetwork (the
inherent-fault universe of that gate) and the whole expanded netlist (the
stuck-at oracle).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gatelevel import GateCircuit, eval_delta


@dataclass(frozen=True)
class Location:
    ordinal: int
    refs: tuple          # pin refs, canonical order
    label: str

    def injection(self, v):
        """Injection spec for stuck-at-v at this location."""
        first = self.refs[0]
        if first[0] in ("out", "tie", "src"):
            return ("net", first[1], v)
        if first[0] == "in":
            return ("pin", first[1], first[2], v)
        return ("obspin", first[1], v)


@dataclass
class FaultClass:
    index: int
    rep: tuple           # (location ordinal, v)
    members: tuple       # ((location ordinal, v), ...) sorted
    injection: tuple


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[x] = p
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller representative for canonical ordering
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass
class SiteSpace:
    locations: list = field(default_factory=list)   # Location, by ordinal
    classes: list = field(default_factory=list)     # FaultClass, canonical order
    loc_of_ref: dict = field(default_factory=dict)  # pin ref -> location ordinal

    def uncollapsed_faults(self):
        return [(loc.ordinal, v) for loc in self.locations for v in (0, 1)]


def _ref_net(gc: GateCircuit, ref):
    kind = ref[0]
    if kind in ("tie", "src"):
        return ref[1]
    if kind == "out":
        return gc.gates[ref[1]].out
    if kind == "in":
        return gc.gates[ref[1]].ins[ref[2]]
    raise ValueError(ref)


def _ref_label(gc: GateCircuit, ref, obs_labels=None):
    kind = ref[0]
    if kind == "src":
        return gc.net_names[ref[1]]
    if kind == "tie":
        return gc.net_names[ref[1]]
    if kind == "out":
        return f"{gc.net_names[gc.gates[ref[1]].out]}"
    if kind == "in":
        g = gc.gates[ref[1]]
        return f"{gc.net_names[g.out]}.in{ref[2]}"
    if kind == "obs":
        return obs_labels[ref[1]]
    raise ValueError(ref)


def build_sites(gc: GateCircuit, scope_gates=None, include_sources=False,
                include_obs=False, tie_nets=None) -> SiteSpace:
    """Enumerate fault locations and collapsed classes.

    scope_gates: gate indices to include (None = all).  Sources (input and
    register-output stems) and observation pins participate only in the
    whole-netlist scope.  tie_nets restricts which tie stems belong to the
    scope (None = all of gc.ties in the full scope).
    """
    if scope_gates is None:
        scope = list(range(len(gc.gates)))
    else:
        scope = sorted(scope_gates)
    obs = gc.observation_points() if include_obs else []
    obs_labels = [label for label, _n, _k in obs]

    refs = []
    if include_sources:
        for _port, _bit, nid in gc.input_bits:
            refs.append(("src", nid))
        for rb in gc.reg_bits:
            refs.append(("src", rb.q_net))
    ties = sorted(tie_nets) if tie_nets is not None else (
        sorted(gc.ties) if scope_gates is None else [])
    for nid in ties:
        refs.append(("tie", nid))
    for gi in scope:
        g = gc.gates[gi]
        for pi in range(len(g.ins)):
            refs.append(("in", gi, pi))
        refs.append(("out", gi))
    if include_obs:
        for oi, (_label, nid, _kind) in enumerate(obs):
            if nid is not None:
                refs.append(("obs", oi))

    ref_set = set(refs)

    # global reader map: net -> reader refs (everywhere, not just in scope)
    readers = {}
    for gi, g in enumerate(gc.gates):
        for pi, nid in enumerate(g.ins):
            readers.setdefault(nid, []).append(("in", gi, pi))
    for oi, (_label, nid, _kind) in enumerate(obs):
        if nid is not None:
            readers.setdefault(nid, []).append(("obs", oi))
    if not include_obs:
        # the scope must still see outside readers to block stem folding
        for _port, _bit, nid in gc.output_bits:
            readers.setdefault(nid, []).append(("ext-po", nid))
        for rb in gc.reg_bits:
            for nid in (rb.d_net, rb.load_net, rb.ldata_net):
                if nid is not None:
                    readers.setdefault(nid, []).append(("ext-reg", nid))

    drivers = {}
    for ref in refs:
        if ref[0] in ("out", "tie", "src"):
            drivers[_ref_net(gc, ref)] = ref

    uf = _UnionFind()
    for ref in refs:
        uf.find(ref)
    for nid, drv in drivers.items():
        rd = readers.get(nid, [])
        if len(rd) == 1 and rd[0] in ref_set:
            uf.union(drv, rd[0])

    # canonical locations, ordered by first ref appearance
    groups = {}
    for ref in refs:
        groups.setdefault(uf.find(ref), []).append(ref)
    order = {ref: i for i, ref in enumerate(refs)}
    space = SiteSpace()
    for root in sorted(groups, key=lambda r: min(order[m] for m in groups[r])):
        members = tuple(sorted(groups[root], key=lambda m: order[m]))
        loc = Location(len(space.locations), members, _ref_label(gc, members[0], obs_labels))
        space.locations.append(loc)
        for m in members:
            space.loc_of_ref[m] = loc.ordinal

    # equivalence collapsing over (location, v)
    cf = _UnionFind()
    for loc in space.locations:
        for v in (0, 1):
            cf.find((loc.ordinal, v))
    for gi in scope:
        g = gc.gates[gi]
        lout = space.loc_of_ref[("out", gi)]
        lins = [space.loc_of_ref[("in", gi, pi)] for pi in range(len(g.ins))]
        if g.op == "NOT":
            cf.union((lins[0], 0), (lout, 1))
            cf.union((lins[0], 1), (lout, 0))
        elif g.op == "AND2":
            for li in lins:
                cf.union((li, 0), (lout, 0))
        elif g.op == "OR2":
            for li in lins:
                cf.union((li, 1), (lout, 1))
        # XOR2 / MUX2: no local equivalences

    cgroups = {}
    for loc in space.locations:
        for v in (0, 1):
            cgroups.setdefault(cf.find((loc.ordinal, v)), []).append((loc.ordinal, v))
    for root in sorted(cgroups, key=lambda r: min(cgroups[r])):
        members = tuple(sorted(cgroups[root]))
        rep = members[0]
        inj = space.locations[rep[0]].injection(rep[1])
        space.classes.append(FaultClass(len(space.classes), rep, members, inj))
    return space


def class_delta(gc: GateCircuit, space_or_cls, good_env, ones, consumers=None):
    """Faulty-minus-good evaluation for one fault class; returns the delta
    net map (empty when the fault has no effect on any pattern).  Obs-pin
    faults return ('obspin', oi, v) untouched -- the caller observes them
    directly."""
    cls = space_or_cls
    kind = cls.injection[0]
    if kind == "net":
        _, nid, v = cls.injection
        forced = [(nid, (ones if v else 0))]
        return eval_delta(gc, good_env, ones, forced_nets=forced, consumers=consumers)
    if kind == "pin":
        _, gi, pi, v = cls.injection
        return eval_delta(gc, good_env, ones,
                          pin_force={(gi, pi): (ones if v else 0)}, consumers=consumers)
    return None  # obspin: no combinational propagation


def _pin_parity(op, pin):
    """Inversion parity from one pin to the gate output along a sensitized
    path; None when the direction is data-dependent."""
    if op == "NOT":
        return 1
    if op in ("AND2", "OR2"):
        return 0
    if op == "MUX2":
        return None if pin == 0 else 0
    return None  # XOR2


def output_parity(gc: GateCircuit, scope_gates, start_ref, out_nets):
    """Structural inversion parity from a fault site to each listed net.

    Returns {net: 0|1|None} for reached nets; None means mixed parity or a
    data-dependent segment on some path.
    """
    consumers = {}
    for gi in scope_gates:
        g = gc.gates[gi]
        for pi, nid in enumerate(g.ins):
            consumers.setdefault(nid, []).append((gi, pi))

    parity = {}   # net -> subset of {0, 1}
    work = []

    def push(net, ps):
        cur = parity.setdefault(net, set())
        new = ps - cur
        if new:
            cur |= new
            work.append((net, new))

    if start_ref[0] in ("out", "tie", "src"):
        push(_ref_net(gc, start_ref), {0})
    else:
        gi = start_ref[1]
        p = _pin_parity(gc.gates[gi].op, start_ref[2])
        push(gc.gates[gi].out, {0, 1} if p is None else {p})

    while work:
        net, ps = work.pop()
        for gi, pi in consumers.get(net, ()):
            g = gc.gates[gi]
            pp = _pin_parity(g.op, pi)
            if pp is None:
                push(g.out, {0, 1})
            elif pp == 0:
                push(g.out, set(ps))
            else:
                push(g.out, {1 - p for p in ps})

    result = {}
    for net in out_nets:
        s = parity.get(net)
        if s is None:
            continue
        result[net] = next(iter(s)) if len(s) == 1 else None
    return result


def obs_reach_masks(gc: GateCircuit):
    """Per net, bitmask over observation-point indices structurally
    reachable (forward) from that net."""
    obs = gc.observation_points()
    masks = [0] * gc.net_count
    for oi, (_label, nid, _kind) in enumerate(obs):
        if nid is not None:
            masks[nid] |= 1 << oi
    for g in reversed(gc.gates):
        m = masks[g.out]
        if m:
            for nid in g.ins:
                masks[nid] |= m
    return masks
