"""Pipeline transforms: thread-memory (barrel), stage-slicing (C-slow
retiming), and their combination.

The transformed model keeps the original netlist and annotates it with a
stage assignment per gate plus a thread-state memory depth.  Stage cutting
partitions the levelization into contiguous bands with balanced gate
counts; the inserted pipeline register banks are modeled behaviorally (one
bank per band boundary holding the values that cross it), which preserves
the observable contract without editing the netlist.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ir


class TransformError(Exception):
    pass


@dataclass
class ShpCircuit:
    base: ir.Circuit
    stage_count: int          # C
    depth: int                # D (thread memory depth)
    stage_cut: dict           # gate_id -> stage index 0..C-1
    pointer_scheme: str = "thread-index read/write, one issue per micro-cycle"

    @property
    def cut_count(self):
        return self.stage_count - 1

    def stage_gate_order(self):
        """Per stage, gates in levelized order."""
        order, _ = ir.levelize(self.base)
        stages = [[] for _ in range(self.stage_count)]
        for g in order:
            stages[self.stage_cut[g.gate_id]].append(g)
        return stages

    def net_birth_stage(self):
        """Stage in which each net's value becomes available."""
        birth = {}
        for p in self.base.input_ports():
            birth[p.name] = 0
        for r in self.base.registers:
            birth[r.name] = 0
        regs = self.base.register_names()
        for g in self.base.gates:
            s = self.stage_cut[g.gate_id]
            for out in g.outputs:
                if out not in regs:
                    birth[out] = s
        return birth

    def net_last_use_stage(self):
        """Latest stage that consumes each net's value.

        Output ports and register write data / load pins are consumed when
        the thread completes, i.e. after the last stage.
        """
        last = {n: -1 for n in self.base.nets}
        final = self.stage_count - 1
        for g in self.base.gates:
            s = self.stage_cut[g.gate_id]
            for n in g.inputs:
                last[n] = max(last[n], s)
        for p in self.base.output_ports():
            last[p.name] = final
        for r in self.base.registers:
            has_d_feed = r.name in self.base.d_feed_map()
            if not has_d_feed:
                last[r.name] = final  # held value re-written at completion
            if r.load_en is not None:
                last[r.load_en] = final
                last[r.load_data] = final
        return last

    def cut_live_nets(self):
        """Per boundary b in 0..C-2, the ordered entries stored in its CR
        bank.  An entry is ('net', name) for a combinational/read value or
        ('regd', name) for a register's in-flight next-state value (born at
        its feeding gate's stage, carried to the write at completion)."""
        birth = self.net_birth_stage()
        last = self.net_last_use_stage()
        dfeed = self.base.d_feed_map()
        banks = []
        for b in range(self.stage_count - 1):
            live = [("net", n) for n in self.base.nets
                    if n in birth and birth[n] <= b < last.get(n, -1)]
            for r in self.base.registers:
                g = dfeed.get(r.name)
                if g is not None and self.stage_cut[g.gate_id] <= b:
                    live.append(("regd", r.name))
            banks.append(live)
        return banks

    def cr_bit_count(self):
        return sum(self.base.nets[name]
                   for bank in self.cut_live_nets() for _kind, name in bank)


def _balanced_bands(level_sizes, c):
    """Partition levels 1..L into C contiguous bands with near-equal gate
    counts; returns band index per level (0-based list)."""
    total = sum(level_sizes)
    bands = []
    acc = 0
    band = 0
    for i, sz in enumerate(level_sizes):
        remaining_levels = len(level_sizes) - i
        remaining_bands = c - band
        # never leave more levels than can fit in remaining bands? bands may
        # be empty, but a band must not be forced to split a level.
        if band < c - 1 and acc >= (band + 1) * total / c and remaining_levels >= 1:
            band += 1
        bands.append(band)
        acc += sz
    return bands


def shp_transform(c: ir.Circuit, stage_count: int, depth: int) -> ShpCircuit:
    """Combine stage slicing and thread memories: C stages, D thread slots."""
    if stage_count < 1:
        raise TransformError("stage count must be >= 1")
    if depth < stage_count:
        raise TransformError(
            f"depth {depth} < stage count {stage_count}: at least C resident "
            "threads are needed to fill the pipeline")
    diags = ir.validate(c)
    if diags:
        raise ir.CircuitError(diags)
    _, levels = ir.levelize(c)
    max_level = max(levels.values(), default=0)
    level_sizes = [0] * max_level
    for g in c.gates:
        level_sizes[levels[g.gate_id] - 1] += 1
    bands = _balanced_bands(level_sizes, stage_count)
    stage_cut = {g.gate_id: (bands[levels[g.gate_id] - 1] if max_level else 0)
                 for g in c.gates}
    s = ShpCircuit(base=c, stage_count=stage_count, depth=depth, stage_cut=stage_cut)
    errors = check_path_crossings(s)
    if errors:
        raise TransformError("; ".join(errors))
    return s


def barrel_transform(c: ir.Circuit, depth: int) -> ShpCircuit:
    """Replace registers by depth-D thread memories; single stage."""
    if depth < 1:
        raise TransformError("depth must be >= 1")
    return shp_transform(c, 1, depth)


def cslow_transform(c: ir.Circuit, stage_count: int) -> ShpCircuit:
    """Slice into C stages; the C in-flight threads live in the pipeline."""
    return shp_transform(c, stage_count, stage_count)


# ---------------------------------------------------------------------------
# path-crossing invariant
# ---------------------------------------------------------------------------

def check_path_crossings(s: ShpCircuit):
    """Dataflow check that every source-to-sink combinational path crosses
    exactly C-1 register bank boundaries.

    Sources (primary inputs, state reads) enter at stage 0; sinks (primary
    outputs, state writes) are sampled after the last stage.  Min and max
    crossings are propagated per gate; both must equal C-1 at every sink.
    Returns a list of violation messages (empty when the invariant holds).
    """
    c = s.base
    final = s.stage_count - 1
    errors = []
    regs = c.register_names()
    producers = {}
    for g in c.gates:
        for out in g.outputs:
            if out not in regs:
                producers[out] = g

    order, _ = ir.levelize(c)
    minmax = {}  # gate_id -> (min, max) crossings accumulated from sources
    for g in order:
        stage = s.stage_cut[g.gate_id]
        lo = hi = None
        for n in g.inputs:
            src = producers.get(n)
            if src is None:
                # primary input or state read: enters at stage 0
                w = stage - 0
                pred = (w, w)
            else:
                if src.gate_id not in minmax:
                    continue  # constant-only cone carries no source path
                pmin, pmax = minmax[src.gate_id]
                w = stage - s.stage_cut[src.gate_id]
                if w < 0:
                    errors.append(
                        f"stage cut not monotone: {src.gate_id} (stage "
                        f"{s.stage_cut[src.gate_id]}) feeds {g.gate_id} (stage {stage})")
                    continue
                pred = (pmin + w, pmax + w)
            if lo is None:
                lo, hi = pred
            else:
                lo = min(lo, pred[0])
                hi = max(hi, pred[1])
        if g.inputs and lo is not None:
            minmax[g.gate_id] = (lo, hi)

    # sinks: output ports and register writes (D feed, load pins)
    input_nets = {p.name for p in c.input_ports()}

    def check_sink(net, what):
        src = producers.get(net)
        if src is None:
            if net in input_nets or net in regs:
                lo = hi = final  # source wired straight to a sink
            else:
                return
        else:
            if src.gate_id not in minmax:
                return
            pmin, pmax = minmax[src.gate_id]
            tail = final - s.stage_cut[src.gate_id]
            lo, hi = pmin + tail, pmax + tail
        if not (lo == hi == final):
            errors.append(f"{what}: path crossings min={lo} max={hi}, expected {final}")

    for p in c.output_ports():
        check_sink(p.name, f"output '{p.name}'")
    dfeed = c.d_feed_map()
    for r in c.registers:
        if r.name in dfeed:
            check_sink(r.name, f"register '{r.name}' D feed")
        if r.load_en is not None:
            check_sink(r.load_en, f"register '{r.name}' load enable")
            check_sink(r.load_data, f"register '{r.name}' load data")
    return errors


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

SHP_VERSION = "shp v1"


def print_shp(s: ShpCircuit) -> str:
    lines = [SHP_VERSION,
             f"stages {s.stage_count}",
             f"depth {s.depth}",
             f"pointers {s.pointer_scheme}"]
    for g in s.base.gates:
        lines.append(f"stage {g.gate_id} {s.stage_cut[g.gate_id]}")
    lines.append("netlist-begin")
    lines.append(ir.print_circuit(s.base).rstrip("\n"))
    lines.append("netlist-end")
    return "\n".join(lines) + "\n"


def parse_shp(text: str) -> ShpCircuit:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SHP_VERSION:
        raise TransformError(f"bad or missing header, expected '{SHP_VERSION}'")
    stage_count = depth = None
    pointer_scheme = ""
    stage_cut = {}
    netlist_lines = None
    for raw in lines[1:]:
        if netlist_lines is not None:
            if raw.strip() == "netlist-end":
                break
            netlist_lines.append(raw)
            continue
        line = raw.strip()
        if not line:
            continue
        if line == "netlist-begin":
            netlist_lines = []
            continue
        key, _, rest = line.partition(" ")
        if key == "stages":
            stage_count = int(rest)
        elif key == "depth":
            depth = int(rest)
        elif key == "pointers":
            pointer_scheme = rest
        elif key == "stage":
            gid, _, st = rest.partition(" ")
            stage_cut[gid] = int(st)
        else:
            raise TransformError(f"unknown .shp line '{line}'")
    if stage_count is None or depth is None or netlist_lines is None:
        raise TransformError("incomplete .shp file")
    base = ir.parse_circuit("\n".join(netlist_lines) + "\n")
    s = ShpCircuit(base=base, stage_count=stage_count, depth=depth,
                   stage_cut=stage_cut, pointer_scheme=pointer_scheme or
                   ShpCircuit.pointer_scheme)
    missing = [g.gate_id for g in base.gates if g.gate_id not in stage_cut]
    if missing:
        raise TransformError(f"missing stage assignment for gates: {missing}")
    errors = check_path_crossings(s)
    if errors:
        raise TransformError("; ".join(errors))
    return s
