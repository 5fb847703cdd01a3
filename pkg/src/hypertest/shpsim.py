"""Micro-cycle simulation of transformed circuits: thread scheduling,
per-thread performance analytics, bit-flip injection, detection by
start-state comparison, majority voting and recovery.

One macro-cycle of a thread takes C micro-cycles (one per stage).  The
thread controller issues one thread per micro-cycle according to a
schedule window; an issued thread reads its state from the thread memory,
flows through the stages, and writes its next state when it completes.

Redundant mode runs R identical threads per macro-cycle.  Their start
states are compared while they propagate; results are only committed when
all start states agree, otherwise nothing is stored, the deviant state is
replaced by majority vote and the cycle repeats with held inputs.  With a
comparison latency larger than the pipeline depth, writes go to
alternating memory banks so a verified state always survives for rollback.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import ir
from .funcsim import ProgramError, Trace, TraceCycle, VectorProgram
from .semantics import eval_gate, mask
from .shp import ShpCircuit

IDLE = None


class ScheduleError(Exception):
    pass


class SeuError(Exception):
    pass


class UnknownThreadError(ScheduleError):
    pass


@dataclass(frozen=True)
class Schedule:
    window: tuple          # entries: thread index or IDLE (None)
    repeat: bool = True

    def __post_init__(self):
        if len(self.window) < 1:
            raise ScheduleError("schedule window must not be empty")

    def slot(self, micro):
        w = len(self.window)
        if micro < w:
            return self.window[micro]
        if not self.repeat:
            return IDLE
        return self.window[micro % w]

    def threads(self):
        return sorted({t for t in self.window if t is not IDLE})


def parse_schedule(text) -> Schedule:
    window = None
    repeat = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "window":
            entries = []
            for t in toks[1:]:
                if t == "-":
                    entries.append(IDLE)
                else:
                    try:
                        entries.append(int(t))
                    except ValueError:
                        raise ScheduleError(f"line {lineno}: bad slot '{t}'") from None
            window = tuple(entries)
        elif toks[0] == "repeat":
            repeat = True
        else:
            raise ScheduleError(f"line {lineno}: unknown statement '{toks[0]}'")
    if window is None:
        raise ScheduleError("missing 'window' line")
    return Schedule(window, repeat)


def print_schedule(s: Schedule) -> str:
    line = "window " + " ".join("-" if t is IDLE else str(t) for t in s.window)
    return line + ("\nrepeat\n" if s.repeat else "\n")


def validate_schedule(sched: Schedule, stage_count: int, depth: int):
    """Reissue constraint: a thread issued at micro-cycle m must not be
    issued again before m + C.  Raises ScheduleError on violation."""
    w = len(sched.window)
    for t in sched.threads():
        if not 0 <= t < depth:
            raise UnknownThreadError(f"thread {t} outside memory depth {depth}")
    horizon = list(sched.window) + (list(sched.window) if sched.repeat else [])
    last_seen = {}
    for pos, t in enumerate(horizon):
        if t is IDLE:
            continue
        if t in last_seen and pos - last_seen[t] < stage_count:
            raise ScheduleError(
                f"thread {t} reissued after {pos - last_seen[t]} micro-cycles, "
                f"minimum is {stage_count}")
        last_seen[t] = pos


# ---------------------------------------------------------------------------
# per-stage evaluation
# ---------------------------------------------------------------------------

_D_PREFIX = "%d:"


class StagedEval:
    """Evaluates one thread's macro-cycle stage by stage."""

    def __init__(self, s: ShpCircuit):
        self.s = s
        self.c = s.base
        self.stage_gates = s.stage_gate_order()
        self.regs = set(self.c.register_names())

    def start_env(self, state, inputs):
        env = dict(inputs)
        env.update(state)
        return env

    def run_stage(self, env, stage):
        c = self.c
        for g in self.stage_gates[stage]:
            vals = [env[n] for n in g.inputs]
            in_w = tuple(c.nets[n] for n in g.inputs)
            out_net = g.outputs[0]
            v = eval_gate(g.kind, g.params, vals, in_w, c.nets[out_net])
            if out_net in self.regs:
                env[_D_PREFIX + out_net] = v
            else:
                env[out_net] = v

    def finish(self, env, state):
        """Sample outputs and compute the next register state."""
        outputs = tuple((p.name, env[p.name]) for p in self.c.output_ports())
        nxt = {}
        for r in self.c.registers:
            v = env.get(_D_PREFIX + r.name, state[r.name])
            if r.load_en is not None and env[r.load_en] & 1:
                v = env[r.load_data]
            nxt[r.name] = v & mask(r.width)
        return outputs, nxt


# ---------------------------------------------------------------------------
# plain scheduled execution
# ---------------------------------------------------------------------------

@dataclass
class _Flight:
    thread: int
    issued_at: int
    stage: int
    env: dict
    state: dict
    macro_index: int


class ThreadMemory:
    """Per-register, depth-D state memory addressed by thread slot."""

    def __init__(self, c: ir.Circuit, depth: int, banks: int = 1):
        self.depth = depth
        self.banks = [
            {r.name: [r.init] * depth for r in c.registers}
            for _ in range(banks)
        ]

    def read(self, slot, bank=0):
        return {name: vals[slot] for name, vals in self.banks[bank].items()}

    def write(self, slot, state, bank=0):
        for name, v in state.items():
            self.banks[bank][name][slot] = v

    def flip(self, element, slot, bit, bank=0):
        if element not in self.banks[bank]:
            raise SeuError(f"unknown state element '{element}'")
        self.banks[bank][element][slot] ^= (1 << bit)


def run_shp(s: ShpCircuit, sched: Schedule, programs: dict,
            alias_map=None) -> dict:
    """Run threads under a schedule; returns {thread: Trace}.

    Each issued thread executes one macro-cycle of its program per issue.
    alias_map remaps thread index to memory slot (test hook for
    interference experiments); identity when omitted.
    """
    validate_schedule(sched, s.stage_count, s.depth)
    for t in programs:
        if not 0 <= t < s.depth:
            raise UnknownThreadError(f"thread {t} outside memory depth {s.depth}")

    slot_of = dict(alias_map) if alias_map else {}
    ev = StagedEval(s)
    mem = ThreadMemory(s.base, s.depth)
    input_ports = [p.name for p in s.base.input_ports()]
    held = {t: {n: 0 for n in input_ports} for t in programs}
    traces = {t: Trace(s.base.name, programs[t].name) for t in programs}
    done = {t: len(programs[t]) == 0 for t in programs}
    flights = []
    micro = 0
    # upper bound keeps a malformed schedule from spinning forever
    limit = (sum(len(p) for p in programs.values()) + 4) * max(
        len(sched.window), s.stage_count) * 4 + 64

    while (not all(done.values()) or flights) and micro < limit:
        slot = sched.slot(micro)
        if slot is not IDLE and slot not in programs:
            slot = IDLE  # scheduled thread without a program never issues
        if not sched.repeat and micro >= len(sched.window) and not flights:
            break
        if slot is not IDLE and not done[slot] and all(f.thread != slot for f in flights):
            t = slot
            prog = programs[t]
            idx = len(traces[t].cycles)
            for net, v in prog.cycles[idx].assigns:
                if net not in held[t]:
                    raise ProgramError(f"'{net}' is not an input port")
                held[t][net] = v & mask(s.base.nets[net])
            state = mem.read(slot_of.get(t, t))
            env = ev.start_env(state, held[t])
            flights.append(_Flight(t, micro, 0, env, state, idx))

        completed = []
        for f in flights:
            ev.run_stage(f.env, f.stage)
            f.stage += 1
            if f.stage == s.stage_count:
                completed.append(f)
        for f in completed:
            flights.remove(f)
            outputs, nxt = ev.finish(f.env, f.state)
            mem.write(slot_of.get(f.thread, f.thread), nxt)
            prog = programs[f.thread]
            out_map = dict(outputs)
            mism = tuple((net, want, out_map[net])
                         for net, want in prog.cycles[f.macro_index].expects
                         if out_map[net] != want)
            traces[f.thread].cycles.append(TraceCycle(
                inputs=tuple(held[f.thread].items()),
                outputs=outputs,
                regs=tuple(f.state.items()),
                mismatches=mism,
            ))
            if len(traces[f.thread].cycles) >= len(prog):
                done[f.thread] = True
        micro += 1

    if not all(done.values()):
        stuck = sorted(t for t, d in done.items() if not d)
        raise ScheduleError(f"schedule never completes programs for threads {stuck}")
    return traces


def check_noninterference(s: ShpCircuit, sched: Schedule, functional: set,
                          test: set, programs: dict, alias_map=None) -> bool:
    """True iff functional threads' traces are bit-identical with and
    without the test threads scheduled."""
    if functional & test:
        raise ScheduleError("functional and test thread sets overlap")
    full = run_shp(s, sched, programs, alias_map=alias_map)
    solo_window = tuple(IDLE if t in test else t for t in sched.window)
    solo_sched = Schedule(solo_window, sched.repeat)
    solo_programs = {t: p for t, p in programs.items() if t not in test}
    solo = run_shp(s, solo_sched, solo_programs, alias_map=alias_map)
    return all(full[t] == solo[t] for t in sorted(functional))


# ---------------------------------------------------------------------------
# performance analytics
# ---------------------------------------------------------------------------

@dataclass
class FavgReport:
    f_micro: Fraction
    per_thread: dict   # thread -> Fraction
    idle: Fraction

    def total(self):
        return sum(self.per_thread.values(), Fraction(0)) + self.idle


def favg(sched: Schedule, f_micro, threads=None) -> FavgReport:
    """Average thread performance: issue share of the window times the
    micro-cycle frequency.  Exact rational arithmetic."""
    w = len(sched.window)
    f = Fraction(f_micro)
    counts = {}
    idle = 0
    for entry in sched.window:
        if entry is IDLE:
            idle += 1
        else:
            counts[entry] = counts.get(entry, 0) + 1
    listed = sched.threads() if threads is None else sorted(threads)
    per = {t: Fraction(counts.get(t, 0), w) * f for t in listed}
    return FavgReport(f_micro=f, per_thread=per, idle=Fraction(idle, w) * f)


# ---------------------------------------------------------------------------
# redundant execution with injection, voting and recovery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TcConfig:
    redundancy: int                  # R, odd, >= 3
    threads: tuple                   # the R redundant thread slots
    compare_latency: int = 1         # L micro-cycles
    alternating_banks: bool = False

    def validate(self, s: ShpCircuit):
        r = self.redundancy
        if r < 3 or r % 2 == 0:
            raise ScheduleError(f"redundancy must be odd and >= 3, got {r}")
        if len(set(self.threads)) != r:
            raise ScheduleError("redundant thread ids must be distinct and match R")
        if r > s.depth:
            raise ScheduleError(f"R={r} exceeds memory depth {s.depth}")
        for t in self.threads:
            if not 0 <= t < s.depth:
                raise UnknownThreadError(f"thread {t} outside memory depth {s.depth}")
        if self.compare_latency < 1:
            raise ScheduleError("compare latency must be >= 1")
        if self.compare_latency > s.stage_count and not self.alternating_banks:
            raise ScheduleError(
                f"compare latency {self.compare_latency} exceeds stage count "
                f"{s.stage_count}; alternating banks required")


@dataclass(frozen=True)
class SeuEvent:
    micro_cycle: int
    element: str          # register name, or 'cr' for a pipeline bank hit
    thread: int = 0       # thread slot (state-memory targets)
    bit: int = 0
    cr_bank: int = -1     # boundary index for 'cr' targets
    cr_slot: int = -1     # index into the bank's live-net list


def parse_injections(text) -> list:
    """Parse the .seu format: one event per line, e.g.
    `inject cycle=12 elem=count thread=1 bit=3` or
    `inject cycle=9 elem=cr:0:2 bit=0`."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] != "inject":
            raise SeuError(f"line {lineno}: expected 'inject'")
        kv = {}
        for tok in toks[1:]:
            if "=" not in tok:
                raise SeuError(f"line {lineno}: bad token '{tok}'")
            k, v = tok.split("=", 1)
            kv[k] = v
        try:
            cycle = int(kv["cycle"], 0)
            elem = kv["elem"]
            bit = int(kv.get("bit", "0"), 0)
            if elem.startswith("cr:"):
                _, bank, slot = elem.split(":")
                events.append(SeuEvent(cycle, "cr", bit=bit,
                                       cr_bank=int(bank), cr_slot=int(slot)))
            else:
                events.append(SeuEvent(cycle, elem, thread=int(kv.get("thread", "0"), 0),
                                       bit=bit))
        except (KeyError, ValueError) as e:
            raise SeuError(f"line {lineno}: {e}") from None
    return events


def print_injections(events) -> str:
    lines = []
    for e in events:
        if e.element == "cr":
            lines.append(f"inject cycle={e.micro_cycle} elem=cr:{e.cr_bank}:{e.cr_slot} bit={e.bit}")
        else:
            lines.append(f"inject cycle={e.micro_cycle} elem={e.element} "
                         f"thread={e.thread} bit={e.bit}")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class RedundancyReport:
    detections: list = field(default_factory=list)   # (micro, (threads,))
    recoveries: list = field(default_factory=list)   # (micro, replaced, donor)
    repeated_cycles: int = 0
    unrecoverable: bool = False
    final_equivalent: bool = False
    halted_at_cycle: int | None = None


def _vote(states_by_thread, redundancy):
    """Group identical state snapshots; returns (majority threads, majority
    state) or None when no strict majority exists."""
    groups = {}
    for t, st in states_by_thread.items():
        key = tuple(st.items())
        groups.setdefault(key, []).append(t)
    best_key = max(groups, key=lambda k: len(groups[k]))
    if len(groups[best_key]) * 2 <= redundancy:
        return None
    return sorted(groups[best_key]), dict(best_key)


def run_redundant(s: ShpCircuit, tc: TcConfig, program: VectorProgram,
                  injections=()):
    """Execute R redundant copies of one program with SEU injection.

    Returns (Trace, RedundancyReport).  The trace holds the committed
    (voted) architectural outputs; on an unrecoverable vote the simulation
    halts at that macro-cycle with the flag set.
    """
    tc.validate(s)
    injections = sorted(injections, key=lambda e: e.micro_cycle)
    c = s.base
    stage_count = s.stage_count
    r_threads = list(tc.threads)
    r = tc.redundancy
    period = max(r, stage_count)
    ev = StagedEval(s)
    banks = 2 if tc.alternating_banks else 1
    mem = ThreadMemory(c, s.depth, banks=banks)
    live_nets = s.cut_live_nets()

    # per-slot pending state injections, applied in event order around the
    # slot's own read/write points
    state_inj = {t: [] for t in r_threads}
    cr_inj = []
    for e in injections:
        if e.element == "cr":
            if not 0 <= e.cr_bank < stage_count - 1:
                raise SeuError(f"cr bank {e.cr_bank} out of range")
            if not 0 <= e.cr_slot < len(live_nets[e.cr_bank]):
                raise SeuError(f"cr slot {e.cr_slot} out of range for bank {e.cr_bank}")
            _kind, name = live_nets[e.cr_bank][e.cr_slot]
            if not 0 <= e.bit < c.nets[name]:
                raise SeuError(f"bit {e.bit} exceeds width of '{name}'")
            cr_inj.append(e)
        else:
            if e.element not in c.register_names():
                raise SeuError(f"unknown state element '{e.element}'")
            if e.thread not in r_threads:
                raise SeuError(f"thread {e.thread} is not a redundant thread")
            width = next(rr.width for rr in c.registers if rr.name == e.element)
            if not 0 <= e.bit < width:
                raise SeuError(f"bit {e.bit} exceeds width of '{e.element}'")
            state_inj[e.thread].append(e)

    def apply_state_inj(thread, upto_micro, bank):
        pend = state_inj[thread]
        while pend and pend[0].micro_cycle <= upto_micro:
            e = pend.pop(0)
            mem.flip(e.element, thread, e.bit, bank=bank)

    def cr_flips_for_round(base):
        """Map redundant-thread position j -> [(stage, entry, bit)] flips
        that hit its in-flight values this round."""
        out = {}
        for e in cr_inj:
            j = e.micro_cycle - base - e.cr_bank - 1
            if 0 <= j < r:
                entry = live_nets[e.cr_bank][e.cr_slot]
                out.setdefault(j, []).append((e.cr_bank + 1, entry, e.bit))
        return out

    input_ports = [p.name for p in c.input_ports()]
    held = {n: 0 for n in input_ports}
    trace = Trace(c.name, program.name)
    report = RedundancyReport()

    pc = 0
    base = 0
    round_idx = 0
    # alternating mode: pending round awaiting its (late) compare verdict
    pending = None  # (pc, starts, results dict thread->(next,outs), read_bank)
    safety = (len(program) + len(injections) + 4) * 6 + 32

    def read_bank_for(round_i):
        return round_i % 2 if tc.alternating_banks else 0

    def execute_round(starts, assigns, base_micro):
        for net, v in assigns:
            held[net] = v & mask(c.nets[net])
        flips = cr_flips_for_round(base_micro)
        results = {}
        for j, t in enumerate(r_threads):
            env = ev.start_env(starts[t], held)
            for stage in range(stage_count):
                for (st, entry, bit) in flips.get(j, ()):
                    if st == stage:
                        kind, name = entry
                        key = name if kind == "net" else _D_PREFIX + name
                        if key in env:
                            env[key] ^= (1 << bit)
                ev.run_stage(env, stage)
            outputs, nxt = ev.finish(env, starts[t])
            results[t] = (nxt, outputs)
        return results

    def commit(pc_committed, starts, results):
        outs = [dict(outputs) for (_n, outputs) in results.values()]
        voted = []
        for p in c.output_ports():
            v = 0
            for bit in range(p.width):
                count = sum((o[p.name] >> bit) & 1 for o in outs)
                if count * 2 > r:
                    v |= 1 << bit
            voted.append((p.name, v))
        voted = tuple(voted)
        out_map = dict(voted)
        mism = tuple((net, want, out_map[net])
                     for net, want in program.cycles[pc_committed].expects
                     if out_map[net] != want)
        trace.cycles.append(TraceCycle(
            inputs=tuple(held.items()),
            outputs=voted,
            regs=tuple(starts[r_threads[0]].items()),
            mismatches=mism,
        ))

    while pc < len(program) or pending is not None:
        if round_idx > safety:
            raise ScheduleError("redundant execution failed to make progress")
        rb = read_bank_for(round_idx)
        wb = (round_idx + 1) % 2 if tc.alternating_banks else 0

        if tc.alternating_banks and pending is not None:
            # verdict for the previous round's start-state compare arrives
            # one round late; on mismatch the speculative work is squashed
            p_pc, p_starts, p_results = pending
            if _all_states_equal(p_starts):
                commit(p_pc, p_starts, p_results)
                pc = p_pc + 1
                pending = None
                # fall through: this round executes the next cycle
            else:
                detect_micro = (base - period) + r - 1 + tc.compare_latency
                verdict = _vote(p_starts, r)
                if verdict is None:
                    report.detections.append((detect_micro, tuple(r_threads)))
                    report.unrecoverable = True
                    report.halted_at_cycle = p_pc
                    break
                maj_threads, maj_state = verdict
                bad = tuple(t for t in r_threads if t not in maj_threads)
                report.detections.append((detect_micro, bad))
                donor = maj_threads[0]
                end_micro = max(base + period - 1, detect_micro)
                for t in bad:
                    report.recoveries.append((end_micro, t, donor))
                # repaired state for all R slots goes to this round's write
                # bank, which the re-executed cycle will read
                for t in r_threads:
                    apply_state_inj(t, end_micro, wb)
                    mem.write(t, dict(maj_state), bank=wb)
                report.repeated_cycles += 2  # mismatched round + squashed round
                pending = None
                pc = p_pc
                base += period
                round_idx += 1
                continue

        if pc >= len(program):
            break

        # reads happen in micro order, one redundant slot per micro-cycle
        starts = {}
        for j, t in enumerate(r_threads):
            apply_state_inj(t, base + j, rb)
            starts[t] = mem.read(t, bank=rb)

        if not tc.alternating_banks:
            if not _all_states_equal(starts):
                detect_micro = base + r - 1 + tc.compare_latency
                verdict = _vote(starts, r)
                if verdict is None:
                    report.detections.append((detect_micro, tuple(r_threads)))
                    report.unrecoverable = True
                    report.halted_at_cycle = pc
                    break
                maj_threads, maj_state = verdict
                bad = tuple(t for t in r_threads if t not in maj_threads)
                report.detections.append((detect_micro, bad))
                donor = maj_threads[0]
                end_micro = max(base + period - 1, detect_micro)
                for t in bad:
                    report.recoveries.append((end_micro, t, donor))
                    apply_state_inj(t, end_micro, rb)
                    mem.write(t, dict(maj_state), bank=rb)
                report.repeated_cycles += 1
                base += period
                round_idx += 1
                continue
            results = execute_round(starts, program.cycles[pc].assigns, base)
            commit(pc, starts, results)
            for j, t in enumerate(r_threads):
                apply_state_inj(t, base + j + stage_count - 1, rb)
                mem.write(t, results[t][0], bank=rb)
            pc += 1
        else:
            results = execute_round(starts, program.cycles[pc].assigns, base)
            for j, t in enumerate(r_threads):
                apply_state_inj(t, base + j + stage_count - 1, wb)
                mem.write(t, results[t][0], bank=wb)
            pending = (pc, starts, results)
            # pc advances only when the verdict commits the round

        base += period
        round_idx += 1

    if not report.unrecoverable:
        final_states = [mem.read(t, bank=read_bank_for(round_idx)) for t in r_threads]
        report.final_equivalent = all(st == final_states[0] for st in final_states)
    return trace, report


def _all_states_equal(starts):
    vals = list(starts.values())
    return all(v == vals[0] for v in vals[1:])
