"""Gate-level stuck-at-fault oracle over expanded netlists.

Enumerates pin stuck-at faults (with wiring-level site folding), collapses
them by exact local equivalence only (no dominance, so detection
bookkeeping stays exact per class), simulates detection under functional
test programs with the same per-cycle observation rule the inherent-fault
model uses, classifies testability by exhaustive search over controllable
bits, and reports the test-cycles-per-net figure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import ir
from .faults import build_sites, class_delta
from .funcsim import check_program
from .gatelevel import GateCircuit, eval_full, expand, packed_good_env, variable_masks

CLASSIFY_BIT_CAP = 20


@dataclass(frozen=True)
class Saf:
    location: str        # folded site label
    stuck: int
    class_index: int
    representative: bool

    def canonical(self):
        return f"saf {self.location}/{self.stuck}"


@dataclass
class SafCoverage:
    circuit_name: str
    decomp: str
    fault_count: int
    testability: list                 # per class: testable|untestable|unclassified
    per_test: dict = field(default_factory=dict)   # name -> set of class indices
    cycles: dict = field(default_factory=dict)     # name -> macro-cycle count

    def detected_union(self, names=None):
        names = list(self.per_test) if names is None else names
        u = set()
        for n in names:
            u |= self.per_test[n]
        return u

    def testable_classes(self):
        return {i for i, t in enumerate(self.testability) if t == "testable"}

    def unclassified_classes(self):
        return {i for i, t in enumerate(self.testability) if t == "unclassified"}

    def coverage_percent(self, names=None):
        testable = self.testable_classes()
        if not testable:
            return 100.0
        det = self.detected_union(names) & testable
        return 100.0 * len(det) / len(testable)

    def missed_testable(self, names=None):
        return sorted(self.testable_classes() - self.detected_union(names))


@dataclass
class TcpnReport:
    total_cycles: int
    net_count: int
    tcpn: Fraction


def fault_space(gc: GateCircuit):
    """Site space over the whole netlist including source stems, tie cells
    and port/register observation pins."""
    return build_sites(gc, scope_gates=None, include_sources=True,
                       include_obs=True)


def enumerate_safs(gc: GateCircuit, collapse=True):
    """All pin stuck-at faults, folded at wiring level; collapse groups
    exact-equivalent faults and marks deterministic representatives."""
    space = fault_space(gc)
    faults = []
    if collapse:
        for cls in space.classes:
            for n, (loc_ord, v) in enumerate(cls.members):
                faults.append(Saf(space.locations[loc_ord].label, v,
                                  cls.index, n == 0))
    else:
        member_class = {}
        for cls in space.classes:
            for m in cls.members:
                member_class[m] = cls.index
        for loc in space.locations:
            for v in (0, 1):
                faults.append(Saf(loc.label, v, member_class[(loc.ordinal, v)],
                                  False))
    return faults


def _obs_values(gc, good_env, obs):
    return [good_env[nid] if nid is not None else None for _l, nid, _k in obs]


def _class_detect_mask(gc, cls, good_env, ones, obs, consumers, space):
    """Pattern mask where the class representative is detected at any
    observation point."""
    if cls.injection[0] == "obspin":
        _, oi, v = cls.injection
        nid = obs[oi][1]
        forced = ones if v else 0
        return good_env[nid] ^ forced
    delta = class_delta(gc, cls, good_env, ones, consumers=consumers)
    m = 0
    for _label, nid, _kind in obs:
        if nid is None:
            continue
        m |= delta.get(nid, good_env[nid]) ^ good_env[nid]
        if m == ones:
            break
    return m


def testable_witnesses(gc: GateCircuit, bit_cap=CLASSIFY_BIT_CAP):
    """Per fault class: ('testable', smallest detecting controllable
    assignment) | ('untestable', None) | ('unclassified', None).

    Exhaustive over primary-input and register-output bits (registers are
    treated as fully controllable, a stated over-approximation)."""
    space = fault_space(gc)
    k = len(gc.input_bits) + len(gc.reg_bits)
    if k > bit_cap:
        return [("unclassified", None)] * len(space.classes), space
    masks = variable_masks(k)
    ones = (1 << (1 << k)) - 1 if k else 1
    in_vals = masks[:len(gc.input_bits)]
    reg_vals = masks[len(gc.input_bits):]
    good = eval_full(gc, in_vals, reg_vals, ones)
    obs = gc.observation_points()
    consumers = gc.consumers()
    out = []
    for cls in space.classes:
        m = _class_detect_mask(gc, cls, good, ones, obs, consumers, space)
        if m:
            out.append(("testable", (m & -m).bit_length() - 1))
        else:
            out.append(("untestable", None))
    return out, space


def classify_testable(gc: GateCircuit, bit_cap=CLASSIFY_BIT_CAP):
    """Per fault class: 'testable' | 'untestable' | 'unclassified'."""
    pairs, space = testable_witnesses(gc, bit_cap)
    return [v for v, _w in pairs], space


def saf_fault_sim(c: ir.Circuit, tests, decomp="A", mode="concurrent",
                  gc=None, bit_cap=CLASSIFY_BIT_CAP) -> SafCoverage:
    """Detection of every collapsed fault class under each test program.

    Detection rule: a difference at any output-port bit or register-consumed
    bit during some macro-cycle, faults active for one combinational frame
    at a time (register state advances fault-free).
    """
    if gc is None:
        gc = expand(c, decomp)
    testability, space = classify_testable(gc, bit_cap=bit_cap)
    cov = SafCoverage(c.name, gc.decomp, fault_count=len(space.classes),
                      testability=testability)
    obs = gc.observation_points()
    consumers = gc.consumers()
    input_widths = {p.name: p.width for p in c.input_ports()}
    for prog in tests:
        check_program(c, prog)
        detected = set()
        if len(prog):
            if mode == "concurrent":
                good, ones = packed_good_env(gc, prog, input_widths)
                for cls in space.classes:
                    if _class_detect_mask(gc, cls, good, ones, obs, consumers,
                                          space):
                        detected.add(cls.index)
            elif mode == "serial":
                full, _ = packed_good_env(gc, prog, input_widths)
                for t in range(len(prog)):
                    good = [(v >> t) & 1 for v in full]
                    for cls in space.classes:
                        if cls.index in detected:
                            continue
                        if _class_detect_mask(gc, cls, good, 1, obs, consumers,
                                              space):
                            detected.add(cls.index)
            else:
                raise ValueError(f"unknown mode '{mode}'")
        cov.per_test[prog.name] = detected
        cov.cycles[prog.name] = len(prog)
    return cov


def compute_tcpn(tests, gc: GateCircuit) -> TcpnReport:
    """Test cycles per net: total macro-cycles over the expansion's
    bit-level net count, exact rational."""
    total = sum(len(p) for p in tests)
    nets = gc.net_count
    if nets <= 0:
        raise ValueError("expansion has no nets")
    return TcpnReport(total, nets, Fraction(total, nets))


def format_report(c: ir.Circuit, cov: SafCoverage, tcpn: TcpnReport,
                  faults=None) -> str:
    lines = [f"saf-report circuit={cov.circuit_name} decomp={cov.decomp}",
             f"classes {cov.fault_count}"]
    counts = {"testable": 0, "untestable": 0, "unclassified": 0}
    for t in cov.testability:
        counts[t] += 1
    lines.append("testable {testable} untestable {untestable} "
                 "unclassified {unclassified}".format(**counts))
    for name in cov.per_test:
        det = cov.per_test[name] & cov.testable_classes()
        lines.append(f"test {name} cycles={cov.cycles[name]} "
                     f"detected={len(det)}")
    pct = cov.coverage_percent()
    lines.append(f"coverage {pct:.2f}% of testable")
    missed = cov.missed_testable()
    for idx in missed:
        lines.append(f"missed class {idx}")
    lines.append(f"tcpn {tcpn.total_cycles}/{tcpn.net_count} = "
                 f"{float(tcpn.tcpn):.6f}")
    return "\n".join(lines) + "\n"
