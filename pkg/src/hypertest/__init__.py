"""hypertest: netlist transforms for interleaved multithreading, SEU
detection/recovery simulation, and RTL-level fault coverage tooling with a
gate-level stuck-at oracle."""

__version__ = "0.1.0"

from .ir import (  # noqa: F401
    Circuit, Port, StorageElement, GateInstance, Diagnostic, CircuitError,
    parse_circuit, try_parse, validate, levelize, print_circuit,
)
from .funcsim import (  # noqa: F401
    VectorProgram, VectorCycle, Trace, TraceCycle, SimState,
    parse_program, print_program, simulate, step_macro_cycle,
)
from .gatelevel import GateCircuit, expand  # noqa: F401
from .shp import (  # noqa: F401
    ShpCircuit, TransformError, barrel_transform, cslow_transform,
    shp_transform, check_path_crossings, print_shp, parse_shp,
)
from .shpsim import (  # noqa: F401
    IDLE, Schedule, TcConfig, SeuEvent, RedundancyReport, ScheduleError,
    SeuError, favg, parse_injections, parse_schedule, run_redundant, run_shp,
    check_noninterference,
)
from .gif import (  # noqa: F401
    GifItem, GifUniverse, CoverageSet, UniverseError, enumerate_gifs,
    gif_fault_sim, classify_universe, classify_coverable, uncovered,
)
from .saf import (  # noqa: F401
    Saf, SafCoverage, TcpnReport, enumerate_safs, saf_fault_sim,
    classify_testable, compute_tcpn,
)
from .covdb import (  # noqa: F401
    CoverageDb, DbError, HierNode, merge, parse_db, print_db, read_db,
    write_db, report_hierarchy,
)
