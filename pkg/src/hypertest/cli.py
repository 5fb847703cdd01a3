"""Command-line interface: parse, transform, simulate, fault-simulate,
coverage database management and the viewer backend.

Exit codes: 0 success, 1 diagnosed input problem, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import api, covdb, funcsim, gatelevel, gif, ir, saf, shp, shpsim


class CliError(Exception):
    pass


def _read(path):
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}") from None


def _load_circuit(path):
    c, diags = ir.try_parse(_read(path))
    if c is None:
        raise CliError("\n".join(f"{path}:{d}" for d in diags))
    return c


def _load_tests(directory):
    try:
        names = sorted(n for n in os.listdir(directory) if n.endswith(".vec"))
    except OSError as e:
        raise CliError(f"cannot list {directory}: {e}") from None
    if not names:
        raise CliError(f"no .vec files in {directory}")
    tests = []
    for n in names:
        text = _read(os.path.join(directory, n))
        tests.append(funcsim.parse_program(text, name=os.path.splitext(n)[0]))
    return tests


# -- subcommands -------------------------------------------------------------

def cmd_parse(args):
    c, diags = ir.try_parse(_read(args.circuit))
    if c is None:
        for d in diags:
            print(f"{args.circuit}:{d}")
        return 1
    print(f"circuit {c.name}: {len(c.ports)} ports, {len(c.nets)} nets, "
          f"{len(c.registers)} registers, {len(c.gates)} gates")
    if args.print:
        sys.stdout.write(ir.print_circuit(c))
    return 0


def cmd_transform(args):
    c = _load_circuit(args.circuit)
    s = shp.shp_transform(c, args.csr, args.barrel)
    text = shp.print_shp(s)
    with open(args.out, "w") as f:
        f.write(text)
    banks = s.cut_live_nets()
    print(f"wrote {args.out}: C={s.stage_count} D={s.depth} "
          f"gates={len(c.gates)} cr-banks={len(banks)} "
          f"cr-bits={s.cr_bit_count()}")
    for b, bank in enumerate(banks):
        slots = " ".join(
            f"{i}:{name}.d[{c.nets[name]}]" if kind == "regd"
            else f"{i}:{name}[{c.nets[name]}]"
            for i, (kind, name) in enumerate(bank))
        print(f"cr bank {b}: {slots}")
    return 0


def cmd_sim(args):
    c = _load_circuit(args.circuit)
    prog = funcsim.parse_program(_read(args.prog),
                                 name=os.path.basename(args.prog))
    trace = funcsim.simulate(c, prog)
    text = funcsim.format_trace(trace)
    if args.trace:
        with open(args.trace, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if trace.mismatch_count:
        print(f"{trace.mismatch_count} expectation mismatches")
        return 1
    return 0


def _parse_thread_prog(tok):
    if "=" not in tok:
        raise CliError(f"--prog expects t<idx>=<file.vec>, got '{tok}'")
    t, path = tok.split("=", 1)
    if not t.startswith("t"):
        raise CliError(f"thread spec must look like t0=..., got '{tok}'")
    return int(t[1:]), path


def cmd_shpsim(args):
    s = shp.parse_shp(_read(args.shp))
    if args.redundant:
        if len(args.prog) != 1 or "=" in args.prog[0]:
            raise CliError("redundant mode takes exactly one --prog <file.vec>")
        prog = funcsim.parse_program(_read(args.prog[0]),
                                     name=os.path.basename(args.prog[0]))
        threads = tuple(int(x) for x in args.threads.split(",")) if args.threads \
            else tuple(range(args.redundant))
        tc = shpsim.TcConfig(args.redundant, threads, args.compare_latency,
                             args.alt_banks)
        injections = shpsim.parse_injections(_read(args.inject)) if args.inject else ()
        trace, report = shpsim.run_redundant(s, tc, prog, injections)
        sys.stdout.write(funcsim.format_trace(trace))
        for micro, threads_ in report.detections:
            print(f"detect micro={micro} threads={','.join(map(str, threads_))}")
        for micro, replaced, donor in report.recoveries:
            print(f"recover micro={micro} replaced={replaced} donor={donor}")
        print(f"repeated_cycles {report.repeated_cycles}")
        print(f"unrecoverable {str(report.unrecoverable).lower()}")
        print(f"final_equivalent {str(report.final_equivalent).lower()}")
        return 1 if report.unrecoverable else 0
    sched = shpsim.parse_schedule(_read(args.sched)) if args.sched else \
        shpsim.Schedule(tuple(range(s.depth)), repeat=True)
    programs = {}
    for tok in args.prog:
        t, path = _parse_thread_prog(tok)
        programs[t] = funcsim.parse_program(_read(path), name=os.path.basename(path))
    traces = shpsim.run_shp(s, sched, programs)
    for t in sorted(traces):
        sys.stdout.write(f"thread {t}\n")
        sys.stdout.write(funcsim.format_trace(traces[t]))
    return 0


def cmd_gifsim(args):
    c = _load_circuit(args.circuit)
    tests = _load_tests(args.tests)
    u = gif.enumerate_gifs(c, args.mode, args.model.upper())
    covs = gif.gif_fault_sim(c, tests, u)
    db = covdb.from_coverage(c.name, args.mode, args.model.upper(),
                             [covs[t.name] for t in tests])
    covdb.write_db(db, args.out, item_count=len(u.items))
    acc = db.accumulated()
    n = bin(acc).count("1")
    print(f"wrote {args.out}: {len(tests)} tests, {n}/{len(u.items)} items covered")
    return 0


def cmd_safsim(args):
    c = _load_circuit(args.circuit)
    tests = _load_tests(args.tests)
    gc = gatelevel.expand(c, args.decomp)
    cov = saf.saf_fault_sim(c, tests, gc=gc)
    tr = saf.compute_tcpn(tests, gc)
    text = saf.format_report(c, cov, tr)
    if args.report:
        with open(args.report, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_merge(args):
    dbs = [covdb.read_db(p) for p in args.inputs]
    merged = covdb.merge(dbs)
    covdb.write_db(merged, args.out)
    print(f"wrote {args.out}: {len(merged.tests)} tests")
    return 0


def cmd_report(args):
    db = covdb.read_db(args.db)
    c = _load_circuit(args.circuit)
    u = gif.enumerate_gifs(c, db.mode, db.model)
    if u.universe_hash != db.universe_hash:
        raise CliError("database was built for a different circuit/universe "
                       f"(hash {db.universe_hash} != {u.universe_hash})")
    names = db.test_names() if args.tests in (None, "all") else \
        [n for n in args.tests.split(",") if n]
    root = covdb.report_hierarchy(db, names, u)
    sys.stdout.write(covdb.format_hierarchy(root))
    return 0


def cmd_tcpn(args):
    c = _load_circuit(args.circuit)
    tests = _load_tests(args.tests)
    gc = gatelevel.expand(c, args.decomp)
    rep = saf.compute_tcpn(tests, gc)
    print(f"cycles {rep.total_cycles}")
    print(f"nets {rep.net_count}")
    print(f"tcpn {rep.tcpn} = {float(rep.tcpn):.6f}")
    return 0


def cmd_serve(args):
    db = covdb.read_db(args.db)
    c = _load_circuit(args.circuit)
    u = gif.enumerate_gifs(c, db.mode, db.model)
    if u.universe_hash != db.universe_hash:
        raise CliError("database/universe hash mismatch")
    ui = args.ui
    if ui is None:
        default_ui = os.path.join(os.getcwd(), "frontend", "dist")
        ui = default_ui if os.path.isdir(default_ui) else None
    print(f"serving coverage db on http://127.0.0.1:{args.port}/ "
          f"(ui: {ui or 'api only'})")
    api.serve_api(db, u, args.port, ui_dir=ui)
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="hypertest",
        description="netlist transforms, micro-cycle simulation with upset "
                    "recovery, fault universes and coverage databases")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("parse", help="parse and validate a .ckt netlist")
    q.add_argument("circuit")
    q.add_argument("--print", action="store_true", help="echo canonical form")
    q.set_defaults(func=cmd_parse)

    q = sub.add_parser("transform", help="apply stage slicing and thread memories")
    q.add_argument("circuit")
    q.add_argument("--csr", type=int, default=1, metavar="C",
                   help="pipeline stage count")
    q.add_argument("--barrel", type=int, default=None, metavar="D",
                   help="thread memory depth (default: C)")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_transform)

    q = sub.add_parser("sim", help="macro-cycle functional simulation")
    q.add_argument("circuit")
    q.add_argument("--prog", required=True, help=".vec program")
    q.add_argument("--trace", help="write trace to file instead of stdout")
    q.set_defaults(func=cmd_sim)

    q = sub.add_parser("shpsim", help="micro-cycle simulation of a .shp model")
    q.add_argument("shp")
    q.add_argument("--sched", help=".sched schedule file")
    q.add_argument("--prog", action="append", default=[],
                   help="t<idx>=<file.vec> (plain file in redundant mode)")
    q.add_argument("--redundant", type=int, metavar="R")
    q.add_argument("--threads", help="comma list of redundant thread slots")
    q.add_argument("--inject", help=".seu injection file")
    q.add_argument("--compare-latency", type=int, default=1, metavar="L")
    q.add_argument("--alt-banks", action="store_true")
    q.set_defaults(func=cmd_shpsim)

    q = sub.add_parser("gifsim", help="inherent-fault coverage of functional tests")
    q.add_argument("circuit")
    q.add_argument("--tests", required=True, help="directory of .vec files")
    q.add_argument("--mode", default="site", choices=list(gif.MODES))
    q.add_argument("--model", default="po", choices=["go", "po", "GO", "PO"])
    q.add_argument("--out", required=True, help="output .gcdb")
    q.set_defaults(func=cmd_gifsim)

    q = sub.add_parser("safsim", help="gate-level stuck-at oracle")
    q.add_argument("circuit")
    q.add_argument("--decomp", default="A", choices=["A", "B"])
    q.add_argument("--tests", required=True)
    q.add_argument("--report", help="write report to file")
    q.set_defaults(func=cmd_safsim)

    q = sub.add_parser("merge", help="merge coverage databases")
    q.add_argument("inputs", nargs="+")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_merge)

    q = sub.add_parser("report", help="hierarchical coverage rollup")
    q.add_argument("db")
    q.add_argument("--circuit", required=True)
    q.add_argument("--tests", help="comma list or 'all' (default)")
    q.set_defaults(func=cmd_report)

    q = sub.add_parser("tcpn", help="test cycles per net")
    q.add_argument("circuit")
    q.add_argument("--tests", required=True)
    q.add_argument("--decomp", default="A", choices=["A", "B"])
    q.set_defaults(func=cmd_tcpn)

    q = sub.add_parser("serve", help="read-only HTTP API and viewer")
    q.add_argument("db")
    q.add_argument("--circuit", required=True)
    q.add_argument("--port", type=int, default=8321)
    q.add_argument("--ui", help="static viewer directory")
    q.set_defaults(func=cmd_serve)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "transform" and args.barrel is None:
        args.barrel = args.csr
    try:
        return args.func(args)
    except (CliError, ir.CircuitError, shp.TransformError, covdb.DbError,
            gif.UniverseError, shpsim.ScheduleError, shpsim.SeuError,
            funcsim.ProgramError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
