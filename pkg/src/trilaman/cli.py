"""Command-line frontend.

Exit codes: 0 pass, 1 check failure, 2 usage or parse error, 3 numerical
failure, 4 inconclusive (degenerate orbit).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    basin_monte_carlo,
    enumerate_target_orbits,
    stability_census,
    verify_morse_bott,
    verify_reduction_formula,
)
from .dynamics import IntegrationError, find_line_equilibria, integrate, line_orderings, refine_equilibrium
from .formats import (
    ParseError,
    RunManifest,
    Scenario,
    distance_error_rows,
    dumps,
    read_configuration,
    read_scenario,
    write_configuration,
    write_graph_spec,
    write_rows,
    write_trajectory,
)
from .geometry import DomainError, check_admissible, edge_lengths, is_line_configuration
from .graph import build_graph, random_steps, validate_targets
from .laws import check_C1, check_C2, law_from_name
from .partition import independent_partition
from .spectral import OrbitType, classify_orbit
from .system import residual

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4

# orderings examined exhaustively up to this many agents, sampled beyond it
EXHAUSTIVE_ORDERINGS = 6
SAMPLED_ORDERINGS = 200


class Run:
    """Collects report lines and output files; everything is written by one writer at the end."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.report: dict = {"command": args.command, "version": __version__}
        self.files: dict[str, str] = {}
        self.lines: list[tuple[str, object]] = []

    def say(self, key, value):
        self.lines.append((key, value))

    def add_file(self, name, text):
        self.files[name] = text

    def finish(self, code: int, scenario: Scenario | None = None) -> int:
        self.report["exit_code"] = code
        fmt = getattr(self.args, "format", "text")
        for key, value in self.lines:
            print(f"{key},{value}" if fmt == "rows" else f"{key}: {value}")
        out = getattr(self.args, "out_dir", None)
        if out:
            out = Path(out)
            out.mkdir(parents=True, exist_ok=True)
            self.files.setdefault("report.json", dumps(self.report))
            manifest = RunManifest(
                scenario.digest() if scenario is not None else "",
                int(self.args.seed) if getattr(self.args, "seed", None) is not None else
                (scenario.seed if scenario is not None else 0),
                self.argv,
                list(self.files),
            )
            self.files["manifest.json"] = dumps(manifest.to_dict())
            for name in sorted(self.files):
                (out / name).write_text(self.files[name])
        return code


def _seed(args, scenario: Scenario | None) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    return scenario.seed if scenario is not None else 0


def _tol(args, scenario: Scenario) -> float:
    return float(args.tol) if getattr(args, "tol", None) is not None else scenario.refine_tol


def _read_config(path, n):
    path = Path(path)
    return read_configuration(path.read_text(), n, str(path))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_generate(args, run: Run) -> int:
    if args.n < 2:
        run.say("error", "N must be at least 2")
        return EXIT_USAGE
    rng = np.random.default_rng(_seed(args, None))
    graph = build_graph(random_steps(args.n, rng))
    text = write_graph_spec(graph)
    run.add_file("graph.txt", text)
    run.report.update(n=graph.vertex_count, edges=[list(e) for e in graph.edges])
    if not args.out_dir:
        sys.stdout.write(text)
    else:
        run.say("vertices", graph.vertex_count)
        run.say("edges", len(graph.edges))
    return EXIT_PASS


def _validation_checks(scenario: Scenario) -> list[tuple[str, bool, str]]:
    checks = []
    bad = validate_targets(scenario.graph, scenario.targets)
    detail = "; ".join(f"3-cycle {c} violates the strict triangle inequalities" for c in bad)
    checks.append(("targets", not bad, detail or "all 3-cycles nondegenerate"))
    seen = set()
    for fam, t in scenario.edges.values():
        if (fam, t) in seen:
            continue
        seen.add((fam, t))
        law = law_from_name(fam, t)
        c1 = check_C1(law)
        c2 = check_C2(law)
        note = f"{c1.zero_crossings} zero crossing(s)"
        if c1.flagged:
            note += f", (x f)' <= 0 at {len(c1.flagged)} grid points from {min(c1.flagged):.4g}"
        checks.append((f"law C1 {fam}(target={t:g})", c1.c1_ok, note))
        checks.append((f"law C2 {fam}(target={t:g})", c2.verdict, "tail integral diverges" if c2.verdict
                       else "tail integral appears bounded"))
    return checks


def _emit_checks(run: Run, checks) -> int:
    failed = [name for name, ok, _ in checks if not ok]
    run.report["checks"] = [{"name": n, "pass": ok, "detail": d} for n, ok, d in checks]
    for name, ok, detail in checks:
        run.say(name, f"{'pass' if ok else 'FAIL'} ({detail})")
    if failed:
        run.say("failed", ", ".join(failed))
        return EXIT_FAIL
    return EXIT_PASS


def cmd_validate(args, run: Run, scenario: Scenario) -> int:
    return _emit_checks(run, _validation_checks(scenario))


def cmd_simulate(args, run: Run, scenario: Scenario) -> int:
    system = scenario.system()
    if args.initial:
        p0 = _read_config(args.initial, system.n)
    else:
        rng = np.random.default_rng(_seed(args, scenario))
        side = 4.0 * max(scenario.targets.values())
        p0 = rng.uniform(-side / 2, side / 2, size=(system.n, 2))
    try:
        check_admissible(system.graph, p0)
    except DomainError as exc:
        run.say("error", f"initial configuration rejected: {exc}")
        return EXIT_USAGE
    try:
        traj = integrate(system, p0, controls=scenario.controls)
    except IntegrationError as exc:
        run.say("error", str(exc))
        if exc.trajectory is not None:
            run.add_file("trajectory.csv", write_trajectory(exc.trajectory))
        return EXIT_NUMERIC
    run.add_file("trajectory.csv", write_trajectory(traj))
    header, rows = distance_error_rows(system, traj)
    run.add_file("distance_errors.csv", write_rows(header, rows))
    rec = refine_equilibrium(system, traj.final, _tol(args, scenario))
    run.add_file("equilibrium.txt", write_configuration(rec.configuration))
    targets = np.array([system.laws[e].target for e in system.graph.edges])
    err = float(np.max(np.abs(edge_lengths(system.graph, rec.configuration) - targets)))
    run.report.update(snapshots=len(traj.times), converged=traj.converged, refined=rec.converged,
                      residual=rec.residual, max_distance_error=err,
                      final_time=float(traj.times[-1]), min_edge_length=traj.min_edge_length)
    run.say("snapshots", len(traj.times))
    run.say("flow converged", traj.converged)
    run.say("final time", f"{traj.times[-1]:.6g}")
    run.say("refined residual", f"{rec.residual:.3e}")
    run.say("max |d - target|", f"{err:.3e}")
    if not traj.converged or not rec.converged:
        run.say("error", "no equilibrium reached within the horizon" if not traj.converged
                else "refinement failed")
        return EXIT_NUMERIC
    return EXIT_PASS


def _orderings(n, seed):
    if n <= EXHAUSTIVE_ORDERINGS:
        return list(line_orderings(n))
    rng = np.random.default_rng(seed)
    out = set()
    while len(out) < SAMPLED_ORDERINGS:
        perm = tuple(int(v) for v in rng.permutation(n) + 1)
        out.add(perm if perm[0] < perm[-1] else perm[::-1])
    return sorted(out)


def _line_equilibria(system, tol, seed):
    found = []
    for order in _orderings(system.n, seed):
        for rec in find_line_equilibria(system, order, tol):
            found.append((order, rec))
    return found


def _describe(system, p, zero_tol=None):
    c = classify_orbit(system, p, zero_tol)
    return {
        "kind": c.kind.value,
        "signature": list(c.signature.as_tuple()),
        "eigenvalues": c.eigenvalues,
    }, c


def cmd_equilibria(args, run: Run, scenario: Scenario) -> int:
    system = scenario.system()
    found = _line_equilibria(system, _tol(args, scenario), _seed(args, scenario))
    entries, bad = [], 0
    for order, rec in found:
        desc, c = _describe(system, rec.configuration)
        if c.kind == OrbitType.STABLE:
            bad += 1
        entries.append({"ordering": list(order), "configuration": rec.configuration,
                        "residual": rec.residual, **desc})
        run.say(f"line {'-'.join(map(str, order))}",
                f"{c.kind.value} signature {c.signature}")
    run.report["equilibria"] = entries
    run.add_file("equilibria.json", dumps(entries))
    run.say("line equilibria", len(entries))
    if bad:
        run.say("failed", f"{bad} line equilibria classified stable")
        return EXIT_FAIL
    return EXIT_PASS


def cmd_partition(args, run: Run, scenario: Scenario) -> int:
    p = _read_config(args.config, scenario.graph.vertex_count)
    part = independent_partition(scenario.graph, p, scenario.collinearity_tol)
    blocks = [{"edges": [list(e) for e in b.edges], "vertices": list(b.vertices)} for b in part.blocks]
    run.report.update(blocks=blocks, fragile_steps=list(part.fragile))
    for i, b in enumerate(part.blocks):
        run.say(f"block {i}", " ".join(f"{a}-{c}" for a, c in b.edges))
    if part.fragile:
        run.say("fragile steps", " ".join(map(str, part.fragile)))
    return EXIT_PASS


def cmd_spectrum(args, run: Run, scenario: Scenario) -> int:
    system = scenario.system()
    p = _read_config(args.config, system.n)
    tol = _tol(args, scenario)
    try:
        check_admissible(system.graph, p)
    except DomainError as exc:
        run.say("error", str(exc))
        return EXIT_USAGE
    if residual(system, p) > tol:
        rec = refine_equilibrium(system, p, tol)
        if not rec.converged:
            run.say("error", f"not an equilibrium and refinement failed (residual {rec.residual:.3e})")
            return EXIT_NUMERIC
        p = rec.configuration
        run.say("refined", "yes")
    desc, c = _describe(system, p)
    mb = verify_morse_bott(system, p, scenario.collinearity_tol)
    run.report.update(residual=residual(system, p), configuration=p, **desc,
                      blocks=[[list(e) for e in edges] for edges in mb.block_edges],
                      block_signatures=[list(s.as_tuple()) for s in mb.block_signatures],
                      index_formula={"holds": mb.holds, "minus_sum": mb.minus_sum,
                                     "plus_sum": mb.plus_sum, "inconclusive": mb.inconclusive})
    run.add_file("eigenvalues.csv", write_rows(["k", "eigenvalue"], list(enumerate(c.eigenvalues))))
    run.say("classification", c.kind.value)
    run.say("signature", str(c.signature))
    run.say("blocks", len(mb.block_edges))
    run.say("index formula", "holds" if mb.holds else "FAILS")
    if c.kind == OrbitType.DEGENERATE or mb.inconclusive:
        run.say("verdict", "inconclusive (degenerate orbit)")
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if mb.holds else EXIT_FAIL


def cmd_enumerate(args, run: Run, scenario: Scenario) -> int:
    system = scenario.system()
    catalog = enumerate_target_orbits(system.graph, system.targets)
    census = stability_census(system, catalog.configurations, scenario.collinearity_tol)
    run.report.update(count=len(catalog), sign_words=catalog.sign_words,
                      configurations=catalog.configurations,
                      census=[{"strongly_rigid": r, "kind": k, "signature": list(s.as_tuple())}
                              for r, k, s in census.rows])
    for w, c in zip(catalog.sign_words, catalog.configurations):
        run.add_file(f"target_{w.replace('+', 'p').replace('-', 'm') or 'base'}.txt",
                     write_configuration(c))
    run.say("target orbits", len(catalog))
    run.say("expected", 2 ** (system.n - 2))
    stable = sum(k == OrbitType.STABLE.value for _, k, _ in census.rows)
    run.say("stable", stable)
    return EXIT_PASS


def cmd_basin(args, run: Run, scenario: Scenario) -> int:
    system = scenario.system()
    trials = args.trials or scenario.trials
    seed = _seed(args, scenario)
    report = basin_monte_carlo(system, trials, seed, controls=scenario.controls, workers=args.workers)
    run.report.update(trials=trials, seed=seed, hits=report.hits, non_target=report.non_target,
                      failures=report.failures, target_fraction=report.target_fraction)
    run.say("trials", trials)
    run.say("target fraction", f"{report.target_fraction:.4f}")
    run.say("non-target", report.non_target)
    run.say("failures", report.failures)
    return EXIT_PASS


def cmd_verify(args, run: Run, scenario: Scenario) -> int:
    system = scenario.system()
    checks = _validation_checks(scenario)
    if not all(ok for _, ok, _ in checks):
        return _emit_checks(run, checks)
    tol = _tol(args, scenario)
    n = system.n

    catalog = enumerate_target_orbits(system.graph, system.targets)
    expected = 2 ** (n - 2)
    checks.append(("catalog", len(catalog) == expected, f"{len(catalog)} orbits, expected {expected}"))

    census = stability_census(system, catalog.configurations, scenario.collinearity_tol)
    all_stable = all(k == OrbitType.STABLE.value for _, k, _ in census.rows)
    checks.append(("census", all_stable and census.consistent,
                   f"{sum(k == OrbitType.STABLE.value for _, k, _ in census.rows)}/{len(catalog)} stable"))

    eig_rows = []
    line = _line_equilibria(system, tol, _seed(args, scenario))
    unstable, degenerate = 0, 0
    for _, rec in line:
        c = classify_orbit(system, rec.configuration)
        if c.kind == OrbitType.DEGENERATE:
            degenerate += 1
        elif c.coindex >= 1:
            unstable += 1
    nondeg = len(line) - degenerate
    checks.append(("line equilibria", unstable == nondeg,
                   f"{unstable}/{nondeg} nondegenerate line equilibria unstable, {degenerate} degenerate"))

    mb_total, mb_ok, red_total, red_ok = 0, 0, 0, 0
    for label, p in ([(f"target {w}", c) for w, c in zip(catalog.sign_words, catalog.configurations)]
                     + [(f"line {'-'.join(map(str, o))}", r.configuration) for o, r in line]):
        c = classify_orbit(system, p)
        eig_rows += [(len(eig_rows), i, ev) for i, ev in enumerate(c.eigenvalues)]
        if c.kind == OrbitType.DEGENERATE:
            continue
        rep = verify_morse_bott(system, p, scenario.collinearity_tol)
        mb_total += 1
        mb_ok += rep.holds
        if n >= 3 and is_line_configuration(p):
            red = verify_reduction_formula(system, p)
            red_total += 1
            red_ok += red.holds and red.congruence_ok()
    checks.append(("index formula", mb_ok == mb_total, f"{mb_ok}/{mb_total} equilibria"))
    checks.append(("reduction formula", red_ok == red_total, f"{red_ok}/{red_total} line equilibria"))

    trials = args.trials or scenario.trials
    seed = _seed(args, scenario)
    basin = basin_monte_carlo(system, trials, seed, controls=scenario.controls,
                              catalog=catalog, workers=args.workers)
    tight = sum(o.status == "target" and o.max_distance_error < 1e-5 for o in basin.outcomes)
    frac = tight / trials
    checks.append(("basin", frac >= args.basin_threshold,
                   f"{tight}/{trials} trials reached a target orbit (threshold {args.basin_threshold:g})"))
    run.add_file("eigenvalues.csv", write_rows(["equilibrium", "k", "eigenvalue"], eig_rows))
    code = _emit_checks(run, checks)
    run.say("verdict", "pass" if code == EXIT_PASS else "FAIL")
    return code


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trilaman", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--format", choices=("text", "rows"), default="text")
    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--scenario", required=True)
    scen.add_argument("--tol", type=float, default=None, help="equilibrium refinement tolerance")

    sub = parser.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", parents=[common], help="random triangulated Laman graph")
    g.add_argument("--n", type=int, required=True)
    sub.add_parser("validate", parents=[common, scen], help="check targets and laws")
    s = sub.add_parser("simulate", parents=[common, scen], help="integrate the flow and refine")
    s.add_argument("--initial", default=None, help="initial configuration file")
    sub.add_parser("equilibria", parents=[common, scen], help="search line equilibria")
    helps = {"partition": "independent partition of a configuration",
             "spectrum": "Hessian signature and orbit class", "analyze": "alias of spectrum"}
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common, scen], help=text)
        p.add_argument("--config", required=True, help="configuration file")
    sub.add_parser("enumerate", parents=[common, scen], help="target orbit catalog")
    for name, text in (("basin", "Monte Carlo basin estimate"), ("verify", "run every check in turn")):
        p = sub.add_parser(name, parents=[common, scen], help=text)
        p.add_argument("--trials", type=int, default=None, help="defaults to the scenario's trials")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        if name == "verify":
            p.add_argument("--basin-threshold", type=float, default=0.97)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "partition": cmd_partition,
    "spectrum": cmd_spectrum,
    "analyze": cmd_spectrum,
    "enumerate": cmd_enumerate,
    "basin": cmd_basin,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = Run(args, argv)
    if args.command == "generate":
        return run.finish(cmd_generate(args, run))
    try:
        scenario = read_scenario(args.scenario)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        code = COMMANDS[args.command](args, run, scenario)
    except (ParseError, OSError) as exc:
        run.say("error", str(exc))
        code = EXIT_USAGE
    except (DomainError, FloatingPointError, np.linalg.LinAlgError, IntegrationError) as exc:
        run.say("error", f"numerical failure: {exc}")
        code = EXIT_NUMERIC
    except ValueError as exc:
        run.say("error", str(exc))
        code = EXIT_FAIL
    return run.finish(code, scenario)
