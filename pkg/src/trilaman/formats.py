"""Plain-text file formats: graph specs, configurations, trajectories, scenarios, reports."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import Controls, Trajectory
from .geometry import COLLINEARITY_TOL, RANK_TOL
from .graph import HennebergError, TriangulatedLamanGraph, build_graph, edge_key, random_steps, random_targets
from .laws import FAMILIES, law_from_name
from .system import FormationSystem


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = ""):
        where = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(where + message)
        self.line = line


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


# graph spec: "N" then one "v j k" line per vertex-add step

def write_graph_spec(graph: TriangulatedLamanGraph) -> str:
    lines = ["# triangulated Laman graph: vertex count, then steps 'v j k'", str(graph.vertex_count)]
    lines += [f"{v} {j} {k}" for v, j, k in graph.to_spec()]
    return "\n".join(lines) + "\n"


def read_graph_spec(text: str, source: str = "<graph>") -> TriangulatedLamanGraph:
    rows = list(_content_lines(text))
    if not rows:
        raise ParseError("empty graph spec", None, source)
    lineno, first = rows[0]
    try:
        n = int(first)
    except ValueError:
        raise ParseError(f"expected vertex count, got {first!r}", lineno, source) from None
    steps = []
    for lineno, line in rows[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'v j k', got {line!r}", lineno, source)
        try:
            steps.append(tuple(int(x) for x in parts))
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", lineno, source) from None
    try:
        graph = build_graph(steps)
    except HennebergError as exc:
        line = rows[exc.position][0] if exc.position is not None else None
        raise ParseError(str(exc), line, source) from None
    if graph.vertex_count != n:
        raise ParseError(f"header says {n} vertices but steps build {graph.vertex_count}", rows[0][0], source)
    return graph


# configuration: one "x y" line per agent

def write_configuration(p) -> str:
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    return "".join(f"{_num(x)} {_num(y)}\n" for x, y in p)


def read_configuration(text: str, n: int | None = None, source: str = "<configuration>") -> np.ndarray:
    pts = []
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'x y', got {line!r}", lineno, source)
        try:
            pts.append([float(parts[0]), float(parts[1])])
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {line!r}", lineno, source) from None
        if not np.all(np.isfinite(pts[-1])):
            raise ParseError(f"non-finite coordinate in {line!r}", lineno, source)
    if n is not None and len(pts) != n:
        raise ParseError(f"expected {n} points, found {len(pts)}", None, source)
    return np.array(pts, dtype=float).reshape(-1, 2)


# trajectory rows

def trajectory_header(n: int) -> list[str]:
    coords = [c for i in range(1, n + 1) for c in (f"x{i}", f"y{i}")]
    return ["t", *coords, "phi", "grad_inf"]


def write_rows(header, rows) -> str:
    out = [",".join(header)]
    out += [",".join(_num(v) for v in row) for row in rows]
    return "\n".join(out) + "\n"


def read_rows(text: str, source: str = "<rows>") -> tuple[list[str], np.ndarray]:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty table", None, source)
    header = lines[0].split(",")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(parts)}", lineno, source)
        try:
            rows.append([float(x) for x in parts])
        except ValueError:
            raise ParseError("non-numeric field", lineno, source) from None
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def write_trajectory(traj: Trajectory) -> str:
    return write_rows(trajectory_header(traj.states.shape[1]), traj.rows())


def distance_error_rows(system: FormationSystem, traj: Trajectory):
    header = ["t"] + [f"e{i}_{j}" for i, j in system.graph.edges]
    targets = np.array([system.laws[e].target for e in system.graph.edges])
    rows = []
    for t, s in zip(traj.times, traj.states):
        _, d, _ = system.edge_terms(s)
        rows.append([t, *(d - targets)])
    return header, rows


# scenarios

@dataclass
class Scenario:
    graph: TriangulatedLamanGraph
    edges: dict  # edge -> (family name, target)
    controls: Controls = field(default_factory=Controls)
    refine_tol: float = 1e-10
    collinearity_tol: float = COLLINEARITY_TOL
    rank_tol: float = RANK_TOL
    orbit_radius: float = 1e-4
    seed: int = 0
    trials: int = 100

    def system(self) -> FormationSystem:
        laws = {e: law_from_name(fam, t) for e, (fam, t) in self.edges.items()}
        return FormationSystem(self.graph, laws)

    @property
    def targets(self) -> dict:
        return {e: t for e, (_, t) in self.edges.items()}

    def to_dict(self) -> dict:
        c = self.controls
        return {
            "graph": {"steps": [list(s) for s in self.graph.to_spec()]},
            "laws": {"edges": [
                {"edge": list(e), "family": fam, "target": t}
                for e, (fam, t) in sorted(self.edges.items())
            ]},
            "integrator": {
                "horizon": c.horizon, "sample_interval": c.sample_interval,
                "rtol": c.rtol, "atol": c.atol, "equilibrium_tol": c.equilibrium_tol,
            },
            "tolerances": {
                "refine": self.refine_tol, "collinearity": self.collinearity_tol,
                "rank": self.rank_tol, "orbit": self.orbit_radius,
            },
            "seed": self.seed,
            "trials": self.trials,
        }

    def digest(self) -> str:
        return hashlib.sha256(dumps(self.to_dict()).encode()).hexdigest()


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_scenario(s: Scenario) -> str:
    return dumps(s.to_dict())


def scenario_from_dict(doc: dict, base: Path | None = None, source: str = "<scenario>") -> Scenario:
    try:
        seed = int(doc.get("seed", 0))
        gdoc = doc["graph"]
        if "steps" in gdoc:
            graph = build_graph(gdoc["steps"])
        elif "file" in gdoc:
            path = Path(gdoc["file"])
            if base is not None and not path.is_absolute():
                path = base / path
            graph = read_graph_spec(path.read_text(), str(path))
        elif "n" in gdoc:
            rng = np.random.default_rng(int(gdoc.get("seed", seed)))
            graph = build_graph(random_steps(int(gdoc["n"]), rng))
        else:
            raise ParseError("graph needs 'steps', 'file' or 'n'", None, source)

        ldoc = doc.get("laws", {})
        family = ldoc.get("family", "standard")
        default = ldoc.get("target", 1.0)
        edges = {}
        if default == "generic":
            rng = np.random.default_rng(int(ldoc.get("seed", seed)))
            for e, t in random_targets(graph, rng).items():
                edges[e] = (family, t)
        else:
            for e in graph.edges:
                edges[e] = (family, float(default))
        for item in ldoc.get("edges", []):
            e = edge_key(*item["edge"])
            if e not in edges:
                raise ParseError(f"edge {e} is not in the graph", None, source)
            fam = item.get("family", family)
            edges[e] = (fam, float(item.get("target", edges[e][1])))
        for fam, _ in edges.values():
            if fam not in FAMILIES:
                raise ParseError(f"unknown law family {fam!r}", None, source)

        idoc = doc.get("integrator", {})
        base_c = Controls()
        controls = Controls(**{k: float(idoc.get(k, getattr(base_c, k))) for k in
                               ("horizon", "sample_interval", "rtol", "atol", "equilibrium_tol")})
        tdoc = doc.get("tolerances", {})
        return Scenario(
            graph=graph,
            edges=edges,
            controls=controls,
            refine_tol=float(tdoc.get("refine", 1e-10)),
            collinearity_tol=float(tdoc.get("collinearity", COLLINEARITY_TOL)),
            rank_tol=float(tdoc.get("rank", RANK_TOL)),
            orbit_radius=float(tdoc.get("orbit", 1e-4)),
            seed=seed,
            trials=int(doc.get("trials", 100)),
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid scenario: {exc}", None, source) from None


def read_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, str(path)) from None
    return scenario_from_dict(doc, path.parent, str(path))


@dataclass
class RunManifest:
    scenario_digest: str
    seed: int
    command: list[str]
    outputs: list[str]
    version: str = __version__

    def to_dict(self):
        return {
            "scenario_digest": self.scenario_digest,
            "version": self.version,
            "seed": self.seed,
            "command": self.command,
            "outputs": sorted(self.outputs),
        }
