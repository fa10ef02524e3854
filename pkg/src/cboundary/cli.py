"""Command line entry point: ``cboundary check|run|paper|oracle``.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 invalid input,
3 internal error.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import click
import numpy as np

from . import scenarios
from .boundary import boundary_report, make_line, pair_from_symmetrized_point, verify_line
from .busemann import CONV_TOL, ProbeSet, busemann_eval
from .chronology import CHRON_TOL, CurveSample, batch_chronology, verdicts_to_csv
from .completion import TAIL_TOL, classify_boundary, classes_to_json
from .config import Scenario, ScenarioError, dump_scenario, parse_scenario
from .distance import AXIOM_TOL, DistanceTable, check_generalized_axioms
from .errors import CBoundaryError, InvalidInputError
from .geometry import build_weighted_graph
from .oracles import floyd_warshall
from .warp import check_conditions

EXIT_OK, EXIT_ASSERT, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
ORACLE_MAX_VERTICES = 600

log = logging.getLogger("cboundary")


@dataclass
class JobResult:
    name: str
    kind: str
    passed: bool
    files: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "passed": self.passed, "files": self.files,
                "summary": self.summary}


def _tol(job, key: str, default: float) -> float:
    return float((job.params.get("tolerances") or {}).get(key, default))


def _expectations(summary: dict, expect: dict | None) -> list[str]:
    failed = []
    for k, want in (expect or {}).items():
        if summary.get(k) != want:
            failed.append(f"{k}: expected {want!r}, got {summary.get(k)!r}")
    return failed


def _write(path: str, text: str) -> str:
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _tables(sc: Scenario, mesh, job):
    field_ = sc.build_field()
    t = job.params.get("time")
    rule = job.params.get("rule", "midpoint")
    if t is not None:
        tf = sc.build_time_field()
        if tf is None:
            raise InvalidInputError(f"job {job.name!r}: 'time' given but the metric is not time dependent")
        field_ = tf.at(float(t))
    plus = DistanceTable.from_graph(build_weighted_graph(mesh, field_, +1, rule=rule))
    minus = DistanceTable.from_graph(build_weighted_graph(mesh, field_, -1, rule=rule))
    return plus, minus


def _job_distance(sc, mesh, job, out):
    plus, minus = _tables(sc, mesh, job)
    table = plus if int(job.params.get("sign", 1)) > 0 else minus
    files = [_write(os.path.join(out, f"{job.name}_distances.csv"), table.to_csv())]
    summary = {"vertices": mesh.n_vertices}
    passed = True
    if job.params.get("check_axioms", True):
        seqs = sc.build_sequences(mesh)
        samples = [(s.points[-1], [list(s.points)]) for s in seqs]
        rep = check_generalized_axioms(table, sample_sequences=samples, tol=_tol(job, "axioms", AXIOM_TOL))
        summary["axioms"] = rep.summary()
        passed = rep.passed
    return passed, files, summary


def _read_pairs(sc, mesh, job):
    if "pairs" in job.params:
        rows = job.params["pairs"]
    else:
        path = job.params["csv"]
        if sc.source and not os.path.isabs(path):
            path = os.path.join(os.path.dirname(sc.source), path)
        try:
            with open(path, newline="") as fh:
                rows = [[r["t0"], r["x0"], r["t1"], r["x1"]] for r in csv.DictReader(fh)]
        except (OSError, KeyError) as exc:
            raise InvalidInputError(f"job {job.name!r}: cannot read pair CSV {path}: {exc}") from exc

    def vertex(v):
        # integers are vertex indices, anything else a coordinate
        if isinstance(v, str):
            try:
                v = json.loads(v)
            except ValueError as exc:
                raise InvalidInputError(f"job {job.name!r}: bad position {v!r}") from exc
        if isinstance(v, int) and not isinstance(v, bool):
            return v
        return mesh.nearest_vertex(v if isinstance(v, list) else [v])

    out = []
    for i, r in enumerate(rows):
        if len(r) != 4:
            raise InvalidInputError(f"job {job.name!r}: pair {i} needs t0, x0, t1, x1")
        out.append((float(r[0]), vertex(r[1]), float(r[2]), vertex(r[3])))
    return out


def _job_chronology(sc, mesh, job, out):
    plus, _ = _tables(sc, mesh, job)
    rows = _read_pairs(sc, mesh, job)
    verdicts = batch_chronology(rows, plus, sc.build_profile(), tol=_tol(job, "chronology", CHRON_TOL))
    table = [dict(t0=r[0], x0=r[1], t1=r[2], x1=r[3], **v) for r, v in zip(rows, verdicts)]
    files = [_write(os.path.join(out, f"{job.name}_verdicts.csv"), verdicts_to_csv(table))]
    counts = {k: sum(1 for v in verdicts if v["verdict"] == k) for k in ("related", "unrelated", "indeterminate")}
    expected = job.params.get("expect_verdicts")
    passed = expected is None or [v["verdict"] for v in verdicts] == list(expected)
    return passed, files, {"pairs": len(rows), **counts}


def _job_busemann(sc, mesh, job, out):
    plus, minus = _tables(sc, mesh, job)
    c = job.params["curve"]
    orientation = c.get("orientation", "future")
    verts = [p if isinstance(p, int) else mesh.nearest_vertex(p if isinstance(p, list) else [p]) for p in c["points"]]
    curve = CurveSample.on_mesh(mesh, c["times"], verts, float(c.get("omega", math.inf)), orientation)
    metric = plus if orientation == "future" else minus
    probes = ProbeSet(tuple(sc.build_probes(mesh)))
    b = busemann_eval(curve, sc.build_profile(), metric, probes, allow_lightlike=bool(c.get("lightlike", False)),
                      conv_tol=_tol(job, "convergence", CONV_TOL))
    files = [_write(os.path.join(out, f"{job.name}_function.csv"), b.to_csv())]
    summary = {"finite": b.finite, "converged": b.converged, "tail_increment": b.tail_increment,
               "diagnostic": b.diagnostic}
    failed = _expectations(summary, job.params.get("expect"))
    summary["expectation_failures"] = failed
    return not failed, files, summary


def _job_boundary(sc, mesh, job, out):
    plus, minus = _tables(sc, mesh, job)
    profile = sc.build_profile()
    seqs = sc.build_sequences(mesh)
    wanted = job.params.get("classes")
    if wanted:
        seqs = [s for s in seqs if s.label in wanted]
    classes = classify_boundary(seqs, plus, tol=_tol(job, "class", TAIL_TOL))
    probes = ProbeSet(tuple(sc.build_probes(mesh)))
    omegas = [float(w) for w in job.params.get("omegas", [0.0])]
    grid = [float(k) for k in job.params.get("K_grid", [-1.0, 0.0, 1.0])]
    pairs, lines, skipped = [], [], []
    for c in classes:
        if not c.symmetrized:
            skipped.append({"class": c.label, "reason": "not symmetrized", "flags": c.flags})
            continue
        for om in omegas:
            p = pair_from_symmetrized_point(om, c, profile, plus, probes, metric_minus=minus)
            pairs.append(p)
            lines.append(make_line(p, grid, profile))
    verified = [verify_line(line, profile) for line in lines]
    files = [
        _write(os.path.join(out, f"{job.name}_boundary.json"), boundary_report(pairs, lines, profile=profile)),
        _write(os.path.join(out, f"{job.name}_classes.json"), classes_to_json(classes, plus)),
    ]
    summary = {"classes": len(classes), "pairs": len(pairs), "lines_verified": sum(v["passed"] for v in verified),
               "skipped": skipped}
    failed = _expectations(summary, job.params.get("expect"))
    summary["expectation_failures"] = failed
    return all(v["passed"] for v in verified) and not failed, files, summary


def _job_conditions(sc, mesh, job, out):
    flags = check_conditions(sc.build_profile())
    d = flags.as_dict()
    files = [_write(os.path.join(out, f"{job.name}_conditions.json"), json.dumps(d, indent=2, default=str))]
    summary = {k: v for k, v in d.items() if k != "diagnostics"}
    failed = _expectations(summary, job.params.get("expect"))
    summary["expectation_failures"] = failed
    return not failed, files, summary


def _job_builtin(sc, mesh, job, out):
    rep = run_builtin_scenario(job.params["scenario"])
    files = rep.write(os.path.join(out, job.name))
    return rep.passed, files, {"failures": rep.failures()}


JOBS = {
    "distance": _job_distance,
    "chronology-batch": _job_chronology,
    "busemann": _job_busemann,
    "boundary": _job_boundary,
    "conditions": _job_conditions,
    "paper-scenario": _job_builtin,
}


def run_builtin_scenario(name: str) -> scenarios.ScenarioReport:
    if name not in scenarios.SCENARIOS:
        raise InvalidInputError(f"unknown scenario {name!r}; choose from {', '.join(scenarios.SCENARIOS)}")
    return scenarios.SCENARIOS[name]()


def run_job(sc: Scenario, job_name: str, out: str) -> JobResult:
    job = sc.job(job_name)
    os.makedirs(out, exist_ok=True)
    mesh = sc.build_mesh() if job.kind != "paper-scenario" else None
    try:
        passed, files, summary = JOBS[job.kind](sc, mesh, job, out)
    except InvalidInputError as exc:
        raise InvalidInputError(f"job {job.name!r} ({job.kind}): {exc}") from exc
    return JobResult(job.name, job.kind, bool(passed), files, summary)


def _run_job_from_file(path: str, job_name: str, out: str) -> JobResult:
    return run_job(parse_scenario(path), job_name, out)


# ---------------------------------------------------------------------------
# click commands


def _guard(fn):
    """Map exceptions onto the exit-code contract."""
    try:
        code = fn()
    except ScenarioError as exc:
        for where, msg in exc.errors:
            click.echo(f"error: {where}: {msg}", err=True)
        sys.exit(EXIT_INPUT)
    except (InvalidInputError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except CBoundaryError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_ASSERT)
    except Exception as exc:  # noqa: BLE001 - anything else is our bug
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    sys.exit(code)


TOL_HELP = (f"Default tolerances (override per job under 'tolerances'): axioms={AXIOM_TOL}, "
            f"chronology={CHRON_TOL}, convergence={CONV_TOL}, class={TAIL_TOL}.")


@click.group(help="Causal boundaries of warped Randers spacetimes on meshes. " + TOL_HELP)
@click.option("-v", "--verbose", is_flag=True, help="Log debug output.")
def main(verbose: bool):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(levelname)s: %(message)s")


@main.command(help="Validate a scenario file and print its normalized form.")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--normalized/--summary", default=False, help="Print the normalized YAML instead of a summary.")
def check(path: str, normalized: bool):
    def go():
        sc = parse_scenario(path)
        if normalized:
            click.echo(dump_scenario(sc), nl=False)
        else:
            mesh = sc.build_mesh()
            click.echo(f"{sc.name}: {mesh.n_vertices} vertices, {len(mesh.edges)} edges, "
                       f"{len(sc.boundary_sequences)} sequences, {len(sc.jobs)} jobs: ok")
        return EXIT_OK

    _guard(go)


@main.command(help="Run the jobs of a scenario file. " + TOL_HELP)
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--job", "job_names", multiple=True, help="Run only this job (repeatable).")
@click.option("--out", default="out", show_default=True, type=click.Path(file_okay=False))
@click.option("--parallel", is_flag=True, help="Run jobs in separate processes.")
def run(path: str, job_names: tuple[str, ...], out: str, parallel: bool):
    def go():
        sc = parse_scenario(path)
        names = list(job_names) or [j.name for j in sc.jobs]
        for n in names:
            sc.job(n)
        if parallel and len(names) > 1:
            with ProcessPoolExecutor() as pool:
                results = list(pool.map(_run_job_from_file, [path] * len(names), names, [out] * len(names)))
        else:
            results = [run_job(sc, n, out) for n in names]
        os.makedirs(out, exist_ok=True)
        report = {"scenario": sc.name, "passed": all(r.passed for r in results),
                  "jobs": [r.as_dict() for r in results]}
        _write(os.path.join(out, "report.json"), json.dumps(report, indent=2, default=str))
        for r in results:
            click.echo(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.kind})")
        return EXIT_OK if report["passed"] else EXIT_ASSERT

    _guard(go)


@main.command(help="Run a built-in reproduction: " + ", ".join(scenarios.SCENARIOS) + ".")
@click.argument("name")
@click.option("--out", default=None, type=click.Path(file_okay=False), help="Write report.json and CSVs here.")
def paper(name: str, out: str | None):
    def go():
        rep = run_builtin_scenario(name)
        if out:
            rep.write(out)
        for c in rep.checks:
            click.echo(f"{'PASS' if c.passed else 'FAIL'} {c.name}")
        return EXIT_OK if rep.passed else EXIT_ASSERT

    _guard(go)


@main.command(help="Cross-check the fast distance table of a scenario against Floyd-Warshall.")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--tol", default=1e-9, show_default=True, help="Relative tolerance.")
def oracle(path: str, tol: float):
    def go():
        sc = parse_scenario(path)
        mesh = sc.build_mesh()
        if mesh.n_vertices > ORACLE_MAX_VERTICES:
            raise InvalidInputError(f"oracle mode supports at most {ORACLE_MAX_VERTICES} vertices")
        worst = 0.0
        for sign in (+1, -1):
            g = build_weighted_graph(mesh, sc.build_field(), sign)
            fast = DistanceTable.from_graph(g).matrix()
            slow = floyd_warshall(g.n, g.edge_dict())
            both = np.isfinite(fast) & np.isfinite(slow)
            if not np.array_equal(np.isfinite(fast), np.isfinite(slow)):
                click.echo(f"FAIL sign {sign:+d}: reachability differs")
                return EXIT_ASSERT
            err = float(np.max(np.abs(fast[both] - slow[both]) / np.maximum(1.0, np.abs(slow[both]))))
            worst = max(worst, err)
            click.echo(f"{'PASS' if err <= tol else 'FAIL'} sign {sign:+d}: max relative deviation {err:.3e}")
        return EXIT_OK if worst <= tol else EXIT_ASSERT

    _guard(go)


if __name__ == "__main__":
    main()
