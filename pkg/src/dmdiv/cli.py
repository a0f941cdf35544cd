"""Command-line interface: ``dmdiv {divergence,bench,casestudy,fit,sample}``.

Exit codes: 0 success, 2 malformed or invalid input, 3 undefined
divergence (zero probabilities meet negative powers or logs), 4 domain or
table too large for the requested method.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import DEFAULT_DOMAIN_CAP, brute_force_divergence, forward_sample, mc_alpha_beta
from .divergence import DEFAULT_GRID, NAMED, alpha_beta_divergence, divergence_case
from .errors import (
    CyclicInput,
    DomainTooLarge,
    ModelError,
    NonChordalInput,
    TableTooLarge,
    UndefinedDivergence,
)
from .factor import set_cell_cap
from .fileio import bn_from_dict, dm_from_dict, load_csv, load_structure, save_csv, save_dm
from .functional import build_computation_graph
from .generate import chain_pair, random_pair
from .model import DecomposableModel, bn_to_dm, delete_edges, log_likelihood, mle_fit

CANDIDATE_EDGES = {
    "A": (("PKA", "Raf"), ("PKC", "PKA"), ("Plcg", "PIP3")),
    "B": (("PKC", "Raf"), ("PKC", "Mek"), ("PKA", "Mek")),
}
DEFAULT_SEED = 1


@dataclass
class RunReport:
    command: str
    inputs: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    version: str = __version__

    def add_input(self, path) -> None:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.inputs.append({"path": str(path), "sha256": digest})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, allow_nan=True)


class _Timer:
    def __init__(self, report: RunReport, phase: str):
        self.report, self.phase = report, phase

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.report.timings[self.phase] = self.report.timings.get(self.phase, 0.0) + (
            time.perf_counter() - self.t0)


# -- helpers ------------------------------------------------------------------

def load_model(path) -> DecomposableModel:
    """Read a DM file, or a BN file converted to its decomposable model."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: expected a JSON object")
    if "nodes" in doc:
        return bn_to_dm(bn_from_dict(doc))
    if "cliques" in doc:
        return dm_from_dict(doc)
    raise ModelError(f"{path}: neither a DM ('cliques') nor a BN ('nodes') file")


def _points(args) -> list[tuple[float, float]]:
    if args.named:
        return [NAMED[args.named]]
    if args.grid:
        return list(DEFAULT_GRID)
    return [(args.alpha, args.beta)]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return "" if v is None else str(v)


def _print_table(rows: list[dict], out=None) -> None:
    if not rows:
        return
    out = out or sys.stdout
    cols = list(rows[0])
    cells = [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)), file=out)
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)), file=out)


def _write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows({k: repr(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows)


def _finish(report: RunReport, rows: list[dict], args) -> None:
    report.results = rows
    _print_table(rows)
    if args.csv and rows:
        _write_csv(rows, args.csv)
    if args.report:
        Path(args.report).write_text(report.to_json())


def _rel_err(x: float, ref: float) -> float:
    if x == ref:
        return 0.0
    return abs(x - ref) / abs(ref) if ref != 0 else math.inf


# -- commands -----------------------------------------------------------------

def cmd_divergence(args) -> int:
    report = RunReport("divergence")
    for path in (args.p, args.q):
        report.add_input(path)
    report.parameters = {"method": args.method, "points": _points(args), "samples": args.samples,
                         "seed": args.seed, "cross_check": args.cross_check}
    with _Timer(report, "load"):
        p, q = load_model(args.p), load_model(args.q)
    cg = build_computation_graph(p, q) if args.method == "jtc" else None
    rows, undefined = [], 0
    for a, b in _points(args):
        row = {"alpha": a, "beta": b, "case": divergence_case(a, b)}
        try:
            with _Timer(report, args.method):
                if args.method == "jtc":
                    row["value"] = alpha_beta_divergence(p, q, a, b, cg)
                elif args.method == "brute":
                    row["value"] = brute_force_divergence(p, q, a, b)
                else:
                    est = mc_alpha_beta(p, q, a, b, args.samples, args.seed, args.bootstrap)
                    row["value"], row["stderr"] = est.estimate, est.stderr
        except UndefinedDivergence as exc:
            if len(_points(args)) == 1:
                raise
            undefined += 1
            row["value"] = math.nan
            row["note"] = f"undefined: {exc}"
        if args.cross_check:
            try:
                with _Timer(report, "cross_check"):
                    ref = brute_force_divergence(p, q, a, b)
                row["brute"], row["rel_err"] = ref, _rel_err(row["value"], ref)
            except DomainTooLarge:
                row["brute"], row["rel_err"] = None, None
                row["note"] = "domain too large for brute force"
            except UndefinedDivergence:
                row["brute"], row["rel_err"] = math.nan, None
        rows.append(row)
    keys = list(dict.fromkeys(k for r in rows for k in r))
    rows = [{k: r.get(k) for k in keys} for r in rows]
    _finish(report, rows, args)
    if args.svg and len(rows) > 1:
        from .plotting import grid_heatmap
        grid_heatmap([r["alpha"] for r in rows], [r["beta"] for r in rows],
                     {(r["alpha"], r["beta"]): r["value"] for r in rows}, args.svg,
                     f"D_AB({Path(args.p).stem} || {Path(args.q).stem})")
    return 3 if undefined else 0


def _bench_pair(family: str, n: int, treewidth: int, rng: np.random.Generator):
    if family == "chain":
        return chain_pair(n, rng)
    return random_pair(rng, n, treewidth=treewidth)


def _best_time(fn, repeats: int) -> tuple[float, object]:
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cmd_bench(args) -> int:
    report = RunReport("bench")
    report.parameters = {"family": args.family, "n": args.n, "treewidth": args.treewidth,
                         "repeats": args.repeats, "seed": args.seed, "alpha": args.alpha,
                         "beta": args.beta, "samples": args.samples}
    seeds = np.random.SeedSequence(args.seed).spawn(len(args.n))
    rows, timing_rows = [], []
    a, b = args.alpha, args.beta
    for n, ss in zip(args.n, seeds):
        p, q = _bench_pair(args.family, n, args.treewidth, np.random.default_rng(ss))
        size = p.domain_size()
        t_jtc, exact = _best_time(lambda: alpha_beta_divergence(p, q, a, b), args.repeats)
        row = {"n": n, "log10_domain": math.log10(size), "jtc": exact}
        times = {"n": n, "jtc_s": t_jtc}
        if size <= DEFAULT_DOMAIN_CAP:
            t_bf, ref = _best_time(lambda: brute_force_divergence(p, q, a, b), 1)
            row["brute"], times["brute_s"] = ref, t_bf
        else:
            row["brute"], times["brute_s"] = None, math.nan
        if args.samples:
            t_mc, est = _best_time(lambda: mc_alpha_beta(p, q, a, b, args.samples, args.seed), 1)
            row["mc"], row["mc_stderr"], times["mc_s"] = est.estimate, est.stderr, t_mc
        rows.append(row)
        timing_rows.append(times)
    report.timings = {"per_n": timing_rows}
    table = [{**r, **{k: v for k, v in t.items() if k != "n"}} for r, t in zip(rows, timing_rows)]
    report.results = rows
    _print_table(table)
    by_n = {t["n"]: t["jtc_s"] for t in timing_rows}
    for lo in sorted(by_n):
        if 2 * lo in by_n:
            print(f"jtc time ratio n={2 * lo}/n={lo}: {by_n[2 * lo] / by_n[lo]:.2f}")
    if args.csv:
        _write_csv(table, args.csv)
    if args.report:
        Path(args.report).write_text(report.to_json())
    if args.svg:
        from .plotting import scaling_plot
        series = {"exact (junction forest)": [t["jtc_s"] for t in timing_rows],
                  "brute force": [t["brute_s"] for t in timing_rows]}
        if args.samples:
            series[f"Monte Carlo ({args.samples} samples)"] = [t["mc_s"] for t in timing_rows]
        scaling_plot(args.n, series, args.svg, f"{args.family} models, D_AB({a:g},{b:g})")
    return 0


def default_sachs_path():
    return resources.files("dmdiv") / "data" / "sachs.json"


def cmd_casestudy(args) -> int:
    report = RunReport("casestudy")
    path = Path(args.sachs) if args.sachs else Path(str(default_sachs_path()))
    if not path.is_file():
        raise ModelError(f"sachs model file not found at {path}")
    report.add_input(path)
    report.parameters = {"candidates": {k: [list(e) for e in v] for k, v in CANDIDATE_EDGES.items()},
                         "grid": list(DEFAULT_GRID), "cross_check": not args.no_cross_check}
    with _Timer(report, "build"):
        bn = bn_from_dict(json.loads(path.read_text()))
        truth = bn_to_dm(bn)
        models = {"sachs": truth}
        for name, edges in CANDIDATE_EDGES.items():
            models[name] = bn_to_dm(delete_edges(bn, edges))
    values: dict[str, dict] = {}
    rows = []
    for name in ("A", "B", "sachs"):
        q = models[name]
        cg = build_computation_graph(truth, q)
        values[name] = {}
        for a, b in DEFAULT_GRID:
            with _Timer(report, "exact"):
                d = alpha_beta_divergence(truth, q, a, b, cg)
            values[name][(a, b)] = d
            row = {"candidate": name, "alpha": a, "beta": b, "divergence": d}
            if not args.no_cross_check:
                with _Timer(report, "brute_force"):
                    ref = brute_force_divergence(truth, q, a, b)
                row["brute"] = ref
                row["abs_err"] = abs(d - ref)
                row["rel_err"] = _rel_err(d, ref) if ref != 0 else None
            rows.append(row)
    verdicts = []
    for a, b in DEFAULT_GRID:
        da, db = values["A"][(a, b)], values["B"][(a, b)]
        closer = "A" if da < db else "B" if db < da else "tie"
        verdicts.append({"alpha": a, "beta": b, "D_A": da, "D_B": db, "closer": closer})
    _finish(report, rows, args)
    print()
    _print_table(verdicts)
    counts = {k: sum(v["closer"] == k for v in verdicts) for k in ("A", "B", "tie")}
    print(f"closer candidate: A at {counts['A']} grid points, B at {counts['B']}, ties {counts['tie']}")
    report.results = {"divergences": rows, "verdicts": verdicts}
    if args.report:
        Path(args.report).write_text(report.to_json())
    if args.verdict_csv:
        _write_csv(verdicts, args.verdict_csv)
    if args.svg:
        from .plotting import candidate_plot
        candidate_plot(list(DEFAULT_GRID), {f"candidate {k}": [values[k][g] for g in DEFAULT_GRID]
                                            for k in ("A", "B")},
                       args.svg, "D_AB(sachs || candidate)")
    if not args.no_cross_check:
        worst = max(r["rel_err"] for r in rows if r["rel_err"] is not None)
        print(f"largest relative discrepancy against brute force: {worst:.3g}")
    return 0


def cmd_fit(args) -> int:
    report = RunReport("fit")
    report.add_input(args.structure)
    report.add_input(args.data)
    report.parameters = {"smoothing": args.smoothing}
    variables, graph = load_structure(args.structure)
    data = load_csv(args.data, variables)
    model = mle_fit(graph, variables, data, args.smoothing)
    save_dm(model, args.output)
    ll = log_likelihood(model, data)
    report.results = [{"rows": len(data), "log_likelihood": ll}]
    print(f"fitted {len(model.cliques)} cliques on {len(data)} rows; log-likelihood {ll:.10g}")
    if args.report:
        Path(args.report).write_text(report.to_json())
    return 0


def cmd_sample(args) -> int:
    model = load_model(args.model)
    batch = forward_sample(model, args.samples, args.seed)
    save_csv(batch.rows, model.vars, args.output)
    print(f"wrote {batch.count} rows to {args.output}")
    return 0


# -- argument parsing ---------------------------------------------------------

def _outputs(sp) -> None:
    sp.add_argument("--csv", help="write the results table as CSV")
    sp.add_argument("--svg", help="write a figure as SVG")
    sp.add_argument("--report", help="write a JSON run report")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dmdiv", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"dmdiv {__version__}")
    ap.add_argument("--cell-cap", type=int, help="largest factor table allowed (cells)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("divergence", help="D_AB between two model files")
    sp.add_argument("p")
    sp.add_argument("q")
    pick = sp.add_mutually_exclusive_group()
    pick.add_argument("--grid", action="store_true", help="all 36 points of the default grid")
    pick.add_argument("--named", choices=sorted(NAMED))
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--method", choices=("jtc", "brute", "mc"), default="jtc")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples for MC stderr")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--cross-check", action="store_true", help="add brute-force column")
    _outputs(sp)
    sp.set_defaults(func=cmd_divergence)

    sp = sub.add_parser("bench", help="runtime against model size")
    sp.add_argument("--family", choices=("chain", "random"), default="chain")
    sp.add_argument("--n", type=int, nargs="+", default=[25, 50, 100, 200])
    sp.add_argument("--treewidth", type=int, default=2)
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--samples", type=int, default=10_000, help="MC samples (0 disables MC)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _outputs(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("casestudy", help="sachs network against two edge-deleted candidates")
    sp.add_argument("--sachs", help="sachs BN file (default: bundled copy)")
    sp.add_argument("--no-cross-check", action="store_true")
    sp.add_argument("--verdict-csv", help="write the per-grid-point verdicts as CSV")
    _outputs(sp)
    sp.set_defaults(func=cmd_casestudy)

    sp = sub.add_parser("fit", help="maximum-likelihood DM from a structure and CSV data")
    sp.add_argument("structure")
    sp.add_argument("data")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--smoothing", type=float, default=0.0)
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("sample", help="draw rows from a model into CSV")
    sp.add_argument("model")
    sp.add_argument("-n", "--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_sample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cell_cap:
        set_cell_cap(args.cell_cap)
    try:
        return args.func(args)
    except UndefinedDivergence as exc:
        print(f"error: undefined divergence: {exc}", file=sys.stderr)
        return 3
    except (DomainTooLarge, TableTooLarge) as exc:
        print(f"error: too large: {exc}", file=sys.stderr)
        return 4
    except (ModelError, NonChordalInput, CyclicInput, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
