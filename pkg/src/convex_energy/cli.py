"""Command-line experiment runner.

Every subcommand validates its whole configuration before computing, then
writes one table (CSV or JSON) whose metadata block records the command and
config.  Results are collected in grid order, so the data section does not
depend on ``--threads``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .energy import energy_bruteforce, energy_dirichlet, energy_from_weights, fit_exponent
from .errors import BRUTEFORCE_LIMIT, ConvexEnergyError, InvariantError, ValidationError
from .falconer import (
    build_lattice_set,
    distance_value_count,
    parse_function,
    predicted_separated_exponent,
    separated_count,
    separation_scale,
)
from .incidence import build_arrangement, count_incidences, st_bound, verify_simple_intersection
from .partition import build_partition, growth_exponents
from .sequences import gen_sequence, parse_kind
from .sumset import andrews_ratio, build_weighted_sumset, majorant_ratio

SCHEMA = 1
COMMANDS = ("sumset", "energy", "dirichlet", "incidence", "partition", "falconer", "fit")


@dataclass
class ExperimentConfig:
    command: str
    sequence: str | None = None
    d: int | None = None
    n_grid: list[int] = field(default_factory=list)
    epsilon: float | None = None
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    oracle: bool = False
    threads: int = 1
    timing: bool = True
    options: dict = field(default_factory=dict)

    def to_meta(self) -> dict:
        meta = asdict(self)
        # where the table goes and how fast it is computed are not results
        for key in ("output", "threads"):
            meta.pop(key)
        return meta


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    extra: dict = field(default_factory=dict)


def _int_list(text: str, name: str) -> list[int]:
    try:
        items = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"--{name}: expected comma-separated integers, got {text!r}") from None
    if not items:
        raise ValidationError(f"--{name}: empty list")
    return items


def _resolve_sequence(text: str, seed: int) -> str:
    # a bare "random" takes its seed from --seed
    if text in ("random", "random_convex"):
        text = f"random:{seed}"
    parse_kind(text)
    return text


def _validate(cfg: ExperimentConfig):
    if cfg.format not in ("csv", "json"):
        raise ValidationError(f"--format must be csv or json, got {cfg.format!r}")
    if cfg.threads < 0:
        raise ValidationError(f"--threads must be >= 0, got {cfg.threads}")
    if cfg.command == "fit" or (cfg.command == "falconer" and not cfg.options.get("harness")):
        return
    if cfg.d is None or cfg.d < 1:
        raise ValidationError(f"--d must be a positive integer, got {cfg.d}")
    if not cfg.n_grid:
        raise ValidationError("--n is required")
    if any(n < 1 for n in cfg.n_grid):
        raise ValidationError(f"--n values must be positive, got {cfg.n_grid}")
    if sorted(set(cfg.n_grid)) != cfg.n_grid:
        raise ValidationError(f"--n must be strictly ascending, got {cfg.n_grid}")
    if cfg.oracle:
        worst = max(cfg.n_grid) ** (2 * cfg.d)
        if worst > BRUTEFORCE_LIMIT:
            raise ValidationError(
                f"--oracle needs N^(2d) <= {BRUTEFORCE_LIMIT}; N={max(cfg.n_grid)}, d={cfg.d} gives {worst}"
            )
    if cfg.command == "partition" and cfg.d < 2:
        raise ValidationError("partition needs --d >= 2")


def _map(cfg: ExperimentConfig, fn, items):
    workers = cfg.threads or os.cpu_count() or 1
    if workers == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _timed(cfg, fn):
    start = time.perf_counter()
    out = fn()
    spent = time.perf_counter() - start
    return out, (f"{spent:.6f}" if cfg.timing else "")


def run_sumset(cfg: ExperimentConfig) -> Table:
    d = cfg.d

    def one(n):
        return build_weighted_sumset(gen_sequence(cfg.sequence, n), d)

    sets = _map(cfg, one, cfg.n_grid)
    if len(sets) == 1:
        ws = sets[0]
        return Table(["value", "multiplicity"], [[int(v), int(w)] for v, w in zip(ws.values, ws.weights)])
    beta = float(growth_exponents(d).beta) if d >= 2 else None
    rows = []
    for ws in sets:
        rows.append(
            [
                ws.n,
                d,
                ws.cardinality,
                ws.max_weight,
                andrews_ratio(ws) if d >= 2 else "",
                majorant_ratio(ws, beta) if d >= 2 else "",
            ]
        )
    return Table(["N", "d", "cardinality", "max_weight", "andrews_ratio", "majorant_ratio"], rows)


def _energy_rows(cfg: ExperimentConfig, backends) -> Table:
    d = cfg.d

    def one(n):
        seq = gen_sequence(cfg.sequence, n)
        out = []
        for name in backends:
            if name == "weights":
                rep, sec = _timed(cfg, lambda: energy_from_weights(build_weighted_sumset(seq, d)))
            elif name == "bruteforce":
                rep, sec = _timed(cfg, lambda: energy_bruteforce(seq, d))
            else:
                method = "quadrature" if name == "dirichlet-quadrature" else "exact"
                rep, sec = _timed(cfg, lambda: energy_dirichlet(seq, d, method))
            out.append([n, d, rep.backend, rep.energy, sec])
        values = {r[3] for r in out}
        if len(values) > 1:
            raise InvariantError(
                f"backends disagree at N={n}, d={d}: " + ", ".join(f"{r[2]}={r[3]}" for r in out)
            )
        return out

    rows = [r for block in _map(cfg, one, cfg.n_grid) for r in block]
    return Table(["N", "d", "backend", "energy", "seconds"], rows)


def run_energy(cfg: ExperimentConfig) -> Table:
    backends = [cfg.options.get("backend") or "weights"]
    if cfg.oracle and "bruteforce" not in backends:
        backends.append("bruteforce")
    return _energy_rows(cfg, backends)


def run_dirichlet(cfg: ExperimentConfig) -> Table:
    method = cfg.options.get("method") or "exact"
    backends = ["dirichlet" if method == "exact" else "dirichlet-quadrature"]
    if cfg.oracle:
        backends.append("bruteforce")
    return _energy_rows(cfg, backends)


def run_incidence(cfg: ExperimentConfig) -> Table:
    d = cfg.d

    def one(n):
        arr = build_arrangement(gen_sequence(cfg.sequence, n), d)
        total = count_incidences(arr).total
        bad = verify_simple_intersection(arr)
        return [
            n,
            d,
            len(arr.curves),
            len(arr.points),
            arr.m,
            arr.n,
            arr.mu,
            arr.nu,
            total,
            st_bound(arr.m, arr.n, arr.mu, arr.nu),
            "yes" if bad is None else "no",
        ]

    cols = ["N", "d", "curves", "points", "m", "n", "mu", "nu", "incidences", "st_bound", "simple"]
    return Table(cols, _map(cfg, one, cfg.n_grid))


def run_partition(cfg: ExperimentConfig) -> Table:
    d = cfg.d
    start = cfg.options.get("start") or "net"

    def one(n):
        ws = build_weighted_sumset(gen_sequence(cfg.sequence, n), d)
        return build_partition(ws, cfg.epsilon, start)

    reports = _map(cfg, one, cfg.n_grid)
    rows = [
        [r.n, r.d, float(r.epsilon), r.M, r.M_cap, r.stop_reason, r.I_tilde, r.I_bar]
        for r in reports
    ]
    cols = ["N", "d", "epsilon", "M", "M_cap", "stop_reason", "I_tilde", "I_bar"]
    return Table(cols, rows, {"reports": [r.to_dict() for r in reports]})


def run_falconer(cfg: ExperimentConfig) -> Table:
    opts = cfg.options
    if opts.get("harness"):
        d = cfg.d

        def one(n):
            seq = gen_sequence(cfg.sequence, n)
            ws = build_weighted_sumset(seq, d)
            delta = separation_scale(n, d)
            return [n, delta, separated_count(ws.values, delta, seq.scale)]

        rows = _map(cfg, one, cfg.n_grid)
        extra = {"predicted_slope": predicted_separated_exponent(d)}
        if len(rows) >= 3:
            extra["fit"] = fit_exponent([(r[0], r[2]) for r in rows]).as_dict()
        return Table(["N", "delta", "separated_count"], rows, extra)

    f = parse_function(opts["function"])
    s = opts["s"]
    d = opts["dim"]

    def cell(q):
        E = build_lattice_set(q, s, d)
        return [q, s, d, f.name, distance_value_count(E, f), E.resolution]

    return Table(["q", "s", "d", "f", "distinct_values", "resolution"], _map(cfg, cell, opts["q"]))


def parse_table(text: str, source: str = "<table>") -> tuple[dict, list[dict]]:
    """Parse CSV or JSON written by this CLI into ``(meta, rows)``."""
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            return doc.get("meta", {}), doc["data"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ValidationError(f"{source}: not a table written by this tool") from None
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if "config" in meta:
        try:
            meta["config"] = json.loads(meta["config"])
        except json.JSONDecodeError:
            pass
    return meta, list(csv.DictReader(body))


def read_table(path: str | Path) -> tuple[dict, list[dict]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    return parse_table(text, str(path))


def run_fit(cfg: ExperimentConfig) -> Table:
    opts = cfg.options
    _, rows = read_table(opts["input"])
    if not rows:
        raise ValidationError(f"{opts['input']}: no data rows")
    xcol = opts.get("x") or "N"
    ycol = opts.get("column")
    if ycol is None:
        for name in ("energy", "separated_count", "cardinality", "distinct_values"):
            if name in rows[0]:
                ycol = name
                break
    if ycol is None or ycol not in rows[0] or xcol not in rows[0]:
        raise ValidationError(f"--column/--x: columns {ycol!r}, {xcol!r} not in {sorted(rows[0])}")
    if opts.get("backend"):
        rows = [r for r in rows if r.get("backend") == opts["backend"]]
    elif "backend" in rows[0]:
        first = rows[0]["backend"]
        rows = [r for r in rows if r["backend"] == first]
    try:
        points = [(float(r[xcol]), float(r[ycol])) for r in rows]
    except (TypeError, ValueError):
        raise ValidationError(f"non-numeric values in {xcol!r}/{ycol!r}") from None
    fit = fit_exponent(points)
    return Table(["slope", "intercept", "max_residual"], [[fit.slope, fit.intercept, fit.max_residual]], {"fit": fit.as_dict()})


RUNNERS = {
    "sumset": run_sumset,
    "energy": run_energy,
    "dirichlet": run_dirichlet,
    "incidence": run_incidence,
    "partition": run_partition,
    "falconer": run_falconer,
    "fit": run_fit,
}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def render(cfg: ExperimentConfig, table: Table, created: str | None = None) -> str:
    created = created or datetime.now(timezone.utc).isoformat(timespec="seconds")
    config = json.dumps(cfg.to_meta(), sort_keys=True)
    if cfg.command == "fit" and cfg.format == "json":
        return json.dumps(table.extra["fit"], sort_keys=True, indent=2) + "\n"
    if cfg.format == "json":
        data = [dict(zip(table.columns, row)) for row in table.rows]
        doc = {
            "schema": SCHEMA,
            "meta": {"command": cfg.command, "config": cfg.to_meta(), "created": created},
            "data": data,
        }
        doc.update(table.extra)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA}\n# command: {cfg.command}\n# config: {config}\n# created: {created}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> str:
    """Validate, compute and render; returns the output text."""
    _validate(cfg)
    table = RUNNERS[cfg.command](cfg)
    return render(cfg, table)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convex-energy",
        description="Sumsets, energies and incidence machinery for convex sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")
        p.add_argument("--seed", type=int, default=0, help="seed for --seq random")
        if grid:
            p.add_argument("--seq", default="power:2", help="power:K, sqrt[:P], random[:SEED[:SPREAD]], custom:PATH")
            p.add_argument("--d", type=int, default=2)
            p.add_argument("--n", help="comma-separated N grid")
            p.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")

    p = sub.add_parser("sumset", help="weighted sumset (one N) or summary table (several N)")
    common(p)
    p = sub.add_parser("energy", help="solution counts via multiplicities")
    common(p)
    p.add_argument("--backend", choices=["weights", "dirichlet", "bruteforce"], default="weights")
    p.add_argument("--oracle", action="store_true", help="also run brute force and compare")
    p = sub.add_parser("dirichlet", help="solution counts from the exponential sum")
    common(p)
    p.add_argument("--method", choices=["exact", "quadrature"], default="exact")
    p.add_argument("--oracle", action="store_true")
    p = sub.add_parser("incidence", help="translate arrangement statistics")
    common(p)
    p = sub.add_parser("partition", help="weight-class partition summary")
    common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--start", choices=["net", "andrews"], default="net")
    p = sub.add_parser("falconer", help="lattice distance counts or separated-count harness")
    common(p)
    p.add_argument("--q", default="1,2,4,8", help="comma-separated denominators")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=2, help="ambient dimension of the lattice")
    p.add_argument("--f", default="power:2", help="power:K")
    p.add_argument("--harness", action="store_true", help="separated counts of sumset values instead")
    p = sub.add_parser("fit", help="log-log slope of a table written by this tool")
    p.add_argument("input")
    p.add_argument("--column", help="y column (default: energy or the first known count)")
    p.add_argument("--x", default="N")
    p.add_argument("--backend", help="only rows from this backend")
    p.add_argument("--out")
    p.add_argument("--format", default="json", choices=["csv", "json"])
    return parser


def config_from_args(args) -> ExperimentConfig:
    cmd = args.command
    if cmd == "fit":
        opts = {"input": args.input, "column": args.column, "x": args.x, "backend": args.backend}
        return ExperimentConfig(cmd, output=args.out, format=args.format, options=opts)
    opts = {}
    n_grid = _int_list(args.n, "n") if args.n else []
    if cmd == "energy":
        opts["backend"] = args.backend
    if cmd == "dirichlet":
        opts["method"] = args.method
    if cmd == "partition":
        opts["start"] = args.start
    if cmd == "falconer":
        opts.update(harness=args.harness, q=_int_list(args.q, "q"), s=args.s, dim=args.dim, function=args.f)
        if not args.harness:
            parse_function(args.f)
            n_grid = []
    return ExperimentConfig(
        command=cmd,
        sequence=_resolve_sequence(args.seq, args.seed),
        d=args.d,
        n_grid=n_grid,
        epsilon=getattr(args, "epsilon", None),
        output=args.out,
        format=args.format,
        seed=args.seed,
        oracle=getattr(args, "oracle", False),
        threads=args.threads,
        timing=not args.no_timing,
        options=opts,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        text = run(cfg)
    except ConvexEnergyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print("error: out of memory; reduce N or d", file=sys.stderr)
        return 3
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
