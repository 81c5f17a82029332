"""Command-line front end: ingest panels, build networks, simulate, study.

Exchange format is CSV throughout (JSON for summaries). Floats are written
with ``repr``, so every value round-trips bit-exactly through parse and
re-serialize, and all outputs are byte-identical for identical inputs,
flags and seeds.

Exit codes: 0 success, 2 validation/config error, 3 I/O error,
4 computation error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import balance_sheet as bs
from . import network as net
from .growth import ReplicationStudy, replication_study
from .sim import ConfigError, SimConfig, SimOutput, period_date, run

__all__ = [
    "EXIT_COMPUTE", "EXIT_IO", "EXIT_OK", "EXIT_VALIDATION",
    "IngestError", "IngestResult", "IngestSpec",
    "cmd_curve", "cmd_ingest", "cmd_network", "cmd_simulate", "cmd_study",
    "format_sim_config", "ingest_panel", "main", "read_sim_config",
    "write_panel_csv",
]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_COMPUTE = 4


class IngestError(ValueError):
    """Input file cannot be accepted under the requested validation mode."""


@dataclass(frozen=True)
class IngestSpec:
    """Where and how to read a balance-sheet panel CSV.

    Dates are ISO-8601 and map to grid indices by rank among the distinct
    sorted dates of the whole file. ``strict`` mode aborts on any invalid
    bank or any bank with interior gaps (a mixed-frequency reporter);
    ``lenient`` drops invalid banks, keeps gapped ones (they simply never
    count as complete), and reports both.
    """

    path: str
    bank_col: str = "bank_id"
    date_col: str = "date"
    assets_col: str = "assets"
    liabilities_col: str = "liabilities"
    mode: str = "lenient"  # strict | lenient

    def __post_init__(self):
        cols = (self.bank_col, self.date_col, self.assets_col, self.liabilities_col)
        if len(set(cols)) != 4:
            raise IngestError(f"mapped columns must be distinct, got {cols}")
        if self.mode not in ("strict", "lenient"):
            raise IngestError(f"mode must be strict or lenient, got {self.mode!r}")


@dataclass(frozen=True)
class IngestResult:
    panel: bs.Panel            # every valid member, incomplete ones included
    complete: bs.Panel         # complete members only
    census: bs.CensusReport
    report: dict


def _fmt(x: float) -> str:
    return repr(float(x))


def ingest_panel(spec: IngestSpec) -> IngestResult:
    """Parse and validate a ``bank_id,date,assets,liabilities`` CSV."""
    path = Path(spec.path)
    rows: list[tuple[str, datetime.date, float, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path}: empty file")
        try:
            cols = [header.index(c) for c in
                    (spec.bank_col, spec.date_col, spec.assets_col, spec.liabilities_col)]
        except ValueError as exc:
            raise IngestError(f"{path}: missing column in header {header}: {exc}") from exc
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                bank = row[cols[0]].strip()
                date = datetime.date.fromisoformat(row[cols[1]].strip())
                assets = float(row[cols[2]])
                liabilities = float(row[cols[3]])
            except (IndexError, ValueError) as exc:
                raise IngestError(f"{path}:{lineno}: malformed row: {exc}") from exc
            if not bank:
                raise IngestError(f"{path}:{lineno}: empty bank id")
            rows.append((bank, date, assets, liabilities))
    if not rows:
        raise IngestError(f"{path}: no data rows")

    dates = sorted({r[1] for r in rows})
    date_rank = {d: k for k, d in enumerate(dates)}
    by_bank: dict[str, list[tuple[int, float, float]]] = {}
    for bank, date, assets, liabilities in rows:
        by_bank.setdefault(bank, []).append((date_rank[date], assets, liabilities))

    members, dropped, gapped = [], [], []
    for bank in sorted(by_bank):
        obs = sorted(by_bank[bank])
        times = [o[0] for o in obs]
        reason = None
        if len(set(times)) != len(times):
            reason = "duplicate dates"
        else:
            try:
                series = bs.BankSeries.from_observations(bank, obs)
            except bs.DegenerateEquityError as exc:
                reason = f"liabilities >= assets at t={exc.time_index}"
            except bs.DomainError as exc:
                reason = str(exc)
        if reason is not None:
            if spec.mode == "strict":
                raise IngestError(f"{path}: bank {bank!r}: {reason}")
            dropped.append({"bank_id": bank, "reason": reason})
            continue
        if times[-1] - times[0] + 1 != len(times):
            # observations skip interior grid points: a sparser reporter
            if spec.mode == "strict":
                raise IngestError(
                    f"{path}: bank {bank!r} has interior gaps (mixed sampling frequency)")
            gapped.append(bank)
        members.append(series)

    if not members:
        raise IngestError(f"{path}: no valid banks remain")
    labels = tuple(d.isoformat() for d in dates)
    panel = bs.Panel.from_members(path.stem, members, labels)
    complete = bs.filter_complete(panel)
    report = {
        "input": str(path),
        "mode": spec.mode,
        "n_rows": len(rows),
        "n_banks_read": len(by_bank),
        "n_banks_valid": len(members),
        "n_banks_complete": len(complete.members),
        "dropped": dropped,
        "gapped_banks": sorted(gapped),
        "mixed_sampling": bool(gapped),
    }
    return IngestResult(panel, complete, bs.census(panel), report)


def write_panel_csv(panel: bs.Panel, path: Path) -> None:
    """Rows sorted by (bank_id, time); dates from the panel's grid labels."""
    labels = panel.grid_labels or tuple(period_date(int(t)) for t in panel.grid)
    pos = {int(t): k for k, t in enumerate(panel.grid)}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("bank_id,date,assets,liabilities\n")
        for m in panel.members:
            for t, a, l in zip(m.times, m.assets, m.liabilities):
                fh.write(f"{m.bank_id},{labels[pos[int(t)]]},{_fmt(a)},{_fmt(l)}\n")


def _write_json(obj: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- simulation config file ----------------------------------------------

_TUPLE_FIELDS = ("assets_range", "equity_ratio_range")


def read_sim_config(path: str | Path, base: SimConfig | None = None) -> SimConfig:
    """Read a flat ``key = value`` file over SimConfig fields; '#' comments."""
    base = base or SimConfig()
    types = {f.name: f.type for f in fields(SimConfig)}
    updates = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            updates[key] = _parse_config_value(key, value)
    return replace(base, **updates)


def _parse_config_value(key: str, value: str):
    try:
        if key in _TUPLE_FIELDS:
            lo, hi = (float(p) for p in value.split(","))
            return (lo, hi)
        if key in ("n_banks", "n_periods", "maturity", "deposit_bank_count", "seed"):
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc


def format_sim_config(config: SimConfig) -> str:
    lines = []
    for f in fields(SimConfig):
        v = getattr(config, f.name)
        if f.name in _TUPLE_FIELDS:
            v = f"{_fmt(v[0])}, {_fmt(v[1])}"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    for f in fields(SimConfig):
        if f.name == "seed":
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.name in _TUPLE_FIELDS:
            p.add_argument(flag, metavar="LOW,HIGH")
        else:
            p.add_argument(flag, type=str)
    p.add_argument("--seed", type=int, required=True,
                   help="run seed (required; no wall-clock seeding)")


def _config_from_args(args: argparse.Namespace) -> SimConfig:
    config = SimConfig()
    if args.config:
        config = read_sim_config(args.config, config)
    overrides = {}
    for f in fields(SimConfig):
        if f.name == "seed":
            continue
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = _parse_config_value(f.name, value)
    config = replace(config, seed=args.seed, **overrides)
    config.validate()
    return config


# -- commands --------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    spec = IngestSpec(args.input, args.bank_col, args.date_col,
                      args.assets_col, args.liabilities_col, args.mode)
    result = ingest_panel(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_panel_csv(result.complete, out / "panel.csv")
    c = result.census
    _write_json({"census": {"n_start": c.n_start, "n_end": c.n_end,
                            "n_birth": c.n_birth, "n_death": c.n_death,
                            "n_complete": c.n_complete},
                 "validation": result.report}, out / "census.json")
    print(f"ingested {result.report['n_banks_valid']} banks "
          f"({c.n_complete} complete) -> {out}")
    return EXIT_OK


def _load_complete_panel(path: str) -> bs.Panel:
    result = ingest_panel(IngestSpec(path))
    if len(result.complete.members) < 2:
        raise IngestError(f"{path}: need at least 2 complete banks")
    return result.complete


def cmd_network(args: argparse.Namespace) -> int:
    panel = _load_complete_panel(args.input)
    matrix = net.leverage_correlation(panel)
    if args.avg_degree is not None:
        if args.mode == "absolute":
            raise ValueError("--avg-degree ranks signed coefficients; use --rho with --mode absolute")
        network = net.top_m_network(matrix, avg_degree=args.avg_degree)
    else:
        network = net.threshold_network(matrix, args.rho, args.mode)
    part = net.components(network)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.csv", "w", encoding="utf-8") as fh:
        fh.write("bank_a,bank_b,r\n")
        for i, j, r in network.edges:
            fh.write(f"{network.nodes[i]},{network.nodes[j]},{_fmt(r)}\n")
    with open(out / "components.csv", "w", encoding="utf-8") as fh:
        fh.write("bank_id,component_id,component_size\n")
        for k, bank in enumerate(network.nodes):
            comp = part.assignment[k]
            fh.write(f"{bank},{comp},{part.sizes[comp]}\n")
    _write_json({"n": network.n, "n_edges": network.n_edges,
                 "target_edges": network.target_edges,
                 "avg_degree": network.avg_degree,
                 "threshold": network.threshold, "mode": network.mode,
                 "largest_fraction": part.largest_fraction,
                 "n_components": part.n_components,
                 "n_isolated": part.n_isolated,
                 "zero_variance_banks": list(matrix.zero_variance)},
                out / "summary.json")
    print(f"network: {network.n} nodes, {network.n_edges} edges, "
          f"{part.n_isolated} isolated -> {out}")
    return EXIT_OK


def _rho_grid(rho_min: float, rho_max: float, rho_step: float) -> list[float]:
    if not (0.0 <= rho_min < rho_max <= 1.0):
        raise ValueError(f"need 0 <= rho_min < rho_max <= 1, got [{rho_min}, {rho_max}]")
    if rho_step <= 0:
        raise ValueError(f"rho_step must be positive, got {rho_step}")
    grid = []
    k = 0
    while True:
        rho = round(rho_min + k * rho_step, 10)
        if rho > rho_max + 1e-12:
            break
        grid.append(min(rho, 1.0))
        k += 1
    return grid


def cmd_curve(args: argparse.Namespace) -> int:
    panel = _load_complete_panel(args.input)
    matrix = net.leverage_correlation(panel)
    curve = net.cluster_curve(matrix, _rho_grid(args.rho_min, args.rho_max, args.rho_step),
                              args.mode)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("rho,largest_fraction\n")
        for rho, frac in curve.points:
            fh.write(f"{_fmt(rho)},{_fmt(frac)}\n")
    print(f"curve: {len(curve.points)} thresholds -> {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    output: SimOutput = run(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_panel_csv(output.panel, out / "panel.csv")
    with open(out / "adjacency.csv", "w", encoding="utf-8") as fh:
        fh.write("period,lender_id,borrower_id,amount\n")
        for t, lender, borrower, amount in output.adjacency:
            fh.write(f"{t},{output.bank_ids[lender]},{output.bank_ids[borrower]},{_fmt(amount)}\n")
    with open(out / "events.csv", "w", encoding="utf-8") as fh:
        fh.write("period,event,bank_a,bank_b,amount\n")
        for ev in output.events:
            other = output.bank_ids[ev.counterparty] if ev.counterparty is not None else ""
            fh.write(f"{ev.period},{ev.kind},{output.bank_ids[ev.bank]},{other},{_fmt(ev.amount)}\n")
    tail = min(1000, config.n_periods)
    kinds = [e.kind for e in output.events]
    _write_json({"seed": config.seed, "n_banks": config.n_banks,
                 "n_periods": config.n_periods,
                 "mean_leverage_final": float(output.mean_leverage[-1]),
                 "mean_leverage_tail": float(output.mean_leverage[-(tail + 1):].mean()),
                 "assets_growth": output.assets_growth,
                 "n_loans": kinds.count("loan"),
                 "n_failed_loans": kinds.count("loan_failed"),
                 "n_shocks": kinds.count("shock"),
                 "n_interbank_links": output.adjacency.total_links},
                out / "summary.json")
    print(f"simulated {config.n_banks} banks x {config.n_periods} periods "
          f"(seed {config.seed}) -> {out}")
    return EXIT_OK


def cmd_study(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    study: ReplicationStudy = replication_study(config, args.runs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("run,bank_id,role,leverage_growth,assets_growth,"
                 "population_median_assets_growth,population_median_leverage_growth\n")
        for rec in study.run_records:
            roles = {rec.bank_a: "pair1", rec.bank_b: "pair2"}
            for g in rec.records:
                fh.write(f"{rec.run_index},{g.bank_id},{roles.get(g.bank_id, 'population')},"
                         f"{_fmt(g.leverage_growth)},{_fmt(g.assets_growth)},"
                         f"{_fmt(rec.median_assets_growth)},{_fmt(rec.median_leverage_growth)}\n")
    print(f"study: {study.runs} replications -> {out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levnet",
        description="Bank leverage-dependence networks: ingest, simulate, analyze.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a balance-sheet CSV into a complete panel")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", choices=("strict", "lenient"), default="lenient")
    p.add_argument("--bank-col", default="bank_id")
    p.add_argument("--date-col", default="date")
    p.add_argument("--assets-col", default="assets")
    p.add_argument("--liabilities-col", default="liabilities")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("network", help="leverage correlation network of a panel")
    p.add_argument("--input", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rho", type=float)
    g.add_argument("--avg-degree", type=float)
    p.add_argument("--mode", choices=("signed", "absolute"), default="signed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("curve", help="largest-cluster fraction vs threshold")
    p.add_argument("--input", required=True)
    p.add_argument("--rho-min", type=float, default=0.0)
    p.add_argument("--rho-max", type=float, default=1.0)
    p.add_argument("--rho-step", type=float, default=0.01)
    p.add_argument("--mode", choices=("signed", "absolute"), default="signed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("simulate", help="run the lending model and export its panel")
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("study", help="most-correlated-pair growth across replications")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_study)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IngestError, bs.DomainError, bs.DegenerateEquityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    raise SystemExit(main())
