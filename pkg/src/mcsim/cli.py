"""Command-line front end: ``mcsim run | compare | sweep``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Sequence

from . import arch as arch_mod
from .config import ConfigError, build_config, is_known_key, load_config, parse_file, parse_overrides
from .sim import RESULT_COLUMNS, ResultRow, ScenarioConfig, results_csv, run_scenario, write_trace


def _err(msg: str) -> int:
    print(f"mcsim: error: {msg}", file=sys.stderr)
    return 2


def _prepare_out(out: str) -> Path:
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    probe = p / ".mcsim-write-test"
    probe.write_text("")
    probe.unlink()
    return p


def _summary(rows: Sequence[ResultRow]) -> str:
    ue_ids = sorted({r.ue_id for r in rows})
    lines = ["pos  " + "".join(f"{'UE' + str(u) + ' Mbit/s':>14}{'share':>7}" for u in ue_ids)]
    by_pos: dict[int, dict[int, ResultRow]] = {}
    for r in rows:
        by_pos.setdefault(r.position_index, {})[r.ue_id] = r
    for pos in sorted(by_pos):
        cells = "".join(
            f"{by_pos[pos][u].throughput_bps / 1e6:14.3f}{by_pos[pos][u].tti_share:7.3f}" for u in ue_ids
        )
        lines.append(f"{pos:<5}{cells}")
    return "\n".join(lines)


def cmd_run(cfg: ScenarioConfig, out: str, trace: bool = False) -> int:
    try:
        outdir = _prepare_out(out)
    except OSError as exc:
        return _err(f"cannot write to output directory {out}: {exc.strerror or exc}")
    if not _crt_report(cfg):
        print("warning: UE attachment fails the CRT bound; throughput is zero", file=sys.stderr)
    records: list | None = [] if trace else None
    rows = run_scenario(cfg, records)
    (outdir / "results.csv").write_text(results_csv(rows))
    if records is not None:
        with open(outdir / "trace.csv", "w", newline="") as fh:
            write_trace(records, fh)
    print(_summary(rows))
    return 0


def _crt_report(cfg: ScenarioConfig) -> bool:
    model = arch_mod.build_arch(cfg.arch_kind)
    return arch_mod.crt_check(model, cfg.crt_limit).success


def cmd_compare(
    out: str,
    headers_path: str | None = None,
    latencies_path: str | None = None,
    crt_limit: float = arch_mod.CRT_LIMIT_S,
) -> int:
    try:
        headers = arch_mod.read_header_table(headers_path) if headers_path else None
        latencies = arch_mod.read_latency_table(latencies_path) if latencies_path else {}
    except OSError as exc:
        return _err(f"cannot read override file: {exc}")
    except ValueError as exc:
        return _err(str(exc))
    processing = latencies.pop("processing", arch_mod.PROCESSING_S)
    models = [arch_mod.build_arch(k, latencies, headers) for k in arch_mod.ArchKind]
    rows = arch_mod.compare_table(models, processing)
    try:
        outdir = _prepare_out(out)
    except OSError as exc:
        return _err(f"cannot write to output directory {out}: {exc.strerror or exc}")
    text = arch_mod.comparison_csv(rows)
    (outdir / "comparison.csv").write_text(text)

    print(f"{'arch':<12}{'radio':>6}{'wire':>6}{'tun':>5}{'UP B':>6}{'CP B':>6}{'RTT ms':>9}  CRT   flags")
    for m, row in zip(models, rows):
        crt = arch_mod.crt_check(m, crt_limit, processing)
        flags = ",".join(k for k in ("onboard_upf", "roaming_free", "backhaul_agnostic", "e2e_qos") if row[k])
        print(
            f"{row['arch']:<12}{row['radio_hops']:>6}{row['wire_hops']:>6}{row['tunnel_depth']:>5}"
            f"{row['up_overhead_bytes']:>6}{row['cp_overhead_bytes']:>6}{row['cp_rtt_ms']:>9.2f}"
            f"  {'ok  ' if crt.success else 'FAIL'}  {flags}"
        )
    return 0


def cmd_sweep(base: dict, key: str, values: Sequence[str], out: str) -> int:
    key = key.lower()
    if not is_known_key(key):
        return _err(f"unknown sweep key {key!r}")
    if not values:
        return _err("sweep needs at least one value")
    configs = []
    try:
        for val in values:
            merged = dict(base)
            merged.update(parse_overrides([f"{key}={val}"]))
            configs.append((val, build_config(merged)))
        outdir = _prepare_out(out)
    except ConfigError as exc:
        return _err(str(exc))
    except OSError as exc:
        return _err(f"cannot write to output directory {out}: {exc.strerror or exc}")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("value",) + RESULT_COLUMNS)
    for val, cfg in configs:
        block = results_csv(run_scenario(cfg)).splitlines()[1:]
        for line in block:
            buf.write(f"{val},{line}\n")
        print(f"{key} = {val}: done")
    (outdir / f"sweep_{key}.csv").write_text(buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcsim", description="5G Mobile Cell scenario simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key = value scenario file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    run = sub.add_parser("run", help="run the position sweep scenario")
    common(run)
    run.add_argument("--trace", action="store_true", help="also write per-TTI trace.csv")

    cmp_ = sub.add_parser("compare", help="compare the three MC architectures")
    cmp_.add_argument("--out", default=".")
    cmp_.add_argument("--headers", help="LAYER<TAB>bytes header-size overrides")
    cmp_.add_argument("--latencies", help="KEY<TAB>ms latency overrides")
    cmp_.add_argument("--crt-ms", type=float, default=arch_mod.CRT_LIMIT_S * 1e3)

    sweep = sub.add_parser("sweep", help="rerun the scenario for each value of one key")
    common(sweep)
    sweep.add_argument("--key", required=True)
    sweep.add_argument("--values", nargs="*", default=[])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            return cmd_compare(args.out, args.headers, args.latencies, args.crt_ms / 1e3)
        if args.command == "run":
            cfg = load_config(args.config, args.overrides)
            return cmd_run(cfg, args.out, args.trace)
        base = parse_file(args.config) if args.config else {}
        base.update(parse_overrides(args.overrides))
        build_config(base)
        return cmd_sweep(base, args.key, args.values, args.out)
    except ConfigError as exc:
        return _err(str(exc))


if __name__ == "__main__":
    sys.exit(main())
