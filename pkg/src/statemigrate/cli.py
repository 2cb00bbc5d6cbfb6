"""Command-line entry point: ``statemigrate <subcommand> ...``.

Exit codes: 0 success, 1 usage/config/IO problems, 2 lex/parse errors,
3 layout/analysis/state errors, 4 planning errors, 5 simulation divergence
(including a final state that differs from the source).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .analysis import UsageProfile, compute_priority_vector
from .errors import ConfigError, MigrationError
from .metrics import build_report, emit_json, emit_report, plot_data
from .pipeline import Config, analyze_file
from .plan import GasModel, MigrationPlan, order_shards, pack_batches
from .sim import MigrationTrace, execute_plan
from .state import KeyEnumeration, Snapshot, encode_state, generate_shards, normalize_values

EXIT_DIVERGENCE = 5


def _read_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from None


def _write(text: str, output: Optional[str]):
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _config(args) -> Config:
    config = Config.load(args.config) if getattr(args, "config", None) else Config()
    gm = config.gas_model
    gas_model = GasModel(
        args.tx_base if args.tx_base is not None else gm.tx_base,
        args.per_slot_write if args.per_slot_write is not None else gm.per_slot_write,
        args.per_calldata_byte if args.per_calldata_byte is not None else gm.per_calldata_byte,
    )
    weights = (
        args.w_freq if args.w_freq is not None else config.weights[0],
        args.w_crit if args.w_crit is not None else config.weights[1],
    )
    return config.override(
        gas_limit=args.gas_limit,
        gas_model=gas_model,
        weights=weights,
        max_slots_per_batch=args.max_slots_per_batch,
        t_acceptable=getattr(args, "t_acceptable", None),
        source_address=args.source_address,
        target_address=args.target_address,
        profile=getattr(args, "profile", None),
        keys=getattr(args, "keys", None),
        snapshot=getattr(args, "snapshot", None),
    )


def _profile(config: Config) -> UsageProfile:
    return UsageProfile.from_json(_read_json(config.profile, "profile")) if config.profile else UsageProfile.empty()


def _keys(config: Config) -> KeyEnumeration:
    return KeyEnumeration.from_json(_read_json(config.keys, "key enumeration")) if config.keys else KeyEnumeration.empty()


def cmd_layout(args) -> int:
    _write(analyze_file(args.src, args.contract).layout.dumps(), args.output)
    return 0


def cmd_matrix(args) -> int:
    _write(analyze_file(args.src, args.contract).matrix.to_csv(), args.output)
    return 0


def cmd_priority(args) -> int:
    config = _config(args)
    a = analyze_file(args.src, args.contract)
    pv = compute_priority_vector(a.matrix.functions, _profile(config), config.weights)
    _write(_dumps(pv.to_json()), args.output)
    return 0


def cmd_plan(args) -> int:
    config = _config(args)
    if not config.snapshot:
        raise ConfigError("plan needs a snapshot (--snapshot or paths.snapshot in the config)")
    a = analyze_file(args.src, args.contract)
    snapshot = Snapshot.from_json(_read_json(config.snapshot, "snapshot"))
    pv = compute_priority_vector(a.matrix.functions, _profile(config), config.weights)
    shards = generate_shards(a.layout, snapshot, _keys(config))
    plan = pack_batches(order_shards(shards, a.matrix, pv), a.matrix, config.gas_limit, config.gas_model,
                        config.max_slots_per_batch, config.source_address, config.target_address)
    _write(plan.dumps(), args.output)
    return 0


def cmd_simulate(args) -> int:
    plan = MigrationPlan.from_json(_read_json(args.plan, "plan"))
    snapshot = Snapshot.from_json(_read_json(args.snapshot, "snapshot"))
    _, trace = execute_plan(plan, snapshot)
    _write(trace.dumps(), args.output)
    if not trace.final_equal:
        print(f"statemigrate: target state differs from source: "
              f"{len(trace.equality.missing)} missing, {len(trace.equality.extra)} extra, "
              f"{len(trace.equality.mismatched)} mismatched slot(s)", file=sys.stderr)
        return EXIT_DIVERGENCE
    return 0


def cmd_fat(args) -> int:
    if args.trace and len(args.src) != 1:
        raise ConfigError("--trace applies to a single source file")
    trace = MigrationTrace.from_json(_read_json(args.trace, "trace")) if args.trace else None
    reports = []
    for src in args.src:
        a = analyze_file(src, args.contract)
        reports.append(build_report(Path(src).stem, a.matrix, trace, args.t_acceptable))
    if args.plot_data:
        _write(plot_data(reports), args.output)
    elif args.json:
        _write(emit_json(reports), args.output)
    else:
        _write(emit_report(reports), args.output)
    return 0


def cmd_genesis(args) -> int:
    a = analyze_file(args.src, args.contract)
    values = _read_json(args.values, "values")
    if not isinstance(values, dict):
        raise ConfigError("values file must hold a JSON object")
    if args.keys:
        keys = KeyEnumeration.from_json(_read_json(args.keys, "key enumeration"))
    else:
        keys = KeyEnumeration.from_values(a.layout, normalize_values(a.layout, values))
    snapshot = encode_state(a.layout, values, keys)
    _write(snapshot.dumps(), args.output)
    if args.emit_keys:
        Path(args.emit_keys).write_text(_dumps(keys.to_json()), encoding="utf-8")
    return 0


def _common(p: argparse.ArgumentParser, src: bool = True):
    if src:
        p.add_argument("src", help="Solidity source file")
    p.add_argument("--contract", help="contract to analyze (default: the last one in the file)")
    p.add_argument("-o", "--output", help="write the result here instead of standard output")


def _tuning(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--gas-limit", type=int, help="per-transaction gas limit (default 1000000)")
    p.add_argument("--max-slots-per-batch", type=int, help="cap on slot writes per batch")
    p.add_argument("--tx-base", type=int, help="gas charged per transaction (default 21000)")
    p.add_argument("--per-slot-write", type=int, help="gas per slot write (default 22100)")
    p.add_argument("--per-calldata-byte", type=int, help="gas per calldata byte (default 16)")
    p.add_argument("--w-freq", type=float, help="priority weight of call frequency (default 0.5)")
    p.add_argument("--w-crit", type=float, help="priority weight of criticality (default 0.5)")
    p.add_argument("--source-address", help="address of the contract being migrated (metadata)")
    p.add_argument("--target-address", help="address of the new contract (metadata)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statemigrate",
        description="Plan and simulate incremental, priority-ordered migration of contract storage.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("layout", help="print the storage layout as JSON")
    _common(p)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("matrix", help="print the function/data dependency matrix as CSV")
    _common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("priority", help="print function priority scores and ranks as JSON")
    _common(p)
    _tuning(p)
    p.add_argument("--profile", help="usage profile JSON {function: {calls, criticality}}")
    p.set_defaults(func=cmd_priority)

    p = sub.add_parser("plan", help="build a gas-limited migration plan")
    _common(p)
    _tuning(p)
    p.add_argument("--snapshot", help="source state snapshot JSON")
    p.add_argument("--keys", help="mapping key enumeration JSON")
    p.add_argument("--profile", help="usage profile JSON")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="execute a plan on a simulated chain and verify the result")
    p.add_argument("plan", help="plan JSON produced by the plan command")
    p.add_argument("--snapshot", required=True, help="source state snapshot JSON")
    p.add_argument("-o", "--output", help="write the trace here instead of standard output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fat", help="function activation threshold report")
    p.add_argument("src", nargs="+", help="one or more Solidity source files")
    p.add_argument("--contract", help="contract to analyze in each file (default: the last one)")
    p.add_argument("-o", "--output", help="write the report here instead of standard output")
    p.add_argument("--trace", help="trace JSON from simulate, adds per-function downtime")
    p.add_argument("--t-acceptable", type=int, help="flag functions whose activation costs more gas than this")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="machine-readable JSON instead of Markdown")
    fmt.add_argument("--plot-data", action="store_true", help="CSV rows for a bar chart")
    p.set_defaults(func=cmd_fat)

    p = sub.add_parser("genesis", help="encode high-level values into a state snapshot")
    _common(p)
    p.add_argument("--values", required=True, help="JSON object of variable values")
    p.add_argument("--keys", help="mapping key enumeration JSON (default: keys present in the values)")
    p.add_argument("--emit-keys", help="also write the key enumeration used to this path")
    p.set_defaults(func=cmd_genesis)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MigrationError as exc:
        print(f"statemigrate: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"statemigrate: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
