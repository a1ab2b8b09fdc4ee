"""Command-line front end.

Subcommands: gen, encode, prune, decode, cost, sim, sweep. All reports
are JSON (optionally flattened to CSV for sweeps), embed the resolved
config and seeds, carry no timestamps, and are byte-identical across
reruns with equal inputs. Exit codes: 0 success, 2 data-format
violation, 3 shape or config error, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from stasim.arch import (
    GATING_MODES,
    VARIANTS,
    ArrayConfig,
    check_config,
    cost,
    cycle_count,
    load_config_file,
    parse_config_spec,
    weighted_cost,
)
from stasim.dbb import encode, footprint, load_dbb, prune_to_dbb, store_dbb
from stasim.dbb import MAGIC as DBB_MAGIC
from stasim.dbb import decode as dbb_decode
from stasim.errors import (
    ConfigError,
    DataFormatError,
    OracleMismatch,
    ShapeError,
    StasimError,
)
from stasim.matrix import (
    MAGIC as MATRIX_MAGIC,
    MAX_DIM,
    Int8Matrix,
    SparsityProfile,
    generate,
    load_matrix,
    matrix_sha256,
    store_matrix,
)
from stasim.reference import oracle_gemm
from stasim.sim import gating_stats, simulate_gemm

REPORT_VERSION = 1
LAYER_FIELDS = ["name", "mr", "k", "nc", "weight_density", "activation_density"]
DEFAULT_BASELINE = "SA:1x1x1:1x1"


@dataclass(frozen=True)
class LayerSpec:
    """One row of the layer CSV: a GEMM shape plus operand densities."""

    name: str
    mr: int
    k: int
    nc: int
    weight_density: float
    activation_density: float

    def __post_init__(self):
        if not self.name:
            raise DataFormatError("layer name must be non-empty")
        for field in ("mr", "k", "nc"):
            value = getattr(self, field)
            if not 1 <= value <= MAX_DIM:
                raise DataFormatError(f"layer {self.name}: {field}={value} out of range")
        for field in ("weight_density", "activation_density"):
            value = getattr(self, field)
            if not 0.0 < value <= 1.0:
                raise DataFormatError(f"layer {self.name}: {field}={value} not in (0, 1]")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "mr": self.mr,
            "k": self.k,
            "nc": self.nc,
            "weight_density": self.weight_density,
            "activation_density": self.activation_density,
        }


def load_layers(path) -> list[LayerSpec]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path}: empty layer CSV")
        if list(reader.fieldnames) != LAYER_FIELDS:
            raise DataFormatError(
                f"{path}: layer CSV header must be {','.join(LAYER_FIELDS)}, "
                f"got {','.join(reader.fieldnames)}"
            )
        layers = []
        for line, row in enumerate(reader, start=2):
            try:
                layers.append(
                    LayerSpec(
                        name=row["name"],
                        mr=int(row["mr"]),
                        k=int(row["k"]),
                        nc=int(row["nc"]),
                        weight_density=float(row["weight_density"]),
                        activation_density=float(row["activation_density"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise DataFormatError(f"{path}:{line}: bad layer row: {exc}") from None
    if not layers:
        raise DataFormatError(f"{path}: no layers")
    names = [layer.name for layer in layers]
    if len(set(names)) != len(names):
        raise DataFormatError(f"{path}: duplicate layer names")
    return layers


def derive_seed(master: int, *parts: str) -> int:
    """Stable 64-bit child seed for one generated operand."""
    key = ":".join([str(master), *parts]).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _emit(doc: dict, out_path) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON config document")
    parser.add_argument("--variant", choices=VARIANTS)
    parser.add_argument("--a", type=int, default=None, help="dot-product rows per PE")
    parser.add_argument("--b", type=int, default=None, help="operand pairs per dot product")
    parser.add_argument("--c", type=int, default=None, help="dot-product columns per PE")
    parser.add_argument("--m", type=int, default=None, help="PE grid rows")
    parser.add_argument("--n", type=int, default=None, help="PE grid columns")
    parser.add_argument("--dbb-nnz", dest="dbb_nnz", type=int, default=None)
    parser.add_argument("--gating", choices=GATING_MODES, default=None)


def _config_from_args(args) -> tuple[ArrayConfig, dict | None]:
    inline = [args.variant, args.a, args.b, args.c, args.m, args.n, args.dbb_nnz, args.gating]
    if args.config:
        if any(value is not None for value in inline):
            raise ConfigError("--config excludes the inline geometry flags")
        return load_config_file(args.config)
    if args.variant is None:
        raise ConfigError("need --variant (with geometry flags) or --config FILE")
    config = ArrayConfig(
        variant=args.variant,
        a=args.a if args.a is not None else 1,
        b=args.b if args.b is not None else 1,
        c=args.c if args.c is not None else 1,
        m=args.m if args.m is not None else 1,
        n=args.n if args.n is not None else 1,
        dbb_nnz=args.dbb_nnz,
        gating=args.gating if args.gating is not None else "off",
    )
    check_config(config)
    return config, None


def _load_weight_file(path):
    magic = Path(path).read_bytes()[:4]
    if magic == DBB_MAGIC:
        return load_dbb(path)
    if magic == MATRIX_MAGIC:
        w = load_matrix(path)
        if not isinstance(w, Int8Matrix):
            raise DataFormatError(f"{path}: weights must be int8")
        return w
    raise DataFormatError(f"{path}: unknown magic {magic!r}")


def cmd_gen(args) -> int:
    if args.kind == "dense":
        profile = SparsityProfile.dense(seed=args.seed)
    elif args.kind == "random":
        if args.density is None:
            raise ConfigError("--kind random needs --density")
        profile = SparsityProfile.random(args.density, seed=args.seed)
    else:
        if args.block is None or args.nnz is None:
            raise ConfigError("--kind dbb needs --block and --nnz")
        profile = SparsityProfile.dbb(
            args.block, args.nnz, seed=args.seed, density=args.density
        )
    matrix = generate(args.rows, args.cols, profile)
    store_matrix(matrix, args.output)
    return 0


def cmd_encode(args) -> int:
    w = load_matrix(args.input)
    if not isinstance(w, Int8Matrix):
        raise DataFormatError(f"{args.input}: encode needs an int8 matrix")
    store_dbb(encode(w, args.block, args.nnz), args.output)
    return 0


def cmd_decode(args) -> int:
    store_matrix(dbb_decode(load_dbb(args.input)), args.output)
    return 0


def cmd_prune(args) -> int:
    w = load_matrix(args.input)
    if not isinstance(w, Int8Matrix):
        raise DataFormatError(f"{args.input}: prune needs an int8 matrix")
    store_matrix(prune_to_dbb(w, args.block, args.nnz), args.output)
    return 0


def cmd_cost(args) -> int:
    config, weights = _config_from_args(args)
    report = cost(config)
    doc = {
        "report_version": REPORT_VERSION,
        "config_id": config.config_id,
        "config": config.as_dict(),
        "cost": report.as_dict(),
    }
    if weights:
        doc["weighted"] = weighted_cost(report, weights)
    _emit(doc, args.output)
    return 0


def cmd_sim(args) -> int:
    config, _ = _config_from_args(args)
    x = load_matrix(args.x)
    if not isinstance(x, Int8Matrix):
        raise DataFormatError(f"{args.x}: activations must be int8")
    w = _load_weight_file(args.w)
    result, stats = simulate_gemm(config, x, w)
    k = x.cols
    oracle_state = "skipped"
    if args.check_oracle:
        dense_w = dbb_decode(w) if not isinstance(w, Int8Matrix) else w
        expect = oracle_gemm(x, dense_w)
        if expect != result:
            raise OracleMismatch(
                f"simulated product differs from reference for {args.x} x {args.w}"
            )
        oracle_state = "passed"
    doc = {
        "report_version": REPORT_VERSION,
        "config_id": config.config_id,
        "config": config.as_dict(),
        "inputs": {"x": str(args.x), "w": str(args.w), "k": k},
        "result_shape": [result.rows, result.cols],
        "result_sha256": matrix_sha256(result),
        "stats": stats.as_dict(),
        "cycle_model": {
            "per_tile": cycle_count(config, k).as_dict(),
            "tiles": stats.tiles_executed,
        },
        "gating": gating_stats(stats),
        "oracle_check": oracle_state,
    }
    _emit(doc, args.output)
    return 0


def _dense_footprint(k: int, nc: int) -> dict:
    dense = k * nc
    return {
        "dense_bytes": dense,
        "mask_bytes": 0,
        "value_bytes": dense,
        "compressed_bytes": dense,
        "reduction": 0.0,
    }


def _run_sweep_entry(layer_doc: dict, config_doc: dict, master_seed: int) -> dict:
    """One (layer, config) job; returns plain dicts so it can cross
    process boundaries under --jobs."""
    layer = LayerSpec(**layer_doc)
    config = ArrayConfig.from_dict(config_doc)
    x_seed = derive_seed(master_seed, layer.name, "x")
    w_seed = derive_seed(master_seed, layer.name, "w")
    row = {
        "layer": layer.name,
        "config_id": config.config_id,
        "x_seed": x_seed,
        "w_seed": w_seed,
        "error": None,
    }
    try:
        x = generate(layer.mr, layer.k, SparsityProfile.random(layer.activation_density, x_seed))
        w = generate(layer.k, layer.nc, SparsityProfile.random(layer.weight_density, w_seed))
        if config.is_dbb:
            pruned = prune_to_dbb(w, config.b, config.dbb_nnz)
            d = encode(pruned, config.b, config.dbb_nnz)
            fp = footprint(d).as_dict()
            result, stats = simulate_gemm(config, x, d)
        else:
            fp = _dense_footprint(layer.k, layer.nc)
            result, stats = simulate_gemm(config, x, w)
        row.update(
            {
                "result_sha256": matrix_sha256(result),
                "stats": stats.as_dict(),
                "cost": cost(config).as_dict(),
                "cycle_model": {
                    "per_tile": cycle_count(config, layer.k).as_dict(),
                    "tiles": stats.tiles_executed,
                },
                "footprint": fp,
                "gating": gating_stats(stats),
            }
        )
    except StasimError as exc:
        row["error"] = str(exc)
    return row


def _efficiency_ratios(base, cand, fp: dict | None) -> dict:
    """baseline/candidate per-MAC cost (iso-throughput; higher is
    better), plus the candidate's own compressed/dense weight bytes."""
    ratios = {
        "multipliers_per_mac": base.multipliers_per_mac / cand.multipliers_per_mac,
        "adder_nodes_per_mac": base.adder_nodes_per_mac / cand.adder_nodes_per_mac,
        "operand_regs_per_mac": base.operand_regs_per_mac / cand.operand_regs_per_mac,
        "accumulator_regs_per_mac": base.accumulator_regs_per_mac
        / cand.accumulator_regs_per_mac,
        "register_bits_per_mac": base.register_bits_per_mac / cand.register_bits_per_mac,
    }
    if fp is not None:
        ratios["weight_footprint_fraction"] = fp["compressed_bytes"] / fp["dense_bytes"]
    return ratios


def cmd_sweep(args) -> int:
    layers = load_layers(args.layers)
    configs: list[ArrayConfig] = []
    for spec in args.config_spec or []:
        configs.append(parse_config_spec(spec))
    for path in args.config_file or []:
        config, _ = load_config_file(path)
        configs.append(config)
    if not configs:
        raise ConfigError("sweep needs at least one -c/--config-spec or --config-file")
    ids = [config.config_id for config in configs]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate config ids in sweep: {ids}")
    by_id = dict(zip(ids, configs))
    baseline_text = args.baseline or DEFAULT_BASELINE
    baseline = by_id.get(baseline_text) or parse_config_spec(baseline_text)
    base_cost = cost(baseline)

    jobs = [
        (layer.as_dict(), config.as_dict())
        for layer in layers
        for config in configs
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(
                pool.map(_run_sweep_entry, *zip(*jobs), [args.seed] * len(jobs))
            )
    else:
        rows = [_run_sweep_entry(ld, cd, args.seed) for ld, cd in jobs]
    # deterministic assembly no matter how entries were scheduled
    order = {name: i for i, name in enumerate(layer.name for layer in layers)}
    corder = {cid: i for i, cid in enumerate(ids)}
    rows.sort(key=lambda row: (order[row["layer"]], corder[row["config_id"]]))
    for row in rows:
        if row["error"] is None:
            cand = cost(by_id[row["config_id"]])
            row["ratios"] = _efficiency_ratios(base_cost, cand, row["footprint"])
        else:
            row["ratios"] = None
    doc = {
        "report_version": REPORT_VERSION,
        "seed": args.seed,
        "baseline": {"config_id": baseline.config_id, "config": baseline.as_dict()},
        "normalization": "ratio = baseline_per_mac / candidate_per_mac at equal "
        "effective MACs per cycle; higher is better",
        "layers": [layer.as_dict() for layer in layers],
        "configs": [
            {"config_id": config.config_id, "config": config.as_dict()} for config in configs
        ],
        "results": rows,
    }
    _emit(doc, args.output)
    if args.csv:
        _write_csv(rows, args.csv)
    return 0


def _flatten(prefix: str, value, into: dict) -> None:
    if isinstance(value, dict):
        for key in value:
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], into)
    else:
        into[prefix] = value


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(rows: list[dict], path) -> None:
    """Flatten the JSON result rows; values are identical, column names
    join nested keys with dots."""
    flat_rows = []
    columns: list[str] = []
    seen = set()
    for row in rows:
        flat: dict = {}
        _flatten("", row, flat)
        flat_rows.append(flat)
        for key in flat:
            if key not in seen:
                seen.add(key)
                columns.append(key)
    head = [c for c in ("layer", "config_id") if c in seen]
    columns = head + sorted(c for c in columns if c not in head)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for flat in flat_rows:
            writer.writerow([_csv_cell(flat.get(column)) for column in columns])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stasim",
        description="Systolic tensor array simulator and cost model "
        "with density-bound block sparse weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded random matrix file")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--kind", choices=("dense", "random", "dbb"), required=True)
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--block", type=int, default=None, help="dbb block size")
    p.add_argument("--nnz", type=int, default=None, help="dbb per-block bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("encode", help="compress a matrix file to DBB form")
    p.add_argument("input")
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--nnz", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="expand a DBB file back to dense")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("prune", help="magnitude-prune a matrix to a DBB bound")
    p.add_argument("input")
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--nnz", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("cost", help="structural cost report for a config")
    _add_config_flags(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("sim", help="simulate one GEMM from matrix files")
    p.add_argument("x", help="activation file (.stam)")
    p.add_argument("w", help="weight file (.stam or .stad)")
    _add_config_flags(p)
    p.add_argument("--check-oracle", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("sweep", help="run a layer CSV across configs")
    p.add_argument("layers", help="CSV: " + ",".join(LAYER_FIELDS))
    p.add_argument(
        "-c", "--config-spec", action="append",
        help="compact config VARIANT:AxBxC:MxN[:nnzK][:GATING]; repeatable",
    )
    p.add_argument("--config-file", action="append", help="JSON config; repeatable")
    p.add_argument(
        "--baseline", default=None,
        help=f"config id or compact spec (default {DEFAULT_BASELINE})",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", default=None, help="also write flattened CSV here")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataFormatError as exc:  # BoundViolation included
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShapeError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OracleMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        # unreadable or missing input files are data errors, not crashes
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
