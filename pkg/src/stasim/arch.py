"""Array geometry, structural cost model, and the analytical cycle model.

Geometry notation: an `m x n` grid of tensor processing elements (PEs),
each holding an `a x c` grid of dot-product units that consume `b`
operand pairs per cycle, written AxBxC_MxN. The classic scalar array is
the 1x1x1 PE; the density-bound sparse PE keeps only `dbb_nnz` physical
multiplier lanes per dot unit and steers activations to them with
b-to-1 multiplexers driven by stored non-zero indices.

Variants:

    SA_NCG  scalar PE, no clock gating counters
    SA      scalar PE
    STA     tensor PE, dense weights
    STA_DBB tensor PE, density-bound block weights

Costs are closed forms per PE multiplied across the grid; an
independent structural enumeration lives in stasim.netlist for
cross-checking. Per-MAC figures divide by the logical MAC throughput
m*n*a*b*c, which is what makes configs of different grid sizes
comparable at equal throughput.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from stasim.errors import ConfigError

VARIANTS = ("SA_NCG", "SA", "STA", "STA_DBB")
GATING_MODES = ("off", "lane", "pe")

# coefficient table keys accepted for weighted roll-ups
WEIGHT_KINDS = ("multiplier", "adder_node", "register_bit", "mux2")


@dataclass(frozen=True)
class ArrayConfig:
    """One array geometry plus its gating mode."""

    variant: str
    a: int = 1
    b: int = 1
    c: int = 1
    m: int = 1
    n: int = 1
    dbb_nnz: int | None = None
    gating: str = "off"

    @property
    def is_dbb(self) -> bool:
        return self.variant == "STA_DBB"

    @property
    def lanes_per_dot(self) -> int:
        """Physical multiplier lanes in one dot-product unit."""
        return self.dbb_nnz if self.is_dbb else self.b

    @property
    def total_lanes(self) -> int:
        return self.m * self.n * self.a * self.c * self.lanes_per_dot

    @property
    def tile_rows(self) -> int:
        """Output rows one tile covers."""
        return self.m * self.a

    @property
    def tile_cols(self) -> int:
        return self.n * self.c

    @property
    def effective_macs_per_cycle(self) -> int:
        """Logical multiply-accumulates per cycle, all variants."""
        return self.m * self.n * self.a * self.b * self.c

    @property
    def index_bits(self) -> int:
        """Width of one stored non-zero index: ceil(log2(b))."""
        return (self.b - 1).bit_length()

    @property
    def config_id(self) -> str:
        base = f"{self.variant}-{self.a}x{self.b}x{self.c}_{self.m}x{self.n}"
        if self.dbb_nnz is not None:
            base += f"-nnz{self.dbb_nnz}"
        return f"{base}-{self.gating}"

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "m": self.m,
            "n": self.n,
            "dbb_nnz": self.dbb_nnz,
            "gating": self.gating,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ArrayConfig":
        unknown = set(doc) - {"variant", "a", "b", "c", "m", "n", "dbb_nnz", "gating"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "variant" not in doc:
            raise ConfigError("config needs a variant")
        cfg = cls(**doc)
        check_config(cfg)
        return cfg


def validate_config(config: ArrayConfig) -> list[str]:
    """All rule violations, empty list when the config is usable."""
    problems = []
    if config.variant not in VARIANTS:
        problems.append(f"unknown variant {config.variant!r}")
    for name in ("a", "b", "c", "m", "n"):
        value = getattr(config, name)
        if not isinstance(value, int) or value < 1:
            problems.append(f"{name} must be a positive integer, got {value!r}")
    if config.gating not in GATING_MODES:
        problems.append(f"gating must be one of {GATING_MODES}, got {config.gating!r}")
    if config.variant in ("SA", "SA_NCG"):
        if (config.a, config.b, config.c) != (1, 1, 1):
            problems.append(f"{config.variant} requires a=b=c=1")
    if config.variant == "SA_NCG" and config.gating != "off":
        problems.append("SA_NCG has no gating hardware; gating must be off")
    if config.variant == "STA_DBB":
        if config.dbb_nnz is None:
            problems.append("STA_DBB requires dbb_nnz")
        elif not isinstance(config.dbb_nnz, int) or config.dbb_nnz < 1:
            problems.append(f"dbb_nnz must be a positive integer, got {config.dbb_nnz!r}")
        elif isinstance(config.b, int) and config.b >= 1 and config.dbb_nnz > config.b:
            problems.append(f"dbb_nnz <= b required, got {config.dbb_nnz} > {config.b}")
        if isinstance(config.b, int) and config.b > 255:
            problems.append("STA_DBB needs b <= 255 (block size is one byte on disk)")
    elif config.dbb_nnz is not None:
        problems.append(f"dbb_nnz only applies to STA_DBB, not {config.variant}")
    return problems


def check_config(config: ArrayConfig) -> None:
    problems = validate_config(config)
    if problems:
        raise ConfigError("; ".join(problems))


@dataclass(frozen=True)
class CostReport:
    """Structural resource counts for a whole array.

    Register fields are in bits; `multipliers_8b`, `adder_nodes` and
    `mux_count` are unit counts. One dot unit carries lanes-1 tree adder
    nodes plus one accumulate node. Per-MAC properties normalize by
    effective (logical) MACs per cycle, so a sparse PE that resolves
    a*b*c logical MACs with a*dbb_nnz*c multipliers reports
    multipliers_per_mac = dbb_nnz/b.
    """

    multipliers_8b: int
    adder_nodes: int
    operand_regs_bits: int
    accumulator_regs_bits: int
    index_reg_bits: int
    mux_count: int
    mux_width: int
    effective_macs_per_cycle: int

    @property
    def total_register_bits(self) -> int:
        return self.operand_regs_bits + self.accumulator_regs_bits + self.index_reg_bits

    @property
    def multipliers_per_mac(self) -> float:
        return self.multipliers_8b / self.effective_macs_per_cycle

    @property
    def adder_nodes_per_mac(self) -> float:
        return self.adder_nodes / self.effective_macs_per_cycle

    @property
    def operand_regs_per_mac(self) -> float:
        """8-bit operand registers per logical MAC."""
        return self.operand_regs_bits / 8 / self.effective_macs_per_cycle

    @property
    def accumulator_regs_per_mac(self) -> float:
        """32-bit accumulator registers per logical MAC."""
        return self.accumulator_regs_bits / 32 / self.effective_macs_per_cycle

    @property
    def accumulator_bits_per_mac(self) -> float:
        return self.accumulator_regs_bits / self.effective_macs_per_cycle

    @property
    def index_reg_bits_per_mac(self) -> float:
        return self.index_reg_bits / self.effective_macs_per_cycle

    @property
    def mux_per_mac(self) -> float:
        return self.mux_count / self.effective_macs_per_cycle

    @property
    def register_bits_per_mac(self) -> float:
        return self.total_register_bits / self.effective_macs_per_cycle

    def as_dict(self) -> dict:
        return {
            "multipliers_8b": self.multipliers_8b,
            "adder_nodes": self.adder_nodes,
            "operand_regs_bits": self.operand_regs_bits,
            "accumulator_regs_bits": self.accumulator_regs_bits,
            "index_reg_bits": self.index_reg_bits,
            "mux_count": self.mux_count,
            "mux_width": self.mux_width,
            "effective_macs_per_cycle": self.effective_macs_per_cycle,
            "total_register_bits": self.total_register_bits,
            "multipliers_per_mac": self.multipliers_per_mac,
            "adder_nodes_per_mac": self.adder_nodes_per_mac,
            "operand_regs_per_mac": self.operand_regs_per_mac,
            "accumulator_regs_per_mac": self.accumulator_regs_per_mac,
            "accumulator_bits_per_mac": self.accumulator_bits_per_mac,
            "index_reg_bits_per_mac": self.index_reg_bits_per_mac,
            "mux_per_mac": self.mux_per_mac,
            "register_bits_per_mac": self.register_bits_per_mac,
        }


def cost(config: ArrayConfig) -> CostReport:
    """Closed-form structural costs for the whole m x n array."""
    check_config(config)
    a, b, c = config.a, config.b, config.c
    grid = config.m * config.n
    lanes = config.lanes_per_dot
    if config.is_dbb:
        weight_reg_bits = config.dbb_nnz * c * 8
        index_bits = config.dbb_nnz * c * config.index_bits
        mux_count = grid * a * config.dbb_nnz * c
        mux_width = b
    else:
        weight_reg_bits = b * c * 8
        index_bits = 0
        mux_count = 0
        mux_width = 0
    return CostReport(
        multipliers_8b=grid * a * c * lanes,
        adder_nodes=grid * a * c * lanes,
        operand_regs_bits=grid * (a * b * 8 + weight_reg_bits),
        accumulator_regs_bits=grid * a * c * 32,
        index_reg_bits=grid * index_bits,
        mux_count=mux_count,
        mux_width=mux_width,
        effective_macs_per_cycle=config.effective_macs_per_cycle,
    )


def weighted_cost(report: CostReport, weights: dict) -> dict:
    """Roll the counts into one number using user area/power coefficients.

    Kinds: multiplier (per 8-bit multiplier), adder_node (per node),
    register_bit (per stored bit, operands + accumulators + indices),
    mux2 (per 2:1 mux equivalent; a b:1 mux counts b-1 of them).
    Missing kinds contribute zero; unknown kinds are rejected.
    """
    unknown = set(weights) - set(WEIGHT_KINDS)
    if unknown:
        raise ConfigError(f"unknown weight kinds: {sorted(unknown)}")
    total = (
        report.multipliers_8b * float(weights.get("multiplier", 0.0))
        + report.adder_nodes * float(weights.get("adder_node", 0.0))
        + report.total_register_bits * float(weights.get("register_bit", 0.0))
        + report.mux_count * max(report.mux_width - 1, 0) * float(weights.get("mux2", 0.0))
    )
    return {
        "weighted_total": total,
        "weighted_per_mac": total / report.effective_macs_per_cycle,
    }


@dataclass(frozen=True)
class CycleModel:
    """Analytical tile latency; the simulator must measure exactly this."""

    stream_cycles: int
    skew_cycles: int
    readout_cycles: int
    total_cycles: int = field(default=0)

    def __post_init__(self):
        expected = self.stream_cycles + self.skew_cycles + self.readout_cycles
        if self.total_cycles == 0:
            object.__setattr__(self, "total_cycles", expected)
        elif self.total_cycles != expected:
            raise ConfigError(f"total_cycles {self.total_cycles} != {expected}")

    def as_dict(self) -> dict:
        return {
            "stream_cycles": self.stream_cycles,
            "skew_cycles": self.skew_cycles,
            "readout_cycles": self.readout_cycles,
            "total_cycles": self.total_cycles,
        }


def cycle_count(config: ArrayConfig, k: int) -> CycleModel:
    """Cycles for one output tile over a length-k reduction.

    stream: ceil(k/b) operand groups enter one PE per cycle;
    skew: (m-1)+(n-1) cycles for the wavefront to cross the grid;
    readout: m*a cycles to drain accumulator rows down the column chains.
    """
    check_config(config)
    if k < 1:
        raise ConfigError(f"k must be positive, got {k}")
    return CycleModel(
        stream_cycles=-(-k // config.b),
        skew_cycles=(config.m - 1) + (config.n - 1),
        readout_cycles=config.m * config.a,
    )


def parse_config_spec(text: str) -> ArrayConfig:
    """Parse the compact form VARIANT:AxBxC:MxN[:nnzK][:GATING].

    Examples: "SA:1x1x1:1x1", "STA:4x8x4:2x2:lane",
    "STA_DBB:2x4x2:2x2:nnz2:pe".
    """
    parts = text.strip().split(":")
    if len(parts) < 3:
        raise ConfigError(f"config spec needs VARIANT:AxBxC:MxN, got {text!r}")
    variant = parts[0]
    try:
        a, b, c = (int(v) for v in parts[1].split("x"))
        m, n = (int(v) for v in parts[2].split("x"))
    except ValueError:
        raise ConfigError(f"bad geometry in config spec {text!r}") from None
    dbb_nnz = None
    gating = "off"
    for extra in parts[3:]:
        if extra.startswith("nnz"):
            try:
                dbb_nnz = int(extra[3:])
            except ValueError:
                raise ConfigError(f"bad nnz field in config spec {text!r}") from None
        elif extra in GATING_MODES:
            gating = extra
        else:
            raise ConfigError(f"unknown config spec field {extra!r}")
    cfg = ArrayConfig(variant=variant, a=a, b=b, c=c, m=m, n=n, dbb_nnz=dbb_nnz, gating=gating)
    check_config(cfg)
    return cfg


def load_config_file(path) -> tuple[ArrayConfig, dict | None]:
    """Read a JSON config document, returning (config, weights or None)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    weights = doc.pop("weights", None)
    if weights is not None:
        if not isinstance(weights, dict):
            raise ConfigError("weights must be a table of kind -> coefficient")
        unknown = set(weights) - set(WEIGHT_KINDS)
        if unknown:
            raise ConfigError(f"unknown weight kinds: {sorted(unknown)}")
    return ArrayConfig.from_dict(doc), weights
