"""stasim: systolic tensor array simulation and cost modeling.

Bit-exact, cycle-accurate simulation of output-stationary systolic
GEMM arrays (scalar PEs, tensor PEs, and tensor PEs with density-bound
block sparse weights), the matching analytical cycle and structural
cost models, a complete DBB sparse codec and magnitude pruner, and a
CLI for generation, encoding, simulation and layer sweeps.
"""

from stasim._kernels import available_backends, current_backend
from stasim.arch import (
    ArrayConfig,
    CostReport,
    CycleModel,
    cost,
    cycle_count,
    parse_config_spec,
    validate_config,
    weighted_cost,
)
from stasim.dbb import (
    DBBMatrix,
    FootprintReport,
    decode,
    encode,
    footprint,
    load_dbb,
    prune_to_dbb,
    store_dbb,
)
from stasim.dbb import validate as validate_dbb
from stasim.errors import (
    BoundViolation,
    ConfigError,
    DataFormatError,
    OracleMismatch,
    ShapeError,
    StasimError,
)
from stasim.matrix import (
    AccMatrix,
    Int8Matrix,
    SparsityProfile,
    generate,
    load_matrix,
    matrix_sha256,
    store_matrix,
)
from stasim.reference import OracleResult, block_nnz_histogram, oracle_gemm, run_oracle
from stasim.sim import SimStats, TileSchedule, gating_stats, simulate_gemm, simulate_tile

__version__ = "0.1.0"

__all__ = [
    "AccMatrix",
    "ArrayConfig",
    "BoundViolation",
    "ConfigError",
    "CostReport",
    "CycleModel",
    "DBBMatrix",
    "DataFormatError",
    "FootprintReport",
    "Int8Matrix",
    "OracleMismatch",
    "OracleResult",
    "ShapeError",
    "SimStats",
    "SparsityProfile",
    "StasimError",
    "TileSchedule",
    "available_backends",
    "block_nnz_histogram",
    "cost",
    "current_backend",
    "cycle_count",
    "decode",
    "encode",
    "footprint",
    "gating_stats",
    "generate",
    "load_dbb",
    "load_matrix",
    "matrix_sha256",
    "oracle_gemm",
    "parse_config_spec",
    "prune_to_dbb",
    "run_oracle",
    "simulate_gemm",
    "simulate_tile",
    "store_dbb",
    "store_matrix",
    "validate_config",
    "validate_dbb",
    "weighted_cost",
    "__version__",
]
