"""Ground-state DMRG over U(1) block-sparse tensors.

Three interchangeable contraction backends (block-list, sparse-dense,
sparse-sparse) share one deterministic accumulation order, so energies
are bitwise reproducible across backends' thread counts and metadata-level
flop counts agree exactly across backends.
"""

from .btensor import (FORMAT_LIST, FORMAT_SPARSE_DENSE, FORMAT_SPARSE_SPARSE,
                      FORMATS, BlockTensor, add, block_qr, block_rq, block_svd,
                      contract, convert_format, inner, kernel_backend,
                      random_tensor, scale_bond, sparsity)
from .dmrg import (BACKENDS, DMRGResult, SweepReport, SweepSchedule,
                   SweepStage, random_mps, run_dmrg)
from .errors import BlockStructureError, ResourceLimitError, TruncationError
from .netops import (MPO, MPS, canonicalize, expectation, load_mpo, load_mps,
                     mps_inner, mps_norm, save_mpo, save_mps)
from .perf import (BlockModel, CostReport, FlopCounter, block_stats,
                   cost_table, flop_scope, model_cost)
from .qn import IN, OUT, QNIndex, Sector, flux, fuse, negate
from .solver import DavidsonConfig, SolveResult, davidson

__version__ = "0.1.0"

__all__ = [
    "BACKENDS", "BlockModel", "BlockStructureError", "BlockTensor",
    "CostReport", "DMRGResult", "DavidsonConfig", "FORMATS", "FORMAT_LIST",
    "FORMAT_SPARSE_DENSE", "FORMAT_SPARSE_SPARSE", "FlopCounter", "IN", "MPO",
    "MPS", "OUT", "QNIndex", "ResourceLimitError", "Sector", "SolveResult",
    "SweepReport", "SweepSchedule", "SweepStage", "TruncationError", "add",
    "block_qr", "block_rq", "block_stats", "block_svd", "canonicalize",
    "contract", "convert_format", "cost_table", "davidson", "expectation",
    "flop_scope", "flux", "fuse", "inner", "kernel_backend", "load_mpo",
    "load_mps", "model_cost", "mps_inner", "mps_norm", "negate", "random_mps",
    "random_tensor", "run_dmrg", "save_mpo", "save_mps", "scale_bond",
    "sparsity", "__version__",
]
