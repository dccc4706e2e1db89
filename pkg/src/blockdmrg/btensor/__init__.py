"""Block-sparse tensor algebra with U(1) charge conservation."""

from .contract import ContractionSpec, contract
from .core import (FORMAT_LIST, FORMAT_SPARSE_DENSE, FORMAT_SPARSE_SPARSE,
                   FORMATS, BlockTensor, add, admissible_keys, combine_format,
                   inner, random_tensor, sparsity)
from .decomp import block_qr, block_rq, block_svd, scale_bond
from .kernels import get_num_threads, kernel_backend, set_num_threads
from .snapshot import load_tensor, read_tensor, save_tensor, write_tensor


def convert_format(t: BlockTensor, fmt: str) -> BlockTensor:
    """Return ``t`` stored in ``fmt`` (same logical tensor)."""
    return t.convert(fmt)


__all__ = [
    "FORMAT_LIST", "FORMAT_SPARSE_DENSE", "FORMAT_SPARSE_SPARSE", "FORMATS",
    "BlockTensor", "ContractionSpec", "add", "admissible_keys", "block_qr",
    "block_rq", "block_svd", "combine_format", "contract", "convert_format",
    "get_num_threads", "inner", "kernel_backend", "load_tensor", "random_tensor",
    "read_tensor", "save_tensor", "scale_bond", "set_num_threads", "sparsity",
    "write_tensor",
]
