"""Pairwise block-sparse tensor contraction.

The blockwise algorithm is the same for every storage format: match block
pairs on their contracted charges, multiply each matched pair as a folded
matrix product, and accumulate contributions into the output block addressed
by the free charges.  Contributions are accumulated in lexicographic
``(key_a, key_b)`` order with product-then-add semantics, and threading
parallelizes over independent output blocks, so the result is bitwise
reproducible for any thread count and either pair kernel.

Format policy: if either operand is sparse-dense the result is sparse-dense
(computed as one dense tensordot over the full arrays — such intermediates
only appear inside the eigensolver); otherwise if either operand is
sparse-sparse the result is sparse-sparse; otherwise list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import perf
from ..errors import BlockStructureError
from ..qn import fuse
from . import kernels
from .core import (FORMAT_LIST, FORMAT_SPARSE_DENSE, FORMAT_SPARSE_SPARSE,
                   BlockTensor, combine_format)


@dataclass(frozen=True)
class ContractionSpec:
    """Which mode pairs to contract and how to order the result modes.

    ``pairs``: (mode of a, mode of b) tuples; each joins an index with its
    dual.  ``out_order``: permutation applied to the default result mode
    order (free modes of ``a`` then free modes of ``b``); None keeps it.
    """

    pairs: tuple
    out_order: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))
        if self.out_order is not None:
            object.__setattr__(self, "out_order", tuple(int(p) for p in self.out_order))


def contract(a: BlockTensor, b: BlockTensor, spec, out_order=None) -> BlockTensor:
    """Contract two block tensors.

    ``spec`` may be a :class:`ContractionSpec` or a bare pair sequence (with
    ``out_order`` supplied separately).
    """
    if not isinstance(spec, ContractionSpec):
        spec = ContractionSpec(tuple(spec), out_order)
    a_modes = tuple(p[0] for p in spec.pairs)
    b_modes = tuple(p[1] for p in spec.pairs)
    _validate_spec(a, b, a_modes, b_modes)

    free_a = tuple(m for m in range(a.ndim) if m not in a_modes)
    free_b = tuple(m for m in range(b.ndim) if m not in b_modes)
    n_out = len(free_a) + len(free_b)
    perm = spec.out_order
    if perm is not None:
        if sorted(perm) != list(range(n_out)):
            raise BlockStructureError(f"out_order {perm} is not a permutation of {n_out} modes")
        if perm == tuple(range(n_out)):
            perm = None

    out_indices = tuple(a.indices[m] for m in free_a) + tuple(b.indices[m] for m in free_b)
    if perm is not None:
        out_indices = tuple(out_indices[p] for p in perm)
    total = fuse(a.total_charge, b.total_charge)
    fmt = combine_format(a.format, b.format)

    groups = _match(a.keys(), b.keys(), a_modes, b_modes, free_a, free_b)
    perf.record("contract", _pair_flops(a, b, a_modes, free_a, free_b, groups))

    if fmt == FORMAT_SPARSE_DENSE:
        dense = np.tensordot(a.to_dense(), b.to_dense(), axes=(a_modes, b_modes))
        if perm is not None:
            dense = np.ascontiguousarray(np.transpose(dense, perm))
        keys = sorted(_permute_key(k, perm) for k in groups)
        return BlockTensor(out_indices, total, fmt, dense=dense, keys=tuple(keys))

    # materialize operand blocks once (cheap for list, a gather for coo)
    need_a = {ka for pairs in groups.values() for ka, _ in pairs}
    need_b = {kb for pairs in groups.values() for _, kb in pairs}
    blk_a = {k: a.block(k) for k in need_a}
    blk_b = {k: b.block(k) for k in need_b}

    tasks = []
    for okey in sorted(groups):
        tasks.append(_block_task(okey, groups[okey], a, b, blk_a, blk_b,
                                 a_modes, b_modes, free_a, free_b, perm))
    results = kernels.run_tasks(tasks)
    blocks = {key: arr for key, arr in results}
    out = BlockTensor(out_indices, total, FORMAT_LIST, blocks=blocks)
    return out.convert(fmt) if fmt != FORMAT_LIST else out


def _validate_spec(a, b, a_modes, b_modes):
    if len(set(a_modes)) != len(a_modes) or len(set(b_modes)) != len(b_modes):
        raise BlockStructureError("repeated mode in contraction pairs")
    for i, j in zip(a_modes, b_modes):
        if not (0 <= i < a.ndim and 0 <= j < b.ndim):
            raise BlockStructureError(f"contraction pair ({i},{j}) out of range")
        if not a.indices[i].is_dual_of(b.indices[j]):
            raise BlockStructureError(
                f"mode {i} of a is not dual to mode {j} of b "
                f"({a.indices[i]!r} vs {b.indices[j]!r})")


def _match(a_keys, b_keys, a_modes, b_modes, free_a, free_b):
    """Group matched block pairs by (unpermuted) output key.

    Pair lists come out sorted by (key_a, key_b): a_keys/b_keys arrive
    sorted, so insertion order is already lexicographic.
    """
    by_sig = {}
    for kb in b_keys:
        by_sig.setdefault(tuple(kb[j] for j in b_modes), []).append(kb)
    groups = {}
    for ka in a_keys:
        sig = tuple(ka[i] for i in a_modes)
        for kb in by_sig.get(sig, ()):
            okey = tuple(ka[i] for i in free_a) + tuple(kb[j] for j in free_b)
            groups.setdefault(okey, []).append((ka, kb))
    return groups


def _pair_flops(a, b, a_modes, free_a, free_b, groups):
    flops = 0
    for pairs in groups.values():
        for ka, kb in pairs:
            n = 2
            for m in a_modes:
                n *= a.indices[m].dim_of(ka[m])
            for m in free_a:
                n *= a.indices[m].dim_of(ka[m])
            for m in free_b:
                n *= b.indices[m].dim_of(kb[m])
            flops += n
    return flops


def _permute_key(key, perm):
    return key if perm is None else tuple(key[p] for p in perm)


def _block_task(okey, pairs, a, b, blk_a, blk_b, a_modes, b_modes,
                free_a, free_b, perm):
    """Build the callable computing one output block (runs on any thread)."""

    def task():
        ra = tuple(a.indices[m].dim_of(okey_a) for m, okey_a in zip(free_a, okey))
        rb = tuple(b.indices[m].dim_of(q) for m, q in zip(free_b, okey[len(free_a):]))
        m_dim = int(np.prod(ra)) if ra else 1
        n_dim = int(np.prod(rb)) if rb else 1
        folded = []
        for ka, kb in pairs:
            blka = blk_a[ka]
            blkb = blk_b[kb]
            k_dim = 1
            for m in a_modes:
                k_dim *= blka.shape[m]
            a2 = np.ascontiguousarray(
                np.transpose(blka, free_a + a_modes).reshape(m_dim, k_dim))
            b2 = np.ascontiguousarray(
                np.transpose(blkb, b_modes + free_b).reshape(k_dim, n_dim))
            folded.append((a2, b2))
        out2 = np.zeros((m_dim, n_dim))
        kernels.accumulate_pair_products(out2, folded)
        block = out2.reshape(ra + rb)
        if perm is not None:
            block = np.ascontiguousarray(np.transpose(block, perm))
        return _permute_key(okey, perm), block

    return task
