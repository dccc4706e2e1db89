"""Flux-conserving block-sparse tensors in three storage formats.

A :class:`BlockTensor` is a real (float64) tensor whose modes are
:class:`~blockdmrg.qn.QNIndex` objects.  Only blocks whose flux (inward minus
outward charges) equals the tensor's total charge may be nonzero.  The same
logical tensor can be held in three ways:

``"list"``
    one dense ndarray per admissible block, keyed by its charge tuple;
``"sparse-dense"``
    a single dense ndarray of the tensor's full shape (canonical sector
    layout) plus the list of block keys as metadata;
``"sparse-sparse"``
    per-block coordinate lists: flat row-major positions and values.

Converting between formats never changes element values, and every stored
block key survives a round trip even if its data happens to be zero.
Tensors are treated as immutable: operations return new instances and callers
must not write through arrays handed out by :meth:`BlockTensor.block`.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import BlockStructureError
from ..qn import IN, OUT, QNIndex, flux, fuse, negate, zero

FORMAT_LIST = "list"
FORMAT_SPARSE_DENSE = "sparse-dense"
FORMAT_SPARSE_SPARSE = "sparse-sparse"
FORMATS = (FORMAT_LIST, FORMAT_SPARSE_DENSE, FORMAT_SPARSE_SPARSE)

# Result-format precedence for two-operand operations: a dense operand
# dominates (such intermediates only arise inside the eigensolver), otherwise
# coordinate storage wins, otherwise plain list.
_PRECEDENCE = {FORMAT_LIST: 0, FORMAT_SPARSE_SPARSE: 1, FORMAT_SPARSE_DENSE: 2}


def combine_format(fmt_a: str, fmt_b: str) -> str:
    return fmt_a if _PRECEDENCE[fmt_a] >= _PRECEDENCE[fmt_b] else fmt_b


def block_shape(indices, key) -> tuple:
    """Dense shape of the block addressed by ``key``."""
    return tuple(ix.dim_of(q) for ix, q in zip(indices, key))


def admissible_keys(indices, total_charge):
    """All block keys whose flux equals ``total_charge``, in sorted order."""
    if not indices:
        return [()] if total_charge == () or total_charge == zero(len(total_charge)) else []
    keys = []
    for combo in itertools.product(*(ix.charges for ix in indices)):
        if flux(indices, combo) == total_charge:
            keys.append(combo)
    keys.sort()
    return keys


class BlockTensor:
    """A block-sparse tensor with U(1) charge bookkeeping.

    Construct via :meth:`from_blocks` (or the module helpers); the constructor
    itself is internal plumbing shared by the three formats.
    """

    __slots__ = ("indices", "total_charge", "format", "_blocks", "_dense", "_keys", "_coo")

    def __init__(self, indices, total_charge, fmt, *, blocks=None, dense=None,
                 keys=None, coo=None):
        self.indices = tuple(indices)
        self.total_charge = tuple(int(c) for c in total_charge)
        if fmt not in FORMATS:
            raise BlockStructureError(f"unknown format {fmt!r}")
        self.format = fmt
        self._blocks = blocks
        self._dense = dense
        self._keys = keys
        self._coo = coo

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def from_blocks(cls, indices, total_charge, blocks, fmt=FORMAT_LIST,
                    validate=True):
        """Build a tensor from a ``{charge-key: ndarray}`` mapping.

        Keys are tuples of per-mode charges.  Data is copied to float64.
        With ``validate`` (default) every key is checked for flux and shape.
        """
        indices = tuple(indices)
        total_charge = tuple(int(c) for c in total_charge)
        store = {}
        for key, arr in blocks.items():
            key = tuple(tuple(int(c) for c in q) for q in key)
            arr = np.array(arr, dtype=np.float64, order="C", copy=True)
            if validate:
                _check_block(indices, total_charge, key, arr.shape)
            store[key] = arr
        t = cls(indices, total_charge, FORMAT_LIST, blocks=store)
        return t if fmt == FORMAT_LIST else t.convert(fmt)

    @classmethod
    def zeros(cls, indices, total_charge, keys=(), fmt=FORMAT_LIST):
        """A tensor holding zero blocks at the given keys."""
        blocks = {}
        indices = tuple(indices)
        for key in keys:
            key = tuple(tuple(q) for q in key)
            blocks[key] = np.zeros(block_shape(indices, key))
        return cls.from_blocks(indices, total_charge, blocks, fmt=fmt)

    @classmethod
    def scalar(cls, value, n_charge_components=1):
        """An order-0 tensor (result of a full contraction)."""
        t = cls((), zero(n_charge_components), FORMAT_LIST,
                blocks={(): np.array(float(value))})
        return t

    # ------------------------------------------------------------------
    # basic queries

    @property
    def ndim(self) -> int:
        return len(self.indices)

    @property
    def dense_shape(self) -> tuple:
        return tuple(ix.dim for ix in self.indices)

    @property
    def n_blocks(self) -> int:
        return len(self.keys())

    def keys(self):
        """Block keys in sorted (deterministic) order."""
        if self.format == FORMAT_LIST:
            return sorted(self._blocks.keys())
        if self.format == FORMAT_SPARSE_DENSE:
            return list(self._keys)
        return sorted(self._coo.keys())

    def has_block(self, key) -> bool:
        if self.format == FORMAT_LIST:
            return key in self._blocks
        if self.format == FORMAT_SPARSE_DENSE:
            return key in self._keys
        return key in self._coo

    def block_shape(self, key) -> tuple:
        return block_shape(self.indices, key)

    def block(self, key) -> np.ndarray:
        """Dense data of one block (materialized if needed). Read-only by
        convention — do not write through the returned array."""
        if self.format == FORMAT_LIST:
            return self._blocks[key]
        if self.format == FORMAT_SPARSE_DENSE:
            sl = tuple(ix.slice_of(q) for ix, q in zip(self.indices, key))
            return self._dense[sl]
        idx, vals = self._coo[key]
        shape = self.block_shape(key)
        out = np.zeros(int(np.prod(shape)) if shape else 1)
        out[idx] = vals
        return out.reshape(shape)

    def items(self):
        """(key, dense block) pairs in sorted key order."""
        for key in self.keys():
            yield key, self.block(key)

    # ------------------------------------------------------------------
    # conversions

    def convert(self, fmt: str) -> "BlockTensor":
        """Return this tensor in another storage format (same values)."""
        if fmt == self.format:
            return self
        if fmt == FORMAT_LIST:
            blocks = {k: np.ascontiguousarray(self.block(k)) for k in self.keys()}
            return BlockTensor(self.indices, self.total_charge, fmt, blocks=blocks)
        if fmt == FORMAT_SPARSE_DENSE:
            dense = np.zeros(self.dense_shape)
            for key, arr in self.items():
                sl = tuple(ix.slice_of(q) for ix, q in zip(self.indices, key))
                dense[sl] = arr
            return BlockTensor(self.indices, self.total_charge, fmt,
                               dense=dense, keys=tuple(self.keys()))
        if fmt == FORMAT_SPARSE_SPARSE:
            coo = {}
            for key, arr in self.items():
                flat = arr.ravel()
                idx = np.flatnonzero(flat).astype(np.int64)
                coo[key] = (idx, flat[idx].copy())
            return BlockTensor(self.indices, self.total_charge, fmt, coo=coo)
        raise BlockStructureError(f"unknown format {fmt!r}")

    def to_dense(self) -> np.ndarray:
        """Full dense array in the canonical sector layout."""
        if self.format == FORMAT_SPARSE_DENSE:
            return self._dense
        dense = np.zeros(self.dense_shape)
        for key, arr in self.items():
            sl = tuple(ix.slice_of(q) for ix, q in zip(self.indices, key))
            dense[sl] = arr
        return dense

    # ------------------------------------------------------------------
    # structural operations

    def validate(self) -> None:
        """Raise BlockStructureError unless every block is admissible and
        correctly shaped."""
        for key in self.keys():
            shape = (self.block(key).shape if self.format != FORMAT_SPARSE_DENSE
                     else self.block_shape(key))
            _check_block(self.indices, self.total_charge, key, shape)
        if self.format == FORMAT_SPARSE_SPARSE:
            for key, (idx, vals) in self._coo.items():
                size = int(np.prod(self.block_shape(key)))
                if len(idx) != len(vals):
                    raise BlockStructureError(f"coordinate length mismatch in {key}")
                if len(idx) and (idx.min() < 0 or idx.max() >= size):
                    raise BlockStructureError(f"coordinate out of range in {key}")

    def conj(self) -> "BlockTensor":
        """Flip all index directions and negate the total charge.

        Data is unchanged (real tensors); block keys stay admissible because
        every flux contribution changes sign.
        """
        new_indices = tuple(ix.dual() for ix in self.indices)
        new_total = negate(self.total_charge)
        if self.format == FORMAT_LIST:
            return BlockTensor(new_indices, new_total, self.format,
                               blocks=dict(self._blocks))
        if self.format == FORMAT_SPARSE_DENSE:
            return BlockTensor(new_indices, new_total, self.format,
                               dense=self._dense, keys=self._keys)
        return BlockTensor(new_indices, new_total, self.format, coo=dict(self._coo))

    def transpose(self, perm) -> "BlockTensor":
        """Reorder modes by ``perm`` (a permutation of range(ndim))."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.ndim)):
            raise BlockStructureError(f"bad permutation {perm}")
        new_indices = tuple(self.indices[p] for p in perm)
        blocks = {}
        for key, arr in self.items():
            new_key = tuple(key[p] for p in perm)
            blocks[new_key] = np.ascontiguousarray(np.transpose(arr, perm))
        out = BlockTensor(new_indices, self.total_charge, FORMAT_LIST, blocks=blocks)
        return out.convert(self.format)

    def scaled(self, alpha: float) -> "BlockTensor":
        alpha = float(alpha)
        if self.format == FORMAT_LIST:
            return BlockTensor(self.indices, self.total_charge, self.format,
                               blocks={k: alpha * v for k, v in self._blocks.items()})
        if self.format == FORMAT_SPARSE_DENSE:
            return BlockTensor(self.indices, self.total_charge, self.format,
                               dense=alpha * self._dense, keys=self._keys)
        coo = {k: (idx, alpha * vals) for k, (idx, vals) in self._coo.items()}
        return BlockTensor(self.indices, self.total_charge, self.format, coo=coo)

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self)))

    def item(self) -> float:
        """Value of an order-0 tensor."""
        if self.ndim != 0:
            raise BlockStructureError("item() on a tensor of nonzero order")
        if not self.has_block(()):
            return 0.0
        return float(self.block(()))

    def __repr__(self):
        return (f"BlockTensor(order={self.ndim}, format={self.format!r}, "
                f"blocks={self.n_blocks}, total_charge={self.total_charge}, "
                f"shape={self.dense_shape})")


def _check_block(indices, total_charge, key, shape):
    if len(key) != len(indices):
        raise BlockStructureError(f"key {key} has wrong arity for order-{len(indices)} tensor")
    if not indices:
        # an order-0 tensor (fully contracted scalar) cannot carry charge
        if any(c != 0 for c in total_charge):
            raise BlockStructureError(f"scalar with nonzero total charge {total_charge}")
        return
    for ix, q in zip(indices, key):
        if not ix.has_charge(q):
            raise BlockStructureError(f"charge {q} absent from index {ix!r}")
    expect = block_shape(indices, key)
    if tuple(shape) != expect:
        raise BlockStructureError(f"block {key} has shape {tuple(shape)}, expected {expect}")
    if flux(indices, key) != total_charge:
        raise BlockStructureError(
            f"block {key} has flux {flux(indices, key)} != total charge {total_charge}")


# ----------------------------------------------------------------------
# elementwise algebra


def add(a: BlockTensor, b: BlockTensor, alpha: float = 1.0, beta: float = 1.0) -> BlockTensor:
    """Blockwise ``alpha*a + beta*b``.

    Both operands must have identical indices and total charge.  Blocks
    present in only one operand become scaled copies; keys are never pruned,
    so an exact cancellation leaves an explicit zero block.
    """
    if a.indices != b.indices or a.total_charge != b.total_charge:
        raise BlockStructureError("add() operands must share indices and total charge")
    fmt = combine_format(a.format, b.format)
    if fmt == FORMAT_SPARSE_DENSE and a.format == fmt and b.format == fmt:
        dense = alpha * a._dense + beta * b._dense
        keys = tuple(sorted(set(a._keys) | set(b._keys)))
        return BlockTensor(a.indices, a.total_charge, fmt, dense=dense, keys=keys)
    out = {}
    keys = set(a.keys()) | set(b.keys())
    for key in sorted(keys):
        if a.has_block(key) and b.has_block(key):
            out[key] = alpha * a.block(key) + beta * b.block(key)
        elif a.has_block(key):
            out[key] = alpha * a.block(key)
        else:
            out[key] = beta * b.block(key)
    res = BlockTensor(a.indices, a.total_charge, FORMAT_LIST, blocks=out)
    return res.convert(fmt)


def inner(a: BlockTensor, b: BlockTensor) -> float:
    """Frobenius inner product over shared blocks (identical indices)."""
    if a.indices != b.indices:
        raise BlockStructureError("inner() operands must share indices")
    if a.format == FORMAT_SPARSE_DENSE and b.format == FORMAT_SPARSE_DENSE:
        return float(np.dot(a._dense.ravel(), b._dense.ravel()))
    total = 0.0
    for key in sorted(set(a.keys()) & set(b.keys())):
        total += float(np.dot(a.block(key).ravel(), b.block(key).ravel()))
    return total


def sparsity(t: BlockTensor) -> float:
    """Fraction of the dense volume not covered by stored blocks."""
    dense = 1
    for ix in t.indices:
        dense *= ix.dim
    if dense == 0:
        return 1.0
    covered = sum(int(np.prod(t.block_shape(k))) for k in t.keys())
    return 1.0 - covered / dense


def random_tensor(indices, total_charge, rng, fmt=FORMAT_LIST) -> BlockTensor:
    """A tensor with every admissible block filled uniform on [-0.5, 0.5].

    Blocks are generated in sorted key order so a seeded generator gives a
    reproducible tensor.
    """
    indices = tuple(indices)
    total_charge = tuple(total_charge)
    blocks = {}
    for key in admissible_keys(indices, total_charge):
        shape = block_shape(indices, key)
        blocks[key] = rng.random(shape) - 0.5
    return BlockTensor.from_blocks(indices, total_charge, blocks, fmt=fmt)
