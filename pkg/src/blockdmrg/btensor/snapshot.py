"""Binary tensor snapshots.

Layout (little-endian), one record per tensor:

====================  =======================================================
magic                 4 bytes ``BDT1``
version               u32 (currently 1)
format tag            u8: 0 list, 1 sparse-dense, 2 sparse-sparse
n_modes               u16
n_charge_components   u16
total charge          n_charge_components x i64
per mode              direction i8 (+1 in / -1 out), n_sectors u32, then per
                      sector: charge (i64 each) and dim u64
n_blocks              u64
per block             key charges (n_modes x components x i64) followed by
                      the block's float64 data, C order (shape is implied by
                      the key)
====================  =======================================================

Block data is always written densely; the format tag restores the in-memory
storage format on load.  Chain files (state/operator checkpoints) concatenate
tensor records after their own header; see :mod:`blockdmrg.netops`.
"""

from __future__ import annotations

import struct

import numpy as np

from ..qn import IN, OUT, QNIndex
from .core import FORMAT_LIST, FORMAT_SPARSE_DENSE, FORMAT_SPARSE_SPARSE, BlockTensor

MAGIC = b"BDT1"
VERSION = 1

_FMT_TAGS = {FORMAT_LIST: 0, FORMAT_SPARSE_DENSE: 1, FORMAT_SPARSE_SPARSE: 2}
_TAG_FMTS = {v: k for k, v in _FMT_TAGS.items()}


def _write(fh, pattern, *values):
    fh.write(struct.pack("<" + pattern, *values))


def _read(fh, pattern):
    size = struct.calcsize("<" + pattern)
    raw = fh.read(size)
    if len(raw) != size:
        raise ValueError("truncated tensor snapshot")
    return struct.unpack("<" + pattern, raw)


def write_tensor(fh, t: BlockTensor) -> None:
    """Append one tensor record to an open binary file."""
    fh.write(MAGIC)
    _write(fh, "I", VERSION)
    ncq = len(t.total_charge)
    _write(fh, "BHH", _FMT_TAGS[t.format], t.ndim, ncq)
    _write(fh, f"{ncq}q" if ncq else "", *t.total_charge)
    for ix in t.indices:
        _write(fh, "bI", ix.direction, len(ix.sectors))
        for s in ix.sectors:
            _write(fh, f"{ncq}qQ", *s.charge, s.dim)
    keys = t.keys()
    _write(fh, "Q", len(keys))
    for key in keys:
        flat = [c for q in key for c in q]
        if flat:
            _write(fh, f"{len(flat)}q", *flat)
        data = np.ascontiguousarray(t.block(key), dtype=np.float64)
        fh.write(data.tobytes())


def read_tensor(fh) -> BlockTensor:
    """Read one tensor record from an open binary file."""
    magic = fh.read(4)
    if magic != MAGIC:
        raise ValueError(f"bad tensor snapshot magic {magic!r}")
    (version,) = _read(fh, "I")
    if version != VERSION:
        raise ValueError(f"unsupported tensor snapshot version {version}")
    tag, ndim, ncq = _read(fh, "BHH")
    if tag not in _TAG_FMTS:
        raise ValueError(f"unknown format tag {tag}")
    total = _read(fh, f"{ncq}q") if ncq else ()
    indices = []
    for _ in range(ndim):
        direction, nsect = _read(fh, "bI")
        if direction not in (IN, OUT):
            raise ValueError(f"bad direction {direction}")
        sectors = []
        for _ in range(nsect):
            vals = _read(fh, f"{ncq}qQ")
            sectors.append((tuple(vals[:ncq]), vals[ncq]))
        indices.append(QNIndex(sectors, direction))
    indices = tuple(indices)
    (nblocks,) = _read(fh, "Q")
    blocks = {}
    for _ in range(nblocks):
        if ndim and ncq:
            flat = _read(fh, f"{ndim * ncq}q")
        else:
            flat = ()
        key = tuple(tuple(flat[m * ncq:(m + 1) * ncq]) for m in range(ndim))
        shape = tuple(ix.dim_of(q) for ix, q in zip(indices, key))
        count = int(np.prod(shape)) if shape else 1
        raw = fh.read(count * 8)
        if len(raw) != count * 8:
            raise ValueError("truncated block data")
        blocks[key] = np.frombuffer(raw, dtype="<f8").reshape(shape)
    t = BlockTensor.from_blocks(indices, total, blocks)
    return t.convert(_TAG_FMTS[tag])


def save_tensor(path, t: BlockTensor) -> None:
    with open(path, "wb") as fh:
        write_tensor(fh, t)


def load_tensor(path) -> BlockTensor:
    with open(path, "rb") as fh:
        return read_tensor(fh)
