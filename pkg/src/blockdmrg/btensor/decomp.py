"""Charge-grouped matrix factorizations of block tensors.

A tensor is wrapped into an effective matrix by declaring some modes "rows"
and the rest "columns".  Blocks sharing the same net row charge (flux through
the cut) form one dense matrix per charge group; each group is factorized
independently and the factors are reassembled as block tensors joined by a
new bond index whose sectors are the group charges.

Every factorization runs on the per-block (list) layout regardless of the
input's storage format; callers convert the factors back as needed.
"""

from __future__ import annotations

import numpy as np

from .. import perf
from ..errors import BlockStructureError, TruncationError
from ..qn import IN, OUT, QNIndex, flux, negate, zero, fuse
from .core import FORMAT_LIST, BlockTensor


class _Group:
    __slots__ = ("rows", "cols", "row_off", "col_off", "mat")

    def __init__(self):
        self.rows = []     # sorted row charge combos
        self.cols = []
        self.row_off = {}  # combo -> (offset, dim)
        self.col_off = {}
        self.mat = None


def _wrap(t: BlockTensor, row_modes, col_modes):
    """Assemble the per-charge-group dense matrices of a wrapped tensor."""
    row_modes = tuple(int(m) for m in row_modes)
    col_modes = tuple(int(m) for m in col_modes)
    if not row_modes or not col_modes:
        raise BlockStructureError("row and column mode lists must be nonempty")
    if sorted(row_modes + col_modes) != list(range(t.ndim)):
        raise BlockStructureError(
            f"row modes {row_modes} + col modes {col_modes} must partition "
            f"{t.ndim} modes")
    tl = t.convert(FORMAT_LIST)
    row_ix = [t.indices[m] for m in row_modes]
    col_ix = [t.indices[m] for m in col_modes]

    entries = {}
    for key, blk in tl.items():
        rkey = tuple(key[m] for m in row_modes)
        ckey = tuple(key[m] for m in col_modes)
        g = flux(row_ix, rkey)
        entries.setdefault(g, []).append((rkey, ckey, blk))

    groups = {}
    for g in sorted(entries):
        grp = _Group()
        grp.rows = sorted({rk for rk, _, _ in entries[g]})
        grp.cols = sorted({ck for _, ck, _ in entries[g]})
        ro = 0
        for rk in grp.rows:
            dim = int(np.prod([ix.dim_of(q) for ix, q in zip(row_ix, rk)])) if rk else 1
            grp.row_off[rk] = (ro, dim)
            ro += dim
        co = 0
        for ck in grp.cols:
            dim = int(np.prod([ix.dim_of(q) for ix, q in zip(col_ix, ck)])) if ck else 1
            grp.col_off[ck] = (co, dim)
            co += dim
        grp.mat = np.zeros((ro, co))
        for rk, ck, blk in entries[g]:
            r0, rd = grp.row_off[rk]
            c0, cd = grp.col_off[ck]
            folded = np.transpose(blk, row_modes + col_modes).reshape(rd, cd)
            grp.mat[r0:r0 + rd, c0:c0 + cd] = folded
        groups[g] = grp
    return groups, row_ix, col_ix


def _row_dims(row_ix, rkey):
    return tuple(ix.dim_of(q) for ix, q in zip(row_ix, rkey))


def _factor_flops(mat):
    m, n = mat.shape
    return 2 * m * n * min(m, n)


def block_svd(t: BlockTensor, row_modes, col_modes, max_rank=None, cutoff=0.0):
    """Truncated SVD of a wrapped block tensor.

    Returns ``(u, s, v, trunc_error)`` where ``t ~ u @ diag(s) @ v`` over a
    new bond: ``u`` has the row modes plus an outward bond mode (carrying the
    group charge), ``v`` has an inward bond mode plus the column modes, and
    ``s`` maps bond charge to its kept singular values.  Truncation pools
    singular values across all charge groups: sorted descending (ties keep
    the lexicographically smaller charge), kept until ``max_rank`` values or
    the first value below ``cutoff``.  ``trunc_error`` is the sum of the
    squares of everything discarded.  Discarding every value raises
    :class:`TruncationError`.
    """
    groups, row_ix, col_ix = _wrap(t, row_modes, col_modes)
    svd = {}
    pooled = []
    for g, grp in groups.items():
        u, s, vt = np.linalg.svd(grp.mat, full_matrices=False)
        perf.record("svd", _factor_flops(grp.mat))
        svd[g] = (u, s, vt)
        for val in s:
            pooled.append((float(val), g))
    pooled.sort(key=lambda e: (-e[0], e[1]))

    kept = {g: 0 for g in groups}
    trunc = 0.0
    n_kept = 0
    for val, g in pooled:
        if (max_rank is None or n_kept < max_rank) and val >= cutoff:
            kept[g] += 1
            n_kept += 1
        else:
            trunc += val * val
    if n_kept == 0:
        raise TruncationError("truncation discarded every singular value")

    bond_sectors = [(g, kept[g]) for g in sorted(groups) if kept[g] > 0]
    bond_out = QNIndex(bond_sectors, OUT)
    bond_in = bond_out.dual()

    u_blocks, v_blocks = {}, {}
    s_by_charge = {}
    for g, grp in groups.items():
        r = kept[g]
        if r == 0:
            continue
        ug, sg, vtg = svd[g]
        s_by_charge[g] = sg[:r].copy()
        for rk in grp.rows:
            r0, rd = grp.row_off[rk]
            u_blocks[rk + (g,)] = np.ascontiguousarray(
                ug[r0:r0 + rd, :r].reshape(_row_dims(row_ix, rk) + (r,)))
        for ck in grp.cols:
            c0, cd = grp.col_off[ck]
            v_blocks[(g,) + ck] = np.ascontiguousarray(
                vtg[:r, c0:c0 + cd].reshape((r,) + _row_dims(col_ix, ck)))

    nq = len(t.total_charge)
    u = BlockTensor(tuple(row_ix) + (bond_out,), zero(nq), FORMAT_LIST, blocks=u_blocks)
    v = BlockTensor((bond_in,) + tuple(col_ix), t.total_charge, FORMAT_LIST, blocks=v_blocks)
    return u, s_by_charge, v, trunc


def _signfix(q, r):
    """Flip factor column signs so diag(r) >= 0 (deterministic gauge)."""
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d, d[:, None] * r


def block_qr(t: BlockTensor, row_modes, col_modes):
    """QR of a wrapped block tensor: ``t = q @ r`` with ``q`` having
    orthonormal columns within every charge group (outward bond on ``q``,
    inward bond on ``r``)."""
    groups, row_ix, col_ix = _wrap(t, row_modes, col_modes)
    q_blocks, r_blocks = {}, {}
    bond_sectors = []
    for g, grp in groups.items():
        qg, rg = np.linalg.qr(grp.mat)
        perf.record("qr", _factor_flops(grp.mat))
        qg, rg = _signfix(qg, rg)
        rank = qg.shape[1]
        bond_sectors.append((g, rank))
        for rk in grp.rows:
            r0, rd = grp.row_off[rk]
            q_blocks[rk + (g,)] = np.ascontiguousarray(
                qg[r0:r0 + rd, :].reshape(_row_dims(row_ix, rk) + (rank,)))
        for ck in grp.cols:
            c0, cd = grp.col_off[ck]
            r_blocks[(g,) + ck] = np.ascontiguousarray(
                rg[:, c0:c0 + cd].reshape((rank,) + _row_dims(col_ix, ck)))
    bond_out = QNIndex(bond_sectors, OUT)
    bond_in = bond_out.dual()
    nq = len(t.total_charge)
    q = BlockTensor(tuple(row_ix) + (bond_out,), zero(nq), FORMAT_LIST, blocks=q_blocks)
    r = BlockTensor((bond_in,) + tuple(col_ix), t.total_charge, FORMAT_LIST, blocks=r_blocks)
    return q, r


def block_rq(t: BlockTensor, row_modes, col_modes):
    """RQ of a wrapped block tensor: ``t = l @ q`` with ``q`` having
    orthonormal rows within every charge group (outward bond on ``l``,
    inward bond on ``q``).  Used to right-orthogonalize site tensors."""
    groups, row_ix, col_ix = _wrap(t, row_modes, col_modes)
    l_blocks, q_blocks = {}, {}
    bond_sectors = []
    neg_total = negate(t.total_charge)
    for g, grp in groups.items():
        qt, rt = np.linalg.qr(grp.mat.T)
        perf.record("qr", _factor_flops(grp.mat))
        qt, rt = _signfix(qt, rt)
        rank = qt.shape[1]
        gb = fuse(g, neg_total)  # bond charge keeps q's total charge at zero
        bond_sectors.append((gb, rank))
        lmat = rt.T  # rows x rank
        qmat = qt.T  # rank x cols
        for rk in grp.rows:
            r0, rd = grp.row_off[rk]
            l_blocks[rk + (gb,)] = np.ascontiguousarray(
                lmat[r0:r0 + rd, :].reshape(_row_dims(row_ix, rk) + (rank,)))
        for ck in grp.cols:
            c0, cd = grp.col_off[ck]
            q_blocks[(gb,) + ck] = np.ascontiguousarray(
                qmat[:, c0:c0 + cd].reshape((rank,) + _row_dims(col_ix, ck)))
    bond_out = QNIndex(bond_sectors, OUT)
    bond_in = bond_out.dual()
    nq = len(t.total_charge)
    l = BlockTensor(tuple(row_ix) + (bond_out,), t.total_charge, FORMAT_LIST, blocks=l_blocks)
    q = BlockTensor((bond_in,) + tuple(col_ix), zero(nq), FORMAT_LIST, blocks=q_blocks)
    return l, q


def scale_bond(t: BlockTensor, mode: int, values_by_charge) -> BlockTensor:
    """Multiply ``t`` along one mode by per-charge 1-D weights (used to
    absorb singular values into a neighboring factor)."""
    mode = int(mode)
    blocks = {}
    for key, blk in t.convert(FORMAT_LIST).items():
        w = values_by_charge[key[mode]]
        shape = [1] * blk.ndim
        shape[mode] = len(w)
        blocks[key] = blk * np.asarray(w).reshape(shape)
    out = BlockTensor(t.indices, t.total_charge, FORMAT_LIST, blocks=blocks)
    return out.convert(t.format)
