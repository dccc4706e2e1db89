"""Tensor-network containers and contractions: states, operators,
environments, canonical form, and the two-site effective Hamiltonian.

Conventions
-----------
MPS site tensors are order 3 with modes (left bond, physical, right bond),
directions (in, in, out), and zero flux; the state's total charge sits on the
right boundary bond (a single dim-1 sector), the left boundary bond is a
single dim-1 charge-zero sector.  MPO site tensors are order 4 with modes
(left bond, bra physical, ket physical, right bond), directions
(in, in, out, out), zero flux.

A left environment has modes (bra bond, operator bond, ket bond) with
directions (in, out, out); a right environment the same mode order with
directions (out, in, in).  Both have zero total charge.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .btensor import (FORMAT_LIST, BlockTensor, add, admissible_keys,
                      block_qr, block_rq, contract, inner, read_tensor,
                      write_tensor)
from .errors import BlockStructureError
from .qn import zero


class MPS:
    """A matrix-product state: site tensors, an optional canonical center,
    and the total charge of the represented state.

    ``sites`` is a mutable list — the sweep driver updates tensors in
    place and maintains ``center`` itself."""

    __slots__ = ("sites", "center", "total_charge")

    def __init__(self, sites, total_charge, center=None):
        self.sites = list(sites)
        self.total_charge = tuple(total_charge)
        self.center = center
        if not self.sites:
            raise BlockStructureError("empty MPS")
        if center is not None and not 0 <= center < len(self.sites):
            raise BlockStructureError(f"center {center} out of range")

    @property
    def n(self) -> int:
        return len(self.sites)

    def bond_dims(self) -> list:
        dims = [self.sites[0].indices[0].dim]
        dims += [s.indices[2].dim for s in self.sites]
        return dims

    def validate(self) -> None:
        nq = len(self.total_charge)
        for j, s in enumerate(self.sites):
            if s.ndim != 3:
                raise BlockStructureError(f"site {j} is order {s.ndim}, expected 3")
            if s.total_charge != zero(nq):
                raise BlockStructureError(f"site {j} has nonzero flux")
            s.validate()
        for j in range(self.n - 1):
            if not self.sites[j].indices[2].is_dual_of(self.sites[j + 1].indices[0]):
                raise BlockStructureError(f"bond {j + 1} indices are not dual")
        left = self.sites[0].indices[0]
        right = self.sites[-1].indices[2]
        if left.dim != 1 or left.charges[0] != zero(nq):
            raise BlockStructureError("left boundary must be one charge-zero sector")
        if right.dim != 1 or right.charges[0] != self.total_charge:
            raise BlockStructureError("right boundary must carry the total charge")

    def replace_sites(self, start, new_sites, center=None) -> "MPS":
        sites = list(self.sites)
        for k, s in enumerate(new_sites):
            sites[start + k] = s
        return MPS(sites, self.total_charge, center)

    def convert(self, fmt: str) -> "MPS":
        return MPS([s.convert(fmt) for s in self.sites], self.total_charge, self.center)

    def __repr__(self):
        return (f"MPS(n={self.n}, total_charge={self.total_charge}, "
                f"center={self.center}, max_bond={max(self.bond_dims())})")


class MPO:
    """A matrix-product operator (zero-flux order-4 site tensors)."""

    __slots__ = ("sites",)

    def __init__(self, sites):
        self.sites = tuple(sites)
        if not self.sites:
            raise BlockStructureError("empty MPO")

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def bond_dim(self) -> int:
        return max(s.indices[3].dim for s in self.sites)

    def bond_dims(self) -> list:
        dims = [self.sites[0].indices[0].dim]
        dims += [s.indices[3].dim for s in self.sites]
        return dims

    def convert(self, fmt: str) -> "MPO":
        return MPO([s.convert(fmt) for s in self.sites])

    def __repr__(self):
        return f"MPO(n={self.n}, bond_dim={self.bond_dim})"


@dataclass(frozen=True)
class Environment:
    """A partially contracted ⟨state|operator|state⟩ network, from one edge
    up to a cut.  ``side`` is "L" or "R"; ``n_absorbed`` counts the sites
    already folded in."""

    side: str
    tensor: BlockTensor
    n_absorbed: int = 0


def _single_charge(index) -> tuple:
    if index.dim != 1 or len(index.sectors) != 1:
        raise BlockStructureError("boundary index must be a single dim-1 sector")
    return index.charges[0]


def left_edge(psi: MPS, h: MPO, fmt: str = FORMAT_LIST) -> Environment:
    """The trivial environment left of site 0."""
    i_ix = psi.sites[0].indices[0]           # in
    k_ix = h.sites[0].indices[0].dual()      # out
    l_ix = i_ix.dual()                       # out
    key = (_single_charge(i_ix), _single_charge(k_ix), _single_charge(l_ix))
    t = BlockTensor.from_blocks((i_ix, k_ix, l_ix), zero(len(psi.total_charge)),
                                {key: np.ones((1, 1, 1))})
    return Environment("L", t.convert(fmt), 0)


def right_edge(psi: MPS, h: MPO, fmt: str = FORMAT_LIST) -> Environment:
    """The trivial environment right of site n-1."""
    i_ix = psi.sites[-1].indices[2]          # out
    k_ix = h.sites[-1].indices[3].dual()     # in
    l_ix = i_ix.dual()                       # in
    key = (_single_charge(i_ix), _single_charge(k_ix), _single_charge(l_ix))
    t = BlockTensor.from_blocks((i_ix, k_ix, l_ix), zero(len(psi.total_charge)),
                                {key: np.ones((1, 1, 1))})
    return Environment("R", t.convert(fmt), 0)


def build_left_env(prev: Environment, mps_site: BlockTensor,
                   mpo_site: BlockTensor) -> Environment:
    """Absorb one site into a left environment.

    The three contractions (environment x state, x operator, x conjugate
    state) keep every intermediate at O(m^2 k d) elements.
    """
    e = contract(prev.tensor, mps_site, ((2, 0),))          # (i, k, s, r)
    e = contract(e, mpo_site, ((1, 0), (2, 2)))             # (i, r, s', k')
    e = contract(e, mps_site.conj(), ((0, 0), (2, 1)), out_order=(2, 1, 0))
    return Environment("L", e, prev.n_absorbed + 1)


def build_right_env(prev: Environment, mps_site: BlockTensor,
                    mpo_site: BlockTensor) -> Environment:
    """Absorb one site into a right environment."""
    e = contract(mps_site, prev.tensor, ((2, 2),))          # (l, s, i', k')
    e = contract(e, mpo_site, ((3, 3), (1, 2)))             # (l, i', k, s')
    e = contract(e, mps_site.conj(), ((1, 2), (3, 1)), out_order=(2, 1, 0))
    return Environment("R", e, prev.n_absorbed + 1)


def apply_effective_h(left, right, mpo_j: BlockTensor, mpo_j1: BlockTensor,
                      x: BlockTensor) -> BlockTensor:
    """Apply the two-site effective Hamiltonian to a two-site tensor.

    ``x`` has modes (left bond, phys j, phys j+1, right bond).  The
    contraction order is fixed — environment, first operator, second
    operator, environment — which keeps the cost at
    O(m^3 k d^2 + m^2 k^2 d^3).
    """
    lt = left.tensor if isinstance(left, Environment) else left
    rt = right.tensor if isinstance(right, Environment) else right
    e = contract(lt, x, ((2, 0),))              # (i, k, s1, s2, r)
    e = contract(e, mpo_j, ((1, 0), (2, 2)))    # (i, s2, r, s1', k'')
    e = contract(e, mpo_j1, ((4, 0), (1, 2)))   # (i, r, s1', s2', k''')
    e = contract(e, rt, ((1, 2), (4, 1)))       # (i, s1', s2', i')
    return e


def two_site_tensor(psi: MPS, j: int) -> BlockTensor:
    """Merge sites j and j+1 over their shared bond."""
    return contract(psi.sites[j], psi.sites[j + 1], ((2, 0),))


def canonicalize(psi: MPS, center: int) -> MPS:
    """Bring ``psi`` to mixed-canonical form about ``center``, in place.

    Sites left of the center become left-orthogonal, sites right of it
    right-orthogonal, and the center tensor is scaled to unit norm.  An MPS
    whose recorded center already matches is only renormalized; a recorded
    center elsewhere is moved stepwise.  Returns ``psi``.
    """
    if not 0 <= center < psi.n:
        raise BlockStructureError(f"center {center} out of range")
    sites = psi.sites
    fmts = [s.format for s in sites]

    def move_right(j):
        q, r = block_qr(sites[j].convert(FORMAT_LIST), (0, 1), (2,))
        sites[j] = q.convert(fmts[j])
        sites[j + 1] = contract(r, sites[j + 1].convert(FORMAT_LIST),
                                ((1, 0),)).convert(fmts[j + 1])

    def move_left(j):
        l, q = block_rq(sites[j].convert(FORMAT_LIST), (0,), (1, 2))
        sites[j] = q.convert(fmts[j])
        sites[j - 1] = contract(sites[j - 1].convert(FORMAT_LIST), l,
                                ((2, 0),)).convert(fmts[j - 1])

    if psi.center == center:
        pass
    elif psi.center is not None:
        j = psi.center
        while j < center:
            move_right(j)
            j += 1
        while j > center:
            move_left(j)
            j -= 1
    else:
        for j in range(center):
            move_right(j)
        for j in range(psi.n - 1, center, -1):
            move_left(j)

    c = sites[center]
    nrm = c.norm()
    if nrm == 0.0:
        raise BlockStructureError("cannot normalize a zero state")
    sites[center] = c.scaled(1.0 / nrm)
    psi.center = center
    return psi


def mps_inner(bra: MPS, ket: MPS) -> float:
    """⟨bra|ket⟩ via bond-space transfer contractions."""
    if bra.n != ket.n:
        raise BlockStructureError("states have different lengths")
    i_ix = bra.sites[0].indices[0]
    l_ix = ket.sites[0].indices[0].dual()
    nq = len(ket.total_charge)
    key = (_single_charge(i_ix), _single_charge(l_ix))
    e = BlockTensor.from_blocks((i_ix, l_ix), zero(nq), {key: np.ones((1, 1))})
    for j in range(ket.n):
        e = contract(e, ket.sites[j], ((1, 0),))                       # (i, s, r)
        e = contract(e, bra.sites[j].conj(), ((0, 0), (1, 1)), out_order=(1, 0))
    cap_ix = (e.indices[0].dual(), e.indices[1].dual())
    caps = {k: np.ones((1, 1)) for k in admissible_keys(cap_ix, zero(nq))}
    if not caps:
        return 0.0
    cap = BlockTensor.from_blocks(cap_ix, zero(nq), caps)
    return contract(e, cap, ((0, 0), (1, 1))).item()


def mps_norm(psi: MPS) -> float:
    return float(np.sqrt(max(mps_inner(psi, psi), 0.0)))


def expectation(psi: MPS, h: MPO) -> float:
    """⟨psi|h|psi⟩ / ⟨psi|psi⟩ via left-environment accumulation."""
    if psi.n != h.n:
        raise BlockStructureError("state and operator have different lengths")
    env = left_edge(psi, h)
    for j in range(psi.n):
        env = build_left_env(env, psi.sites[j], h.sites[j])
    cap = right_edge(psi, h)
    raw = contract(env.tensor, cap.tensor, ((0, 0), (1, 1), (2, 2))).item()
    return raw / mps_inner(psi, psi)


# ----------------------------------------------------------------------
# chain checkpoints

_CHAIN_MAGIC = b"BDC1"
_CHAIN_VERSION = 1


def _save_chain(path, kind, tensors, center, total_charge):
    with open(path, "wb") as fh:
        fh.write(_CHAIN_MAGIC)
        ncq = len(total_charge)
        fh.write(struct.pack("<IBIiH", _CHAIN_VERSION, kind, len(tensors),
                             -1 if center is None else center, ncq))
        if ncq:
            fh.write(struct.pack(f"<{ncq}q", *total_charge))
        for t in tensors:
            write_tensor(fh, t)


def _load_chain(path, kind):
    with open(path, "rb") as fh:
        if fh.read(4) != _CHAIN_MAGIC:
            raise ValueError(f"{path}: not a chain checkpoint")
        version, k, n, center, ncq = struct.unpack("<IBIiH", fh.read(15))
        if version != _CHAIN_VERSION:
            raise ValueError(f"unsupported chain version {version}")
        if k != kind:
            raise ValueError("checkpoint holds the wrong chain kind")
        total = struct.unpack(f"<{ncq}q", fh.read(8 * ncq)) if ncq else ()
        tensors = [read_tensor(fh) for _ in range(n)]
    return tensors, (None if center < 0 else center), total


def save_mps(path, psi: MPS) -> None:
    _save_chain(path, 0, psi.sites, psi.center, psi.total_charge)


def load_mps(path) -> MPS:
    tensors, center, total = _load_chain(path, 0)
    return MPS(tensors, total, center)


def save_mpo(path, h: MPO) -> None:
    _save_chain(path, 1, h.sites, None, zero(len(h.sites[0].total_charge)))


def load_mpo(path) -> MPO:
    tensors, _, _ = _load_chain(path, 1)
    return MPO(tensors)
