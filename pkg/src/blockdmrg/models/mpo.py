"""Matrix-product operators from term lists via a finite-state machine.

Bond states at each cut: ``ready`` (no factor placed yet, identity to the
left), one in-progress state per distinct (start site, left operator) pair
awaiting completion, and ``done`` (all factors placed, identity to the
right).  Coefficients attach at the completing site, so in-progress states
are shared by every term with the same opening factor.  Fermionic strings
fold the parity operator into the opening factor and use parity as the
in-progress passthrough.

Bond states carry definite charges (the net charge of the operators placed
so far), which makes every site tensor block-sparse over its bond charges;
the dense state-machine array is sliced into charge blocks at the end.

:func:`compress_mpo` runs the standard two-pass reduction: a left-to-right
QR orthogonalization followed by a right-to-left truncated SVD at an
absolute singular-value cutoff.
"""

from __future__ import annotations

import numpy as np

from ..btensor import FORMAT_LIST, BlockTensor, block_qr, block_svd, contract, scale_bond
from ..errors import BlockStructureError
from ..netops import MPO
from ..qn import IN, QNIndex, fuse, negate, zero
from .localops import site_basis
from .terms import OpTerm, normal_order

_READY = ("ready",)
_DONE = ("done",)


def _state_sort_key(state, charge):
    rank = {"ready": 0, "prog": 1, "done": 2}[state[0]]
    return (charge, rank, state)


def terms_to_mpo(terms, kind: str, n_sites: int, compress_cutoff=1e-13) -> MPO:
    """Assemble (and by default compress) the MPO for a list of terms.

    ``kind`` selects the site basis ("spin" or "electron").  Terms may have
    one or two factors; two-factor fermionic terms get their parity string
    inserted automatically.  ``compress_cutoff=None`` returns the raw
    state-machine MPO.
    """
    phys, ops = site_basis(kind)
    d = phys.dim
    nq = len(phys.charges[0])
    fmat = ops["F"].matrix if "F" in ops else np.eye(d)

    singles = []   # (site, opname, coef)
    doubles = []   # (i, opA, j, opB, coef, fermionic)
    for term in terms:
        term = normal_order(term, ops)
        total = zero(nq)
        for _, name in term.factors:
            total = fuse(total, ops[name].charge)
        if total != zero(nq):
            raise BlockStructureError(f"term {term} does not conserve charge")
        sites_used = [s for s, _ in term.factors]
        if any(not 0 <= s < n_sites for s in sites_used):
            raise BlockStructureError(f"term {term} references a site outside 0..{n_sites - 1}")
        if len(term.factors) == 1:
            singles.append((term.factors[0][0], term.factors[0][1], term.coefficient))
        elif len(term.factors) == 2:
            (i, a), (j, b) = term.factors
            doubles.append((i, a, j, b, term.coefficient, ops[a].fermionic))
        else:
            raise BlockStructureError("only one- and two-factor terms are supported")

    # in-progress state bookkeeping: last completion site per opening factor
    prog_last = {}
    prog_fermi = {}
    for i, a, j, b, coef, fermi in doubles:
        key = ("prog", i, a)
        prog_last[key] = max(prog_last.get(key, -1), j)
        prog_fermi[key] = fermi

    def charge_of(state):
        if state[0] == "prog":
            return ops[state[2]].charge
        return zero(nq)

    # states alive at each cut, sorted so equal charges are contiguous
    cut_states = []
    for c in range(n_sites + 1):
        if c == 0:
            alive = [_READY]
        elif c == n_sites:
            alive = [_DONE]
        else:
            alive = [_READY, _DONE]
            alive += [s for s in prog_last if s[1] < c <= prog_last[s]]
        alive.sort(key=lambda s: _state_sort_key(s, charge_of(s)))
        cut_states.append(alive)
    positions = [{s: i for i, s in enumerate(states)} for states in cut_states]

    dense = [np.zeros((len(cut_states[j]), d, d, len(cut_states[j + 1])))
             for j in range(n_sites)]

    ident = np.eye(d)
    for j in range(n_sites):
        posl, posr = positions[j], positions[j + 1]
        if _READY in posl and _READY in posr:
            dense[j][posl[_READY], :, :, posr[_READY]] = ident
        if _DONE in posl and _DONE in posr:
            dense[j][posl[_DONE], :, :, posr[_DONE]] = ident
        for state in cut_states[j + 1]:
            if state[0] == "prog" and state[1] == j:
                # opening transition; the parity fold handles the string sign
                mat = ops[state[2]].matrix
                if prog_fermi[state]:
                    mat = mat @ fmat
                dense[j][posl[_READY], :, :, posr[state]] = mat
        for state in cut_states[j]:
            if state[0] == "prog" and state in posr:
                dense[j][posl[state], :, :, posr[state]] = (
                    fmat if prog_fermi[state] else ident)

    for site, name, coef in singles:
        posl, posr = positions[site], positions[site + 1]
        dense[site][posl[_READY], :, :, posr[_DONE]] += coef * ops[name].matrix
    for i, a, j, b, coef, fermi in doubles:
        key = ("prog", i, a)
        dense[j][positions[j][key], :, :, positions[j + 1][_DONE]] += coef * ops[b].matrix

    # charge-sector metadata for every cut
    cut_index = []
    for c in range(n_sites + 1):
        sectors = []
        for s in cut_states[c]:
            q = charge_of(s)
            if sectors and sectors[-1][0] == q:
                sectors[-1] = (q, sectors[-1][1] + 1)
            else:
                sectors.append((q, 1))
        cut_index.append(QNIndex(sectors, IN))

    sites = []
    for j in range(n_sites):
        sites.append(_blockify(dense[j], cut_index[j], phys, cut_index[j + 1].dual()))
    h = MPO(sites)
    if compress_cutoff is not None:
        h = compress_mpo(h, compress_cutoff)
    return h


def _blockify(w, left_ix, phys, right_ix):
    """Slice a dense state-machine array into admissible charge blocks.

    The cut states were sorted by charge, so sectors occupy contiguous
    index ranges in the same order as the QNIndex sectors.
    """
    nu = phys.dual()
    indices = (left_ix, phys, nu, right_ix)
    total = zero(len(phys.charges[0]))

    blocks = {}
    for ql in left_ix.charges:
        for qs in phys.charges:
            for qn_ in nu.charges:
                for qr in right_ix.charges:
                    sub = w[left_ix.slice_of(ql), phys.slice_of(qs),
                            nu.slice_of(qn_), right_ix.slice_of(qr)]
                    admissible = fuse(fuse(ql, qs), negate(fuse(qn_, qr))) == total
                    if not admissible:
                        if np.any(sub != 0.0):
                            raise BlockStructureError(
                                "state machine wrote a charge-violating entry")
                        continue
                    if np.any(sub != 0.0):
                        blocks[(ql, qs, qn_, qr)] = np.ascontiguousarray(sub)
    return BlockTensor.from_blocks(indices, total, blocks)


def compress_mpo(h: MPO, cutoff: float) -> MPO:
    """Two-pass bond compression at an absolute singular-value cutoff."""
    sites = [s.convert(FORMAT_LIST) for s in h.sites]
    n = len(sites)
    for j in range(n - 1):
        q, r = block_qr(sites[j], (0, 1, 2), (3,))
        sites[j] = q
        sites[j + 1] = contract(r, sites[j + 1], ((1, 0),))
    for j in range(n - 1, 0, -1):
        u, s, v, _ = block_svd(sites[j], (0,), (1, 2, 3), cutoff=cutoff)
        sites[j] = v
        us = scale_bond(u, 1, s)
        sites[j - 1] = contract(sites[j - 1], us, ((3, 0),))
    return MPO(sites)


def identity_mpo(kind: str, n_sites: int) -> MPO:
    return terms_to_mpo([OpTerm(1.0, ((0, "Id"),))], kind, n_sites,
                        compress_cutoff=None)


def sum_site_mpo(kind: str, n_sites: int, opname: str, coefficient=1.0) -> MPO:
    """The extensive operator ``coefficient * sum_j op(j)`` (e.g. total Sz)."""
    terms = [OpTerm(coefficient, ((s, opname),)) for s in range(n_sites)]
    return terms_to_mpo(terms, kind, n_sites, compress_cutoff=None)
