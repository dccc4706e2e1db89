"""Exact diagonalization over occupation bitmasks.

This is an independent reference implementation: Hamiltonians are applied
directly from term lists to integer-coded product states, with fermionic
signs from mode parities, never through the tensor-network machinery.

Encoding (site 0 in the highest bits, so the integer IS the site-major
product-basis index):

* spins: one bit per site, 0 = down, 1 = up;
* electrons: two bits per site, ``local = 2 n_up + n_dn`` (0 empty,
  1 down, 2 up, 3 double).  Fermionic modes are ordered site-major with
  up before down within a site, matching the parity-string convention of
  the MPO builder.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse import coo_matrix

from ..errors import BlockStructureError, ResourceLimitError
from ..models.localops import site_basis
from ..models.terms import normal_order

MAX_ENUMERATION = 1 << 24
DENSE_CUTOFF = 1500

_BITS = {"spin": 1, "electron": 2}


def sector_basis(kind: str, n_sites: int, sector=None) -> np.ndarray:
    """Sorted integer masks spanning a charge sector (or the full space)."""
    bits = _BITS[kind]
    size = 1 << (bits * n_sites)
    if size > MAX_ENUMERATION:
        raise ResourceLimitError(
            f"full enumeration of {size} states exceeds {MAX_ENUMERATION}")
    full = np.arange(size, dtype=np.int64)
    if sector is None:
        return full
    if kind == "spin":
        (q,) = sector
        n_up, rem = divmod(n_sites + q, 2)
        if rem or not 0 <= n_up <= n_sites:
            raise BlockStructureError(f"sector {sector} is empty for {n_sites} spins")
        return full[np.bitwise_count(full) == n_up]
    ne, q2 = sector
    n_up, rem_u = divmod(ne + q2, 2)
    n_dn, rem_d = divmod(ne - q2, 2)
    if rem_u or rem_d or not (0 <= n_up <= n_sites and 0 <= n_dn <= n_sites):
        raise BlockStructureError(f"sector {sector} is empty for {n_sites} orbitals")
    up_mask = int("10" * n_sites, 2)
    dn_mask = int("01" * n_sites, 2)
    keep = (np.bitwise_count(full & up_mask) == n_up) \
        & (np.bitwise_count(full & dn_mask) == n_dn)
    return full[keep]


def _column_maps(mat):
    """Single-entry-per-column maps (target row, value); -1 row = annihilated."""
    d = mat.shape[0]
    rows = np.full(d, -1, dtype=np.int64)
    vals = np.zeros(d)
    for c in range(d):
        nz = np.nonzero(mat[:, c])[0]
        if nz.size > 1:
            raise BlockStructureError(
                "reference path requires at most one entry per operator column")
        if nz.size == 1:
            rows[c] = nz[0]
            vals[c] = mat[nz[0], c]
    return rows, vals


def _apply_term(term, ops, kind, n_sites, masks):
    """Map every basis mask through one normal-ordered term.

    Returns (source positions, target masks, amplitudes), with annihilated
    states dropped.  Factors act right to left; a fermionic factor picks up
    the parity of all occupations on earlier sites (intra-site order is
    already folded into the local matrices).
    """
    bits = _BITS[kind]
    local_mask = (1 << bits) - 1
    cur = masks.copy()
    amp = np.full(masks.shape, float(term.coefficient))
    alive = np.ones(masks.shape, dtype=bool)
    for site, name in reversed(term.factors):
        op = ops[name]
        rows, vals = _column_maps(op.matrix)
        shift = bits * (n_sites - 1 - site)
        local = (cur >> shift) & local_mask
        target = rows[local]
        alive &= target >= 0
        amp = amp * vals[local]
        if op.fermionic:
            parity = np.bitwise_count(cur >> (shift + bits)).astype(np.int64) & 1
            amp = np.where(parity == 1, -amp, amp)
        target = np.where(target >= 0, target, 0)
        cur = (cur & ~(local_mask << shift)) | (target << shift)
    src = np.nonzero(alive)[0]
    return src, cur[alive], amp[alive]


def hamiltonian_matrix(kind: str, terms, n_sites: int, sector=None):
    """The Hamiltonian as a scipy CSR matrix over :func:`sector_basis`."""
    _, ops = site_basis(kind)
    basis = sector_basis(kind, n_sites, sector)
    m = basis.size
    if m == 0:
        raise BlockStructureError("empty basis")
    rows, cols, vals = [], [], []
    for term in terms:
        term = normal_order(term, ops)
        src, tgt, amp = _apply_term(term, ops, kind, n_sites, basis)
        pos = np.searchsorted(basis, tgt)
        if np.any(pos >= m) or np.any(basis[np.minimum(pos, m - 1)] != tgt):
            raise BlockStructureError(
                "a term maps the sector outside itself (charge leak)")
        rows.append(pos)
        cols.append(src)
        vals.append(amp)
    if not rows:
        return coo_matrix((m, m)).tocsr()
    return coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m, m)).tocsr()


def _lanczos_ground(h, seed: int, tol: float, max_iter: int) -> float:
    """Smallest eigenvalue by Lanczos with full reorthogonalization."""
    n = h.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    vecs = [v]
    alphas, betas = [], []
    energy = np.inf
    limit = min(max_iter, n)
    for it in range(limit):
        w = h @ vecs[-1]
        a = float(vecs[-1] @ w)
        alphas.append(a)
        vmat = np.asarray(vecs)
        for _ in range(2):
            w = w - vmat.T @ (vmat @ w)
        prev = energy
        energy = float(eigh_tridiagonal(
            alphas, betas, eigvals_only=True, select="i",
            select_range=(0, 0))[0])
        b = float(np.linalg.norm(w))
        if b < 1e-13:
            break
        if it >= 10 and abs(energy - prev) < tol * max(1.0, abs(energy)):
            break
        betas.append(b)
        vecs.append(w / b)
    return energy


def ground_state_energy(kind: str, terms, n_sites: int, sector=None,
                        dense_cutoff: int = DENSE_CUTOFF, seed: int = 11,
                        tol: float = 1e-12, max_iter: int = 400) -> float:
    """Lowest eigenvalue of the term-list Hamiltonian in a charge sector.

    Small sectors are solved densely; larger ones fall back to Lanczos.
    """
    h = hamiltonian_matrix(kind, terms, n_sites, sector)
    if h.shape[0] <= dense_cutoff:
        return float(eigh(h.toarray(), eigvals_only=True)[0])
    return _lanczos_ground(h, seed, tol, max_iter)
