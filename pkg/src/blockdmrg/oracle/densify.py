"""Dense reference forms of block tensors, states, and operators.

These exist for verification: a block tensor is scattered into one dense
ndarray, a chain state into a full Hilbert-space vector, and a chain
operator into a full matrix, so results can be checked against plain
numpy (einsum, eigh).  Sizes are guarded — these are test utilities, not
production paths.
"""

from __future__ import annotations

import numpy as np

from ..errors import ResourceLimitError

DEFAULT_MAX_ELEMENTS = 1 << 24


def _guard(n_elements, limit, what):
    if n_elements > limit:
        raise ResourceLimitError(
            f"{what} would hold {n_elements} elements (limit {limit})")


def densify(t, max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
    """The dense ndarray equal to a block tensor (zeros where no block)."""
    n = 1
    for ix in t.indices:
        n *= ix.dim
    _guard(n, max_elements, "dense tensor")
    return t.to_dense()


def densify_mps(psi, max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
    """The full state vector of an MPS, site-major (site 0 slowest).

    Local bases follow each site's physical index sector order.
    """
    dims = [s.indices[1].dim for s in psi.sites]
    n = 1
    for d in dims:
        n *= d
    _guard(n, max_elements, "state vector")
    vec = psi.sites[0].to_dense()            # (1, d, r)
    vec = vec.reshape(dims[0], -1)
    for site in psi.sites[1:]:
        dense = site.to_dense()              # (l, d, r)
        vec = np.tensordot(vec, dense, axes=([-1], [0]))
        vec = vec.reshape(-1, dense.shape[2])
    return vec.reshape(-1)


def densify_mpo(h, max_elements: int = DEFAULT_MAX_ELEMENTS) -> np.ndarray:
    """The full matrix of an MPO in the same site-major product basis."""
    dims = [s.indices[1].dim for s in h.sites]
    n = 1
    for d in dims:
        n *= d
    _guard(n * n, max_elements, "operator matrix")
    mat = h.sites[0].to_dense()[0]           # (d, d', k)
    for site in h.sites[1:]:
        dense = site.to_dense()              # (k, d, d', k')
        mat = np.tensordot(mat, dense, axes=([-1], [0]))
        # (bra, ket, d, d', k') -> (bra*d, ket*d', k')
        mat = mat.transpose(0, 2, 1, 3, 4)
        mat = mat.reshape(mat.shape[0] * mat.shape[1],
                          mat.shape[2] * mat.shape[3], mat.shape[4])
    return mat[:, :, 0]
