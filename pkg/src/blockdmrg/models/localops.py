"""Site bases and local operator matrices.

Matrices are written in the canonical sector order of the physical index
(sectors sorted by charge), so they can be sliced directly into charge
blocks:

* spin-1/2, charge ``(2*Sz,)``: basis order (down, up);
* electron, charge ``(N, 2*Sz)``: basis order (empty, down, up, double).

Electron operators use a fixed fermionic mode ordering — site-major, up
before down — and the within-site anticommutation signs are baked into the
matrices (``Cd``/``Cdd`` carry a sign on the doubly occupied state).  The
parity operator ``F`` implements the string between sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..qn import IN, QNIndex


@dataclass(frozen=True)
class LocalOp:
    name: str
    matrix: np.ndarray
    charge: tuple  # row charge minus column charge
    fermionic: bool


def _op(name, matrix, charge, fermionic=False):
    return LocalOp(name, np.array(matrix, dtype=np.float64), tuple(charge), fermionic)


def spin_half_index() -> QNIndex:
    return QNIndex([((-1,), 1), ((+1,), 1)], IN)


def spin_half_ops() -> dict:
    ops = [
        _op("Id", np.eye(2), (0,)),
        _op("Sz", [[-0.5, 0.0], [0.0, 0.5]], (0,)),
        _op("S+", [[0.0, 0.0], [1.0, 0.0]], (2,)),
        _op("S-", [[0.0, 1.0], [0.0, 0.0]], (-2,)),
    ]
    return {o.name: o for o in ops}


def electron_index() -> QNIndex:
    return QNIndex([((0, 0), 1), ((1, -1), 1), ((1, 1), 1), ((2, 0), 1)], IN)


def electron_ops() -> dict:
    cu = np.zeros((4, 4))
    cu[0, 2] = 1.0   # |0><up|
    cu[1, 3] = 1.0   # |dn><updn|
    cd = np.zeros((4, 4))
    cd[0, 1] = 1.0   # |0><dn|
    cd[2, 3] = -1.0  # -|up><updn|   (passes the up mode)
    ops = [
        _op("Id", np.eye(4), (0, 0)),
        _op("F", np.diag([1.0, -1.0, -1.0, 1.0]), (0, 0)),
        _op("Cu", cu, (-1, -1), fermionic=True),
        _op("Cdu", cu.T, (1, 1), fermionic=True),
        _op("Cd", cd, (-1, 1), fermionic=True),
        _op("Cdd", cd.T, (1, -1), fermionic=True),
        _op("Nu", np.diag([0.0, 0.0, 1.0, 1.0]), (0, 0)),
        _op("Nd", np.diag([0.0, 1.0, 0.0, 1.0]), (0, 0)),
        _op("Ntot", np.diag([0.0, 1.0, 1.0, 2.0]), (0, 0)),
        _op("Nud", np.diag([0.0, 0.0, 0.0, 1.0]), (0, 0)),
        _op("Sz", np.diag([0.0, -0.5, 0.5, 0.0]), (0, 0)),
    ]
    return {o.name: o for o in ops}


SITE_KINDS = ("spin", "electron")


def site_basis(kind: str):
    """(physical index, operator table) for a site kind."""
    if kind == "spin":
        return spin_half_index(), spin_half_ops()
    if kind == "electron":
        return electron_index(), electron_ops()
    raise ValueError(f"unknown site kind {kind!r}")
