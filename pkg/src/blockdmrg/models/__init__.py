"""Lattices, local operator bases, Hamiltonian term lists, and MPO assembly."""

from .lattice import LATTICE_KINDS, Bond, Lattice, make_lattice, square_cylinder, triangular_cylinder_xc
from .localops import SITE_KINDS, LocalOp, electron_index, electron_ops, site_basis, spin_half_index, spin_half_ops
from .mpo import compress_mpo, identity_mpo, sum_site_mpo, terms_to_mpo
from .terms import OpTerm, build_heisenberg, build_hubbard, half_filling_charge, normal_order

__all__ = [
    "LATTICE_KINDS",
    "Bond",
    "Lattice",
    "LocalOp",
    "OpTerm",
    "SITE_KINDS",
    "build_heisenberg",
    "build_hubbard",
    "compress_mpo",
    "electron_index",
    "electron_ops",
    "half_filling_charge",
    "identity_mpo",
    "make_lattice",
    "normal_order",
    "site_basis",
    "spin_half_index",
    "spin_half_ops",
    "square_cylinder",
    "sum_site_mpo",
    "terms_to_mpo",
    "triangular_cylinder_xc",
]
