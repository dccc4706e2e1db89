"""Independent reference implementations used for verification."""

from .densify import densify, densify_mpo, densify_mps
from .ed import (DENSE_CUTOFF, ground_state_energy, hamiltonian_matrix,
                 sector_basis)
from .golden import load_golden, save_golden

__all__ = [
    "DENSE_CUTOFF",
    "densify",
    "densify_mpo",
    "densify_mps",
    "ground_state_energy",
    "hamiltonian_matrix",
    "load_golden",
    "save_golden",
    "sector_basis",
]
