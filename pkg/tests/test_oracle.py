"""The exact-diagonalization reference path: bases, matrices, eigenvalues."""

import math

import numpy as np
import pytest

from blockdmrg.errors import ResourceLimitError
from blockdmrg.models import (OpTerm, build_heisenberg, build_hubbard,
                              make_lattice)
from blockdmrg.oracle import (ground_state_energy, hamiltonian_matrix,
                              load_golden, save_golden, sector_basis)
from blockdmrg.oracle.ed import _lanczos_ground


def test_spin_sector_dimensions_are_binomials():
    for n in (2, 4, 6, 8):
        for n_up in range(n + 1):
            sz2 = 2 * n_up - n
            basis = sector_basis("spin", n, (sz2,))
            assert basis.size == math.comb(n, n_up)
        full = sector_basis("spin", n, None)
        assert full.size == 2 ** n


def test_electron_sector_dimensions():
    n = 4
    # (N, 2Sz) = (4, 0): two up, two down among 4 sites each
    basis = sector_basis("electron", n, (4, 0))
    assert basis.size == math.comb(4, 2) ** 2
    basis = sector_basis("electron", n, (2, 2))   # two up, zero down
    assert basis.size == math.comb(4, 2)
    assert sector_basis("electron", n, None).size == 4 ** n


def test_basis_sorted_unique():
    basis = sector_basis("spin", 6, (0,))
    assert np.all(np.diff(basis) > 0)


def test_hamiltonian_is_symmetric():
    lat = make_lattice("square", 1, 6)
    terms = build_heisenberg(lat, 1.0, 0.3)
    h = hamiltonian_matrix("spin", terms, 6, sector=(0,)).toarray()
    assert np.max(np.abs(h - h.T)) == 0.0
    lat2 = make_lattice("triangular", 2, 2)
    terms2 = build_hubbard(lat2, 1.0, 3.0)
    h2 = hamiltonian_matrix("electron", terms2, 4, sector=(4, 0)).toarray()
    assert np.max(np.abs(h2 - h2.T)) < 1e-14


def test_sector_blocks_concatenate_to_full():
    """Summing ground energies over sectors finds the global minimum."""
    lat = make_lattice("square", 1, 4)
    terms = build_heisenberg(lat, 1.0, 0.0)
    full = ground_state_energy("spin", terms, 4, sector=None)
    best = min(ground_state_energy("spin", terms, 4, sector=(sz2,))
               for sz2 in (-4, -2, 0, 2, 4))
    assert abs(full - best) < 1e-12


def test_singlet_ground_state_of_dimer():
    terms = build_heisenberg(make_lattice("square", 1, 2), 1.0, 0.0)
    assert abs(ground_state_energy("spin", terms, 2, (0,)) + 0.75) < 1e-13


def test_lanczos_agrees_with_dense():
    lat = make_lattice("square", 1, 10)
    terms = build_heisenberg(lat, 1.0, 0.25)
    dense = ground_state_energy("spin", terms, 10, (0,))          # dim 252
    lanc = ground_state_energy("spin", terms, 10, (0,), dense_cutoff=0)
    assert abs(dense - lanc) < 1e-10


def test_lanczos_on_plain_matrix():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((60, 60))
    m = m + m.T
    want = float(np.linalg.eigh(m)[0][0])
    got = _lanczos_ground(m, seed=11, tol=1e-12, max_iter=400)
    assert abs(got - want) < 1e-10


def test_charge_leak_detection():
    # S+ alone walks out of any fixed-Sz sector
    with pytest.raises(Exception):
        hamiltonian_matrix("spin", [OpTerm(1.0, ((0, "S+"), (1, "Sz")))],
                           2, sector=(0,))


def test_enumeration_guard():
    with pytest.raises(ResourceLimitError):
        sector_basis("electron", 16, None)     # 4^16 states


def test_golden_roundtrip(tmp_path):
    path = tmp_path / "vals.txt"
    vals = {"b": -1.25, "a": 3.0, "n": 7}
    save_golden(path, vals)
    back = load_golden(path)
    assert back == vals
    # stable content: a second save writes identical bytes
    data1 = path.read_bytes()
    save_golden(path, dict(reversed(list(vals.items()))))
    assert path.read_bytes() == data1


def test_reference_energies_stable():
    """Live exact diagonalization reproduces the frozen reference file."""
    import pathlib
    golden = load_golden(pathlib.Path(__file__).parent / "data" /
                         "golden_energies.txt")
    lat = make_lattice("square", 4, 2)
    live = ground_state_energy("spin", build_heisenberg(lat, 1.0, 0.5), 8, (0,))
    assert abs(live - golden["heisenberg_4x2_j2_0.5_sz0"]) < 1e-12
    lat = make_lattice("triangular", 2, 2)
    live = ground_state_energy("electron", build_hubbard(lat, 1.0, 8.5), 4, (4, 0))
    assert abs(live - golden["hubbard_tri_2x2_u8.5_half"]) < 1e-12
    assert golden["heisenberg_dimer_sz0"] == -0.75
