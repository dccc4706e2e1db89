"""The two-site sweep driver: state preparation, convergence, checkpoints."""

import numpy as np
import pytest

from blockdmrg.dmrg import (BACKENDS, DMRGResult, SweepSchedule, SweepStage,
                            random_mps, run_dmrg)
from blockdmrg.models import (build_heisenberg, build_hubbard,
                              half_filling_charge, make_lattice, site_basis,
                              terms_to_mpo)
from blockdmrg.netops import load_mps, mps_inner, mps_norm
from blockdmrg.oracle import ground_state_energy


def _spin_problem(n, j2=0.0):
    lat = make_lattice("square", 1, n)
    terms = build_heisenberg(lat, j1=1.0, j2=j2)
    h = terms_to_mpo(terms, "spin", n)
    return terms, h


# -------------------------------------------------------------- random_mps

def test_random_mps_shape_and_norm():
    phys, _ = site_basis("spin")
    psi = random_mps(phys, 8, (0,), 7, seed=2)
    psi.validate()
    assert psi.n == 8
    assert psi.center == 0
    assert abs(mps_norm(psi) - 1.0) < 1e-12
    assert psi.sites[0].indices[0].dim == 1
    assert psi.sites[-1].indices[2].dim == 1
    assert all(d <= 7 for d in psi.bond_dims())


def test_random_mps_total_charge_sectors():
    phys, _ = site_basis("electron")
    psi = random_mps(phys, 4, (4, 0), 10, seed=1)
    psi.validate()
    assert psi.total_charge == (4, 0)


def test_random_mps_seed_reproducible():
    phys, _ = site_basis("spin")
    a = random_mps(phys, 6, (0,), 5, seed=9)
    b = random_mps(phys, 6, (0,), 5, seed=9)
    assert abs(mps_inner(a, b) - mps_inner(a, a)) < 1e-14


def test_random_mps_rejects_unreachable_charge():
    phys, _ = site_basis("spin")
    with pytest.raises(Exception):
        random_mps(phys, 4, (5,), 4)        # odd 2Sz on even sites
    with pytest.raises(Exception):
        random_mps(phys, 2, (6,), 4)        # beyond max polarization


# ---------------------------------------------------------------- schedule

def test_schedule_validation():
    with pytest.raises(ValueError):
        SweepSchedule((SweepStage(32), SweepStage(16)))
    with pytest.raises(ValueError):
        SweepSchedule(())
    with pytest.raises(ValueError):
        SweepStage(0)
    with pytest.raises(ValueError):
        SweepStage(8, num_sweeps=0)


def test_schedule_ramp():
    sched = SweepSchedule.ramp([8, 16, 32], sweeps_each=3, svd_cutoff=1e-10)
    assert [st.max_bond for st in sched.stages] == [8, 16, 32]
    assert all(st.num_sweeps == 3 for st in sched.stages)
    assert all(st.svd_cutoff == 1e-10 for st in sched.stages)


# -------------------------------------------------------------- convergence

def test_converges_to_exact_chain_energy():
    n = 8
    terms, h = _spin_problem(n, j2=0.3)
    want = ground_state_energy("spin", terms, n, (0,))
    phys, _ = site_basis("spin")
    psi = random_mps(phys, n, (0,), 8, seed=4)
    sched = SweepSchedule.ramp([16, 32], sweeps_each=2)
    res = run_dmrg(psi, h, sched)
    assert isinstance(res, DMRGResult)
    assert abs(res.energy - want) < 1e-10 * max(1.0, abs(want))
    assert abs(mps_norm(res.psi) - 1.0) < 1e-10


def test_energy_sequence_settles_monotonically():
    n = 8
    _, h = _spin_problem(n)
    phys, _ = site_basis("spin")
    psi = random_mps(phys, n, (0,), 8, seed=4)
    res = run_dmrg(psi, h, SweepSchedule.ramp([24], sweeps_each=4))
    es = res.energies
    assert all(e2 <= e1 + 1e-9 for e1, e2 in zip(es, es[1:]))


def test_reports_structure():
    n = 6
    _, h = _spin_problem(n)
    phys, _ = site_basis("spin")
    psi = random_mps(phys, n, (0,), 6, seed=0)
    sched = SweepSchedule((SweepStage(8, num_sweeps=2), SweepStage(12)))
    res = run_dmrg(psi, h, sched)
    assert len(res.reports) == 2 * (2 + 1)          # two half sweeps per sweep
    assert [r.direction for r in res.reports] == ["LR", "RL"] * 3
    assert [r.stage for r in res.reports] == [0, 0, 0, 0, 1, 1]
    for r in res.reports:
        assert r.max_bond_dim <= sched.stages[r.stage].max_bond
        assert r.matvecs > 0
        assert r.flops.get("contract", 0) > 0
        assert r.max_trunc_error >= 0.0
    assert res.total_flops["contract"] == sum(
        r.flops["contract"] for r in res.reports)


def test_truncation_errors_reported_when_bond_starved():
    n = 8
    terms, h = _spin_problem(n)
    phys, _ = site_basis("spin")
    psi = random_mps(phys, n, (0,), 4, seed=4)
    res = run_dmrg(psi, h, SweepSchedule.ramp([4], sweeps_each=2))
    assert max(r.max_trunc_error for r in res.reports) > 0.0
    assert max(r.max_bond_dim for r in res.reports) <= 4


def test_backend_rejected():
    n = 4
    _, h = _spin_problem(n)
    phys, _ = site_basis("spin")
    psi = random_mps(phys, n, (0,), 4)
    with pytest.raises(ValueError):
        run_dmrg(psi, h, SweepSchedule.ramp([4], 1), backend="dense")


def test_backends_agree_and_count_identical_flops():
    n = 6
    terms, h = _spin_problem(n, j2=0.4)
    phys, _ = site_basis("spin")
    sched = SweepSchedule.ramp([12], sweeps_each=2)
    results = {}
    for backend in BACKENDS:
        psi = random_mps(phys, n, (0,), 6, seed=3)
        results[backend] = run_dmrg(psi, h, sched, backend=backend)
    e = [results[b].energy for b in BACKENDS]
    assert max(e) - min(e) < 1e-12
    flops = [results[b].total_flops for b in BACKENDS]
    assert flops[0] == flops[1] == flops[2]


def test_callback_and_checkpoint(tmp_path):
    n = 6
    _, h = _spin_problem(n)
    phys, _ = site_basis("spin")
    psi = random_mps(phys, n, (0,), 6, seed=0)
    seen = []
    ck = tmp_path / "state.bdc"
    res = run_dmrg(psi, h, SweepSchedule.ramp([8], sweeps_each=1),
                   callback=lambda rep: seen.append(rep.direction),
                   checkpoint_path=str(ck))
    assert seen == ["LR", "RL"]
    assert ck.exists()
    back = load_mps(str(ck))
    ov = mps_inner(back, res.psi)
    assert abs(abs(ov) - 1.0) < 1e-10


def test_checkpoint_restart_reaches_same_energy(tmp_path):
    n = 8
    terms, h = _spin_problem(n, j2=0.2)
    want = ground_state_energy("spin", terms, n, (0,))
    phys, _ = site_basis("spin")
    ck = tmp_path / "warm.bdc"
    psi = random_mps(phys, n, (0,), 8, seed=4)
    run_dmrg(psi, h, SweepSchedule.ramp([16], sweeps_each=1),
             checkpoint_path=str(ck))
    warm = load_mps(str(ck))
    res = run_dmrg(warm, h, SweepSchedule.ramp([24], sweeps_each=2))
    assert abs(res.energy - want) < 1e-9


def test_hubbard_small_cluster_energy():
    lat = make_lattice("square", 1, 4)
    terms = build_hubbard(lat, t=1.0, u=2.0)
    h = terms_to_mpo(terms, "electron", 4)
    want = ground_state_energy("electron", terms, 4, (4, 0))
    phys, _ = site_basis("electron")
    psi = random_mps(phys, 4, half_filling_charge(4), 12, seed=6)
    res = run_dmrg(psi, h, SweepSchedule.ramp([16, 32], sweeps_each=2))
    assert abs(res.energy - want) < 1e-9 * max(1.0, abs(want))
