"""Two-site ground-state DMRG driver.

A run walks a schedule of stages (bond-dimension ramps); every stage does
full sweeps, each of which is a left-to-right half sweep over bonds
0..n-2 followed by a right-to-left half sweep back.  At each bond the
two-site tensor is optimized with the blocked Davidson solver, split by a
truncated SVD, and the adjacent environment is rebuilt.

The ``backend`` argument selects the block storage format used for every
tensor in the run ("list", "sparse-sparse", or "sparse-dense").  Flop
counts derive from block metadata only, so all three backends report
identical counts for the same sweep; accumulation order is fixed, so
energies are bitwise reproducible across thread counts.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .btensor import (
    FORMAT_LIST,
    FORMAT_SPARSE_DENSE,
    FORMAT_SPARSE_SPARSE,
    block_svd,
    random_tensor,
    scale_bond,
)
from .errors import BlockStructureError
from .netops import (
    MPS,
    apply_effective_h,
    build_left_env,
    build_right_env,
    canonicalize,
    left_edge,
    right_edge,
    save_mps,
    two_site_tensor,
)
from .perf import block_stats, flop_scope
from .qn import OUT, QNIndex, fuse, zero
from .solver import DavidsonConfig, davidson

BACKENDS = ("list", "sparse-sparse", "sparse-dense")
_BACKEND_FORMAT = {
    "list": FORMAT_LIST,
    "sparse-sparse": FORMAT_SPARSE_SPARSE,
    "sparse-dense": FORMAT_SPARSE_DENSE,
}


@dataclass(frozen=True)
class SweepStage:
    """One entry of a bond-dimension schedule."""

    max_bond: int
    num_sweeps: int = 1
    svd_cutoff: float = 0.0
    davidson_tol: float = 1e-9
    davidson_max_iter: int = 25

    def __post_init__(self):
        if self.max_bond < 1:
            raise ValueError("max_bond must be at least 1")
        if self.num_sweeps < 1:
            raise ValueError("num_sweeps must be at least 1")
        if self.svd_cutoff < 0.0:
            raise ValueError("svd_cutoff must be non-negative")


@dataclass(frozen=True)
class SweepSchedule:
    stages: tuple

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages:
            raise ValueError("schedule needs at least one stage")
        bonds = [st.max_bond for st in stages]
        if any(b2 < b1 for b1, b2 in zip(bonds, bonds[1:])):
            raise ValueError("stage bond dimensions must be non-decreasing")

    @classmethod
    def ramp(cls, bonds, sweeps_each=2, **kwargs):
        """Convenience: one stage per bond dimension in ``bonds``."""
        return cls(tuple(SweepStage(b, sweeps_each, **kwargs) for b in bonds))


@dataclass(frozen=True)
class SweepReport:
    """Summary of one half sweep; all fields except seconds are
    deterministic for a fixed configuration."""

    stage: int
    sweep: int
    direction: str
    energy: float
    max_trunc_error: float
    max_bond_dim: int
    largest_block_dim: int
    num_blocks: int
    matvecs: int
    flops: dict
    seconds: float

    def as_dict(self):
        return {
            "stage": self.stage,
            "sweep": self.sweep,
            "direction": self.direction,
            "energy": self.energy,
            "max_trunc_error": self.max_trunc_error,
            "max_bond_dim": self.max_bond_dim,
            "largest_block_dim": self.largest_block_dim,
            "num_blocks": self.num_blocks,
            "matvecs": self.matvecs,
            "flops": dict(self.flops),
            "seconds": self.seconds,
        }


@dataclass
class DMRGResult:
    energy: float
    psi: MPS
    reports: list = field(default_factory=list)
    total_flops: dict = field(default_factory=dict)

    @property
    def energies(self):
        return [r.energy for r in self.reports]


def random_mps(phys: QNIndex, n_sites: int, total_charge, max_bond: int,
               seed: int = 0, fmt: str = FORMAT_LIST) -> MPS:
    """A random charge-conserving MPS, right-canonicalized to center 0.

    Bond sectors are chosen by counting charge paths from both chain ends
    and capping the per-cut dimension at ``max_bond`` (proportionally over
    sectors, at least one state per reachable sector).
    """
    nq = len(phys.charges[0])
    total_charge = tuple(int(c) for c in total_charge)
    if len(total_charge) != nq:
        raise BlockStructureError("total charge arity does not match the site basis")
    site_charges = list(phys.charges)
    site_dims = {q: phys.dim_of(q) for q in site_charges}

    lcount = [dict() for _ in range(n_sites + 1)]
    lcount[0][zero(nq)] = 1
    for c in range(n_sites):
        for q, cnt in lcount[c].items():
            for sq in site_charges:
                nq_ = fuse(q, sq)
                lcount[c + 1][nq_] = lcount[c + 1].get(nq_, 0) + cnt * site_dims[sq]
    rcount = [dict() for _ in range(n_sites + 1)]
    rcount[n_sites][total_charge] = 1
    for c in range(n_sites - 1, -1, -1):
        for q, cnt in rcount[c + 1].items():
            for sq in site_charges:
                # q reached after absorbing sq from charge q - sq
                prev = fuse(q, tuple(-x for x in sq))
                rcount[c][prev] = rcount[c].get(prev, 0) + cnt * site_dims[sq]
    if total_charge not in lcount[n_sites]:
        raise BlockStructureError(
            f"total charge {total_charge} is unreachable on {n_sites} sites")

    cuts = []
    for c in range(n_sites + 1):
        raw = {q: min(cnt, rcount[c].get(q, 0), max_bond)
               for q, cnt in sorted(lcount[c].items())}
        raw = {q: v for q, v in raw.items() if v > 0}
        total_dim = sum(raw.values())
        if total_dim > max_bond:
            scale = max_bond / total_dim
            dims = {q: max(1, int(v * scale)) for q, v in raw.items()}
            # trim largest sectors until the cap holds
            while sum(dims.values()) > max_bond:
                q = max((qq for qq in dims if dims[qq] > 1),
                        key=lambda qq: (dims[qq], qq), default=None)
                if q is None:
                    break
                dims[q] -= 1
        else:
            dims = raw
        cuts.append(QNIndex(sorted(dims.items()), OUT))

    rng = np.random.default_rng(seed)
    sites = []
    for j in range(n_sites):
        indices = (cuts[j].dual(), phys, cuts[j + 1])
        sites.append(random_tensor(indices, zero(nq), rng, fmt))
    psi = MPS(sites, total_charge=total_charge)
    canonicalize(psi, 0)
    return psi


def _site_stats(psi):
    largest = 0
    blocks = 0
    for s in psi.sites:
        st = block_stats(s)
        largest = max(largest, st["largest_block_dim"])
        blocks += st["num_blocks"]
    return largest, blocks


def _convert_sites(psi, fmt):
    for j in range(psi.n):
        psi.sites[j] = psi.sites[j].convert(fmt)


def run_dmrg(psi: MPS, h, schedule: SweepSchedule, backend: str = "list",
             callback=None, checkpoint_path=None,
             davidson_seed: int = 7) -> DMRGResult:
    """Run the scheduled sweeps, mutating and returning ``psi``.

    ``callback`` (if given) receives each :class:`SweepReport` as it is
    produced.  ``checkpoint_path`` writes the state after every half sweep
    (atomically, via a temporary file).
    """
    if backend not in _BACKEND_FORMAT:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    fmt = _BACKEND_FORMAT[backend]
    n = psi.n
    if h.n != n:
        raise BlockStructureError("state and operator have different lengths")
    if n < 2:
        raise BlockStructureError("two-site sweeps need at least two sites")

    canonicalize(psi, 0)
    _convert_sites(psi, fmt)
    hsites = [w.convert(fmt) for w in h.sites]

    ls = [None] * (n + 1)
    rs = [None] * (n + 1)
    ls[0] = left_edge(psi, h, fmt=fmt)
    rs[n] = right_edge(psi, h, fmt=fmt)
    for j in range(n - 1, 1, -1):
        rs[j] = build_right_env(rs[j + 1], psi.sites[j], hsites[j])

    reports = []
    total_flops = {}
    last_energy = None

    for stage_no, stage in enumerate(schedule.stages):
        dconf = DavidsonConfig(max_iter=stage.davidson_max_iter,
                               residual_tol=stage.davidson_tol,
                               seed=davidson_seed)
        for sweep_no in range(stage.num_sweeps):
            for direction in ("LR", "RL"):
                bonds = range(n - 1) if direction == "LR" else range(n - 2, -1, -1)
                t0 = time.perf_counter()
                max_trunc = 0.0
                matvecs = 0
                with flop_scope() as counter:
                    for j in bonds:
                        theta = two_site_tensor(psi, j)

                        def apply_op(x, _j=j):
                            return apply_effective_h(ls[_j], rs[_j + 2],
                                                     hsites[_j], hsites[_j + 1], x)

                        res = davidson(apply_op, theta, dconf)
                        matvecs += res.matvecs
                        last_energy = res.eigenvalue
                        u, s, v, trunc = block_svd(res.eigenvector, (0, 1), (2, 3),
                                                   max_rank=stage.max_bond,
                                                   cutoff=stage.svd_cutoff)
                        max_trunc = max(max_trunc, trunc)
                        if direction == "LR":
                            psi.sites[j] = u.convert(fmt)
                            psi.sites[j + 1] = scale_bond(v, 0, s).convert(fmt)
                            psi.center = j + 1
                            ls[j + 1] = build_left_env(ls[j], psi.sites[j], hsites[j])
                        else:
                            psi.sites[j] = scale_bond(u, 2, s).convert(fmt)
                            psi.sites[j + 1] = v.convert(fmt)
                            psi.center = j
                            rs[j + 1] = build_right_env(rs[j + 2], psi.sites[j + 1],
                                                        hsites[j + 1])
                flops = counter.snapshot()
                for k, val in flops.items():
                    total_flops[k] = total_flops.get(k, 0) + val
                largest, blocks = _site_stats(psi)
                report = SweepReport(
                    stage=stage_no,
                    sweep=sweep_no,
                    direction=direction,
                    energy=last_energy,
                    max_trunc_error=max_trunc,
                    max_bond_dim=max(psi.bond_dims()),
                    largest_block_dim=largest,
                    num_blocks=blocks,
                    matvecs=matvecs,
                    flops=flops,
                    seconds=time.perf_counter() - t0,
                )
                reports.append(report)
                if callback is not None:
                    callback(report)
                if checkpoint_path is not None:
                    tmp = str(checkpoint_path) + ".tmp"
                    save_mps(tmp, psi)
                    os.replace(tmp, checkpoint_path)

    return DMRGResult(energy=last_energy, psi=psi, reports=reports,
                      total_flops=total_flops)
