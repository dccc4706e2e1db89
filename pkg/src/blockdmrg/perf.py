"""Instrumentation: flop counting, block statistics, and the analytic
cost model used to compare the three contraction strategies.

Flop accounting convention
--------------------------
Contraction flops are computed from block *metadata*: for every matched
block pair, ``2 * prod(contracted dims) * prod(free dims)``.  The count is a
property of the block structure, not of the storage format, so all three
backends report identical numbers for the same network — the logical flops
of the blockwise algorithm.  (The sparse-dense backend physically multiplies
full dense arrays; its reported count is still the logical one, which is the
basis used for comparing rates.)  Factorizations report a coarse
``2*M*N*min(M,N)`` per charge-group matrix under class "svd"/"qr".
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field


class FlopCounter:
    """Thread-safe per-class flop tally."""

    def __init__(self):
        self._lock = threading.Lock()
        self.counts: dict[str, int] = {}

    def record(self, op_class: str, flops: int) -> None:
        with self._lock:
            self.counts[op_class] = self.counts.get(op_class, 0) + int(flops)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def snapshot(self) -> dict:
        with self._lock:
            return dict(self.counts)

    def __repr__(self):
        return f"FlopCounter({self.counts})"


_registry_lock = threading.Lock()
_active: list[FlopCounter] = []


def record(op_class: str, flops: int) -> None:
    """Report flops to every active counting scope (no-op when none)."""
    if not _active:
        return
    with _registry_lock:
        counters = list(_active)
    for c in counters:
        c.record(op_class, flops)


@contextmanager
def flop_scope(counter: FlopCounter | None = None):
    """Context manager: everything executed inside is tallied.  Scopes nest;
    inner scopes see only their own work, outer scopes see everything."""
    c = counter if counter is not None else FlopCounter()
    with _registry_lock:
        _active.append(c)
    try:
        yield c
    finally:
        with _registry_lock:
            _active.remove(c)


def counted_contract(a, b, spec, out_order=None):
    """Contract and return ``(result, flops)`` for that single contraction."""
    from .btensor import contract

    with flop_scope() as c:
        result = contract(a, b, spec, out_order)
    return result, c.counts.get("contract", 0)


# ----------------------------------------------------------------------
# block statistics


def block_stats(t, bond_modes=None) -> dict:
    """Summary of a tensor's block structure.

    ``largest_block_dim`` is the largest per-mode block extent, restricted to
    ``bond_modes`` when given (useful for tracking how bond blocks grow with
    the bond dimension).
    """
    from .btensor.core import sparsity

    modes = tuple(bond_modes) if bond_modes is not None else tuple(range(t.ndim))
    largest = 0
    for key in t.keys():
        shape = t.block_shape(key)
        for m in modes:
            largest = max(largest, shape[m])
    return {
        "num_blocks": t.n_blocks,
        "largest_block_dim": largest,
        "sparsity": sparsity(t),
    }


# ----------------------------------------------------------------------
# analytic cost model

ALGORITHMS = ("list", "sparse-sparse", "sparse-dense")


@dataclass(frozen=True)
class BlockModel:
    """Geometric block-size profile: block ``l`` has dimension
    ``floor((m/q) * r**l)`` for l = 0, 1, ... until it reaches zero.

    Typical fitted values: q=4, r=0.6 for spin systems and q=10, r=0.65 for
    electron systems.
    """

    m: int
    q: float
    r: float

    def block_dims(self) -> list:
        dims = []
        lead = self.m / self.q
        l = 0
        while True:
            b = math.floor(lead * self.r**l)
            if b < 1:
                break
            dims.append(b)
            l += 1
        return dims

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims())


@dataclass(frozen=True)
class CostReport:
    """Per-algorithm cost estimates with unit constants (for ranking
    strategies, not wall-time prediction)."""

    algorithm: str
    m: int
    q: float
    r: float
    k: int
    d: int
    n_sites: int
    procs: int
    flops: float
    davidson_memory: float
    env_memory: float
    supersteps: float
    comm_cost: float

    CSV_HEADER = ("algorithm,m,q,r,k,d,n_sites,procs,"
                  "flops,davidson_memory,env_memory,supersteps,comm_cost")

    def csv_row(self) -> str:
        return (f"{self.algorithm},{self.m},{self.q},{self.r},{self.k},{self.d},"
                f"{self.n_sites},{self.procs},{self.flops:.6e},"
                f"{self.davidson_memory:.6e},{self.env_memory:.6e},"
                f"{self.supersteps:.6e},{self.comm_cost:.6e}")


def model_cost(algorithm: str, block_model: BlockModel, k: int, d: int,
               n_sites: int, procs: int = 1) -> CostReport:
    """Cost estimates for one Davidson iteration under the block model.

    Per algorithm (b = m/q, the leading block dimension):

    ========  ==========  ===========  ============  ==========  ============
    alg       flops       Davidson     environments  supersteps  comm cost
    ========  ==========  ===========  ============  ==========  ============
    list      b^3 k d^2   b^2 k d^2    N b^2 k       num_blocks  M_D / p^(2/3)
    sp-sp     b^3 k d^2   b^2 k d^2    N b^2 k       1           M_D / p^(1/2)
    sp-dense  m^3 k d^2   m^2 k d^2    N b^2 k       1           M_D / p^(1/2)
    ========  ==========  ===========  ============  ==========  ============

    where M_D is that algorithm's own Davidson memory.  With one process the
    communication cost equals M_D.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if procs < 1:
        raise ValueError("procs must be >= 1")
    m = block_model.m
    b = m / block_model.q
    env = n_sites * b**2 * k
    if algorithm == "sparse-dense":
        flops = m**3 * k * d**2
        md = m**2 * k * d**2
    else:
        flops = b**3 * k * d**2
        md = b**2 * k * d**2
    if algorithm == "list":
        supersteps = float(block_model.num_blocks)
        comm = md / procs ** (2.0 / 3.0)
    else:
        supersteps = 1.0
        comm = md / procs**0.5
    return CostReport(
        algorithm=algorithm, m=m, q=block_model.q, r=block_model.r, k=k, d=d,
        n_sites=n_sites, procs=procs, flops=float(flops),
        davidson_memory=float(md), env_memory=float(env),
        supersteps=supersteps, comm_cost=float(comm),
    )


def cost_table(ms, q, r, k, d, n_sites, procs_list=(1,)) -> list:
    """CostReports over a parameter grid, deterministic row order."""
    out = []
    for m in ms:
        bm = BlockModel(m=m, q=q, r=r)
        for p in procs_list:
            for alg in ALGORITHMS:
                out.append(model_cost(alg, bm, k, d, n_sites, p))
    return out
