"""Hamiltonians as sums of operator strings.

An :class:`OpTerm` is ``coefficient * op(site_1) * op(site_2) * ...`` with
factors written left to right in operator order.  Model builders emit terms
already normal-ordered (sites strictly increasing); :func:`normal_order`
fixes up arbitrary two-factor input, tracking the fermionic sign of the
swap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lattice import Lattice
from .localops import site_basis


@dataclass(frozen=True)
class OpTerm:
    coefficient: float
    factors: tuple  # ((site, opname), ...)

    def __post_init__(self):
        object.__setattr__(self, "coefficient", float(self.coefficient))
        object.__setattr__(
            self, "factors", tuple((int(s), str(o)) for s, o in self.factors))
        if not self.factors:
            raise ValueError("a term needs at least one factor")


def normal_order(term: OpTerm, ops: dict) -> OpTerm:
    """Sort factors by site, flipping the sign for each fermionic swap.

    Factors on the same site are not merged (no model here needs it); terms
    must carry an even number of fermionic factors so the string between
    terms closes.
    """
    factors = list(term.factors)
    for site, name in factors:
        if name not in ops:
            raise ValueError(f"unknown operator {name!r}")
    n_fermi = sum(1 for _, name in factors if ops[name].fermionic)
    if n_fermi % 2:
        raise ValueError(f"odd number of fermionic factors in {term}")
    sign = 1.0
    # bubble sort, counting fermionic transpositions
    changed = True
    while changed:
        changed = False
        for a in range(len(factors) - 1):
            if factors[a][0] > factors[a + 1][0]:
                if ops[factors[a][1]].fermionic and ops[factors[a + 1][1]].fermionic:
                    sign = -sign
                factors[a], factors[a + 1] = factors[a + 1], factors[a]
                changed = True
    sites = [s for s, _ in factors]
    if len(set(sites)) != len(sites):
        raise ValueError(f"repeated site in term {term}; merge factors first")
    return OpTerm(sign * term.coefficient, tuple(factors))


def build_heisenberg(lattice: Lattice, j1: float = 1.0, j2: float = 0.0) -> list:
    """Spin-1/2 Heisenberg terms: J * (  (S+S- + S-S+)/2 + Sz Sz ) on
    nearest-neighbor bonds (J=j1) and next-nearest ones (J=j2)."""
    _, ops = site_basis("spin")
    terms = []
    for bond in lattice.bonds:
        j = j1 if bond.tag == "nn" else j2
        if j == 0.0:
            continue
        i, k = bond.i, bond.j
        terms.append(OpTerm(0.5 * j, ((i, "S+"), (k, "S-"))))
        terms.append(OpTerm(0.5 * j, ((i, "S-"), (k, "S+"))))
        terms.append(OpTerm(j, ((i, "Sz"), (k, "Sz"))))
    return [normal_order(t, ops) for t in terms]


def build_hubbard(lattice: Lattice, t: float = 1.0, u: float = 0.0) -> list:
    """Hubbard terms: -t (cdag_i,s c_j,s + h.c.) on nearest-neighbor bonds
    plus U n_up n_dn on every site."""
    _, ops = site_basis("electron")
    terms = []
    for bond in lattice.bonds_tagged("nn"):
        i, j = bond.i, bond.j
        for cdag, c in (("Cdu", "Cu"), ("Cdd", "Cd")):
            terms.append(OpTerm(-t, ((i, cdag), (j, c))))
            terms.append(OpTerm(-t, ((j, cdag), (i, c))))
    for s in range(lattice.n_sites):
        if u != 0.0:
            terms.append(OpTerm(u, ((s, "Nud"),)))
    return [normal_order(t_, ops) for t_ in terms]


def half_filling_charge(n_sites: int) -> tuple:
    """Total charge (N, 2Sz) for half filling with zero net spin."""
    if n_sites % 2:
        raise ValueError("half filling with zero spin needs an even site count")
    return (n_sites, 0)
