"""Abelian charge bookkeeping: charges, sectors, and directed indices.

A charge is a tuple of ints (one entry per conserved quantity, e.g. ``(2*Sz,)``
for spin models or ``(N, 2*Sz)`` for electron models).  Charges combine by
componentwise addition.  A :class:`QNIndex` is one tensor mode: an ordered list
of (charge, dimension) sectors plus a direction.  The flux of a block is the
sum of its inward charges minus the sum of its outward charges; a block may be
nonzero only when its flux equals the tensor's total charge.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BlockStructureError

#: Direction tags.  Flux counts IN charges with weight +1 and OUT with -1.
IN = 1
OUT = -1

# Lattice-scale charges stay tiny; anything this large is a bookkeeping bug.
_CHARGE_BOUND = 10**9


def zero(n_components: int) -> tuple:
    """The additive identity charge with ``n_components`` entries."""
    return (0,) * n_components


def fuse(a: tuple, b: tuple) -> tuple:
    """Componentwise sum of two charges."""
    if len(a) != len(b):
        raise BlockStructureError(f"charge arity mismatch: {a} vs {b}")
    out = tuple(x + y for x, y in zip(a, b))
    assert all(abs(c) < _CHARGE_BOUND for c in out)
    return out


def negate(q: tuple) -> tuple:
    """Additive inverse of a charge."""
    return tuple(-x for x in q)


def flux(indices, charges) -> tuple:
    """Net charge of one block: inward charges minus outward charges.

    Parameters
    ----------
    indices : sequence of QNIndex
    charges : sequence of charge tuples, one per index
    """
    if len(indices) != len(charges):
        raise BlockStructureError(
            f"{len(charges)} block charges for {len(indices)} indices"
        )
    if not indices:
        return ()
    total = zero(len(charges[0]))
    for ix, q in zip(indices, charges):
        term = q if ix.direction == IN else negate(q)
        total = fuse(total, term)
    return total


@dataclass(frozen=True)
class Sector:
    """One symmetry sector of an index: a charge and its dimension."""

    charge: tuple
    dim: int


class QNIndex:
    """A directed tensor mode carrying U(1) sectors.

    Sectors are kept sorted by charge (lexicographically); this canonical
    order fixes the dense layout used by densification and the sparse-dense
    storage format, so two indices with the same sectors and direction are
    interchangeable.
    """

    __slots__ = ("sectors", "direction", "_offsets")

    def __init__(self, sectors, direction):
        if direction not in (IN, OUT):
            raise BlockStructureError(f"direction must be IN or OUT, got {direction!r}")
        canon = []
        for charge, dim in sectors:
            charge = tuple(int(c) for c in charge)
            dim = int(dim)
            if dim < 1:
                raise BlockStructureError(f"sector {charge} has dim {dim} < 1")
            canon.append(Sector(charge, dim))
        if not canon:
            raise BlockStructureError("an index needs at least one sector")
        canon.sort(key=lambda s: s.charge)
        arity = {len(s.charge) for s in canon}
        if len(arity) > 1:
            raise BlockStructureError("mixed charge arities in one index")
        for a, b in zip(canon, canon[1:]):
            if a.charge == b.charge:
                raise BlockStructureError(f"duplicate sector charge {a.charge}")
        object.__setattr__(self, "sectors", tuple(canon))
        object.__setattr__(self, "direction", direction)
        offsets = {}
        pos = 0
        for s in canon:
            offsets[s.charge] = pos
            pos += s.dim
        object.__setattr__(self, "_offsets", offsets)

    def __setattr__(self, name, value):
        raise AttributeError("QNIndex is immutable")

    def __reduce__(self):
        # slots + frozen setattr need an explicit pickle path
        return (QNIndex, (tuple((s.charge, s.dim) for s in self.sectors),
                          self.direction))

    @property
    def dim(self) -> int:
        """Total dense dimension (sum of sector dims)."""
        return sum(s.dim for s in self.sectors)

    @property
    def charges(self) -> tuple:
        return tuple(s.charge for s in self.sectors)

    def has_charge(self, charge) -> bool:
        return charge in self._offsets

    def dim_of(self, charge) -> int:
        try:
            return next(s.dim for s in self.sectors if s.charge == charge)
        except StopIteration:
            raise BlockStructureError(f"index has no sector {charge}") from None

    def offset_of(self, charge) -> int:
        """Start of this sector in the canonical dense layout."""
        try:
            return self._offsets[charge]
        except KeyError:
            raise BlockStructureError(f"index has no sector {charge}") from None

    def slice_of(self, charge) -> slice:
        off = self.offset_of(charge)
        return slice(off, off + self.dim_of(charge))

    def dual(self) -> "QNIndex":
        """Same sectors, opposite direction."""
        return QNIndex([(s.charge, s.dim) for s in self.sectors], -self.direction)

    def is_dual_of(self, other) -> bool:
        return self.sectors == other.sectors and self.direction == -other.direction

    def __eq__(self, other):
        if not isinstance(other, QNIndex):
            return NotImplemented
        return self.sectors == other.sectors and self.direction == other.direction

    def __hash__(self):
        return hash((self.sectors, self.direction))

    def __repr__(self):
        arrow = "in" if self.direction == IN else "out"
        secs = ", ".join(f"{s.charge}:{s.dim}" for s in self.sectors)
        return f"QNIndex({arrow}; {secs})"
