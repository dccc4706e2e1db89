"""Cylinder lattices mapped to a one-dimensional site ordering.

Sites are numbered column-major: ``site(x, y) = x * width + y`` with
``y`` running around the periodic circumference and ``x`` along the open
axis.  Width-2 cylinders keep a single copy of each wrap bond (ladder
convention), and width 1 degenerates to an open chain (next-nearest
neighbors become (x, x+2)).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    tag: str  # "nn" or "nnn"


@dataclass(frozen=True)
class Lattice:
    kind: str
    width: int
    length: int
    bonds: tuple

    @property
    def n_sites(self) -> int:
        return self.width * self.length

    def site(self, x: int, y: int) -> int:
        return x * self.width + y % self.width

    def bonds_tagged(self, tag: str) -> list:
        return [b for b in self.bonds if b.tag == tag]


def _dedup(raw):
    seen = {}
    for i, j, tag in raw:
        if i == j:
            continue
        key = (min(i, j), max(i, j), tag)
        seen[key] = Bond(key[0], key[1], tag)
    return tuple(seen[k] for k in sorted(seen))


def square_cylinder(width: int, length: int) -> Lattice:
    """Square lattice on a cylinder: periodic around ``width``, open along
    ``length``.  Nearest neighbors are the vertical and horizontal pairs;
    next-nearest neighbors are the two diagonals between adjacent columns."""
    if width < 1 or length < 1:
        raise ValueError("lattice extents must be positive")
    raw = []

    def s(x, y):
        return x * width + y % width

    for x in range(length):
        for y in range(width):
            if width > 1:
                raw.append((s(x, y), s(x, y + 1), "nn"))
            if x + 1 < length:
                raw.append((s(x, y), s(x + 1, y), "nn"))
                if width > 1:
                    raw.append((s(x, y), s(x + 1, y + 1), "nnn"))
                    raw.append((s(x, y), s(x + 1, y - 1), "nnn"))
            if width == 1 and x + 2 < length:
                raw.append((s(x, y), s(x + 2, y), "nnn"))
    return Lattice("square_cylinder", width, length, _dedup(raw))


def triangular_cylinder_xc(width: int, length: int) -> Lattice:
    """Triangular lattice on a cylinder in the XC orientation: the square
    nearest-neighbor bonds plus one diagonal family, all tagged "nn"."""
    if width < 1 or length < 1:
        raise ValueError("lattice extents must be positive")
    raw = []

    def s(x, y):
        return x * width + y % width

    for x in range(length):
        for y in range(width):
            if width > 1:
                raw.append((s(x, y), s(x, y + 1), "nn"))
            if x + 1 < length:
                raw.append((s(x, y), s(x + 1, y), "nn"))
                if width > 1:
                    raw.append((s(x, y), s(x + 1, y + 1), "nn"))
    return Lattice("triangular_cylinder_xc", width, length, _dedup(raw))


LATTICE_KINDS = {
    "square_cylinder": square_cylinder,
    "triangular_cylinder_xc": triangular_cylinder_xc,
    # short aliases
    "square": square_cylinder,
    "triangular": triangular_cylinder_xc,
}


def make_lattice(kind: str, width: int, length: int) -> Lattice:
    try:
        builder = LATTICE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown lattice kind {kind!r}") from None
    return builder(width, length)
