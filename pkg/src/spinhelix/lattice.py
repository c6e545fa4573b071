"""Hypercubic lattices, bond enumeration and the helix phase ``eps . n_j``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidDims, RangeTooLarge

__all__ = ["Bond", "Lattice", "build_lattice", "phase", "axial_neighbors", "check_epsilon"]

PERIODIC = "periodic"
OPEN = "open"


class Bond(NamedTuple):
    site_a: int
    site_b: int
    direction: int
    range: int = 1


@dataclass(frozen=True, eq=False)
class Lattice:
    """Sites are linearized row-major (C order): the last axis runs fastest."""

    dims: tuple[int, ...]
    boundary: str
    site_coords: np.ndarray
    bonds: tuple[Bond, ...]

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def volume(self) -> int:
        return int(np.prod(self.dims))

    def index(self, coord: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(int(c) for c in coord), self.dims, mode="wrap"))

    def coord(self, j: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.site_coords[j])

    def __repr__(self):
        return f"Lattice(dims={self.dims}, boundary={self.boundary!r})"


def _coords(dims):
    return np.stack(np.unravel_index(np.arange(int(np.prod(dims))), dims), axis=1).astype(int)


def _axial(dims, coords, index, k, periodic):
    bonds = []
    for axis, L in enumerate(dims):
        for j, c in enumerate(coords):
            target = c[axis] + k
            if target >= L:
                if not periodic:
                    continue
                target -= L
            nc = list(c)
            nc[axis] = target
            bonds.append(Bond(j, index(nc), axis, k))
    return bonds


def build_lattice(dims: Sequence[int], boundary: str = PERIODIC) -> Lattice:
    """Materialize coordinates and the nearest-neighbour bond list.

    For periodic boundaries every site contributes one bond per axis, so
    there are ``d * V`` bonds; a length-2 axis therefore lists each pair
    twice, matching the formal bond sum.
    """
    dims = tuple(int(L) for L in dims)
    if not dims:
        raise InvalidDims("lattice needs at least one dimension")
    if any(L < 1 for L in dims):
        raise InvalidDims(f"all lengths must be >= 1, got {dims}")
    if boundary not in (PERIODIC, OPEN):
        raise InvalidDims(f"boundary must be 'periodic' or 'open', got {boundary!r}")
    if boundary == PERIODIC and any(L == 1 for L in dims):
        raise InvalidDims(f"periodic axis of length 1 would couple a site to itself: {dims}")
    coords = _coords(dims)
    coords.setflags(write=False)
    def index(c):
        return int(np.ravel_multi_index(tuple(int(x) for x in c), dims, mode="wrap"))

    bonds = _axial(dims, coords, index, 1, boundary == PERIODIC)
    return Lattice(dims, boundary, coords, tuple(bonds))


def check_epsilon(lattice: Lattice, epsilon: Sequence[int]) -> tuple[int, ...]:
    eps = tuple(int(e) for e in epsilon)
    if len(eps) != lattice.d or any(e not in (1, -1) for e in eps):
        raise ValueError(f"epsilon must be {lattice.d} entries of +1/-1, got {tuple(epsilon)}")
    return eps


def phase(lattice: Lattice, epsilon: Sequence[int], j: int | None = None):
    """``eps . n_j`` for one site, or for all sites when ``j`` is None."""
    eps = np.asarray(check_epsilon(lattice, epsilon))
    if j is None:
        return lattice.site_coords @ eps
    return int(lattice.site_coords[j] @ eps)


def axial_neighbors(lattice: Lattice, k: int) -> list[Bond]:
    """All pairs displaced by ``k`` along a single axis (periodic lattices).

    ``k = 1`` returns the nearest-neighbour list.  For ``k >= 2`` each
    axis must satisfy ``2k < L`` so no pair is reached twice by wrapping.
    """
    if lattice.boundary != PERIODIC:
        raise InvalidDims("k-th neighbour bonds are defined for periodic lattices only")
    if k < 1:
        raise RangeTooLarge(f"range must be >= 1, got {k}")
    if k == 1:
        return list(lattice.bonds)
    bad = [L for L in lattice.dims if 2 * k >= L]
    if bad:
        raise RangeTooLarge(f"range {k} wraps ambiguously on axes of length {bad}")
    return _axial(lattice.dims, lattice.site_coords, lattice.index, k, True)
