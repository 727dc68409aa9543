"""Cubic lattice geometry: site indexing, cubic regions and lattice symmetries.

Sites of ``[L]^D`` are indexed row-major with the *last* axis slowest, so
``index = x_0 + L*x_1 + ... + L**(D-1) * x_{D-1}``.  The last axis is the
stacking axis: each hyperplane ``x_{D-1} = k`` is the contiguous index range
``[k*L**(D-1), (k+1)*L**(D-1))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Lattice",
    "Region",
    "region_boundary",
    "enumerate_cubic_regions",
    "translation_perm",
    "reflection_perm",
    "axis_swap_perm",
    "rotation_perm",
    "stacking_rotation_perm",
    "chebyshev_distance",
]


@dataclass(frozen=True)
class Lattice:
    D: int
    L: int
    d: int = 3

    def __post_init__(self):
        if self.D < 1 or self.L < 1:
            raise ValueError(f"lattice needs D >= 1 and L >= 1, got D={self.D}, L={self.L}")
        if self.d < 2:
            raise ValueError(f"local dimension must be >= 2, got {self.d}")

    @property
    def n_sites(self) -> int:
        return self.L**self.D

    @property
    def plane_size(self) -> int:
        """Number of sites in one hyperplane orthogonal to the stacking axis."""
        return self.L ** (self.D - 1)

    def index(self, coord: Sequence[int]) -> int:
        if len(coord) != self.D:
            raise ValueError(f"coordinate {tuple(coord)} does not have {self.D} entries")
        idx = 0
        for x in reversed(coord):
            if not 0 <= x < self.L:
                raise ValueError(f"coordinate {tuple(coord)} outside [0, {self.L})")
            idx = idx * self.L + int(x)
        return idx

    def coord(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.n_sites:
            raise ValueError(f"site index {index} outside [0, {self.n_sites})")
        out = []
        for _ in range(self.D):
            index, x = divmod(index, self.L)
            out.append(x)
        return tuple(out)

    def coords(self) -> np.ndarray:
        """All site coordinates as an ``(L**D, D)`` array, row ``i`` for site ``i``."""
        idx = np.arange(self.n_sites)
        return np.stack([(idx // self.L**j) % self.L for j in range(self.D)], axis=1)

    def indices(self, coords: np.ndarray) -> np.ndarray:
        weights = self.L ** np.arange(self.D)
        return np.asarray(coords) @ weights

    def site_index(self, site) -> int:
        """Accept either a flat index or a coordinate tuple."""
        if isinstance(site, (int, np.integer)):
            if not 0 <= site < self.n_sites:
                raise ValueError(f"site index {site} outside [0, {self.n_sites})")
            return int(site)
        return self.index(tuple(site))

    def to_json(self) -> dict:
        return {"D": self.D, "L": self.L, "d": self.d}


@dataclass(frozen=True)
class Region:
    """Axis-aligned box ``offset + [l_0] x ... x [l_{D-1}]`` (no periodic wrap)."""

    offset: tuple[int, ...]
    lengths: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(int(v) for v in self.offset))
        object.__setattr__(self, "lengths", tuple(int(v) for v in self.lengths))
        if len(self.offset) != len(self.lengths):
            raise ValueError("offset and lengths must have the same dimension")
        if any(l < 1 for l in self.lengths):
            raise ValueError(f"region lengths must be >= 1, got {self.lengths}")
        if any(o < 0 for o in self.offset):
            raise ValueError(f"region offset must be >= 0, got {self.offset}")

    @property
    def D(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> int:
        return math.prod(self.lengths)

    def fits(self, lattice: Lattice) -> bool:
        return self.D == lattice.D and all(
            o + l <= lattice.L for o, l in zip(self.offset, self.lengths)
        )

    def validate(self, lattice: Lattice) -> None:
        if not self.fits(lattice):
            raise ValueError(f"region {self} does not fit lattice D={lattice.D}, L={lattice.L}")

    def sites(self, lattice: Lattice) -> np.ndarray:
        """Sorted flat indices of the sites in the region."""
        self.validate(lattice)
        axes = [np.arange(o, o + l) for o, l in zip(self.offset, self.lengths)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.D)
        return np.sort(lattice.indices(grid))

    def to_json(self) -> dict:
        return {"offset": list(self.offset), "lengths": list(self.lengths)}

    @classmethod
    def from_json(cls, data: dict) -> "Region":
        return cls(tuple(data["offset"]), tuple(data["lengths"]))

    @classmethod
    def parse(cls, text: str) -> "Region":
        """Parse ``"o_0,o_1:l_0,l_1"`` (offset, colon, lengths)."""
        try:
            off, lens = text.split(":")
            return cls(
                tuple(int(v) for v in off.split(",")),
                tuple(int(v) for v in lens.split(",")),
            )
        except ValueError as exc:
            raise ValueError(f"cannot parse region {text!r}; expected 'o0,o1:l0,l1'") from exc


def region_boundary(region: Region) -> int:
    """|dA| as ``2 * sum_j prod_{k != j} l_k``."""
    lengths = region.lengths
    return 2 * sum(math.prod(lengths[:j] + lengths[j + 1:]) for j in range(len(lengths)))


def enumerate_cubic_regions(lattice: Lattice, max_volume: int) -> list[Region]:
    if max_volume < 1:
        raise ValueError("max_volume must be >= 1")
    L = lattice.L
    per_axis = [(o, l) for o in range(L) for l in range(1, L - o + 1)]
    regions = []
    for combo in itertools.product(per_axis, repeat=lattice.D):
        lengths = tuple(l for _, l in combo)
        if math.prod(lengths) <= max_volume:
            regions.append(Region(tuple(o for o, _ in combo), lengths))
    regions.sort(key=lambda r: (r.offset, r.lengths))
    return regions


# Site permutations.  A permutation ``perm`` sends the content of site ``i`` to
# site ``perm[i]``.


def _coord_map(lattice: Lattice, fn) -> np.ndarray:
    coords = lattice.coords()
    return lattice.indices(fn(coords.copy()) % lattice.L)


def translation_perm(lattice: Lattice, axis: int, shift: int = 1) -> np.ndarray:
    def fn(c):
        c[:, axis] += shift
        return c

    return _coord_map(lattice, fn)


def reflection_perm(lattice: Lattice, axis: int) -> np.ndarray:
    def fn(c):
        c[:, axis] = lattice.L - 1 - c[:, axis]
        return c

    return _coord_map(lattice, fn)


def axis_swap_perm(lattice: Lattice, i: int, j: int) -> np.ndarray:
    def fn(c):
        c[:, [i, j]] = c[:, [j, i]]
        return c

    return _coord_map(lattice, fn)


def rotation_perm(lattice: Lattice, src: int, dst: int) -> np.ndarray:
    """Quarter turn in the (src, dst) plane carrying axis ``src`` onto ``dst``.

    ``x'_dst = x_src`` and ``x'_src = L-1-x_dst``; identity when ``src == dst``.
    """
    if src == dst:
        return np.arange(lattice.n_sites)

    def fn(c):
        xs, xd = c[:, src].copy(), c[:, dst].copy()
        c[:, dst] = xs
        c[:, src] = lattice.L - 1 - xd
        return c

    return _coord_map(lattice, fn)


def stacking_rotation_perm(lattice: Lattice, axis: int) -> np.ndarray:
    """Rotation sending the stacking axis ``D-1`` onto ``axis``."""
    return rotation_perm(lattice, lattice.D - 1, axis)


def chebyshev_distance(a: Iterable[int], b: Iterable[int]) -> int:
    return max(abs(x - y) for x, y in zip(a, b))
