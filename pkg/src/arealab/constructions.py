"""Builders for the translation-invariant and isotropic area-law state families.

The building block is a translation-invariant state ``phi`` on the
``(D-1)``-dimensional periodic sub-lattice with local levels {1, 2}.  It is
embedded into one hyperplane of the qutrit lattice (level 0 elsewhere) and the
``L`` hyperplane copies are superposed with equal weight.  Orbit states of
{1, 2}-strings under the sub-lattice symmetry group span the admissible
``phi``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .lattice import (
    Lattice,
    axis_swap_perm,
    reflection_perm,
    stacking_rotation_perm,
    translation_perm,
)
from .state import (
    FeasibilityError,
    SparseState,
    apply_lattice_symmetry,
    inner_product,
)

__all__ = [
    "ORBIT_CAP",
    "OVERLAP_TOL",
    "OrbitBasis",
    "ti_basis",
    "mirror_ti_basis",
    "translation_group",
    "mirror_group",
    "random_span_state",
    "ghz_phi",
    "product_phi",
    "qubits_to_symbols",
    "embed_hyperplane",
    "area_law_state",
    "isotropic_area_law_state",
    "rotated_copies",
]

ORBIT_CAP = 24
OVERLAP_TOL = 1e-12
MIRROR_TOL = 1e-10
_CHUNK = 1 << 20


def _sub_lattice(shape: Sequence[int]) -> Lattice:
    shape = tuple(int(s) for s in shape)
    if not shape or any(s != shape[0] for s in shape):
        raise ValueError(f"sub-lattice shape must be cubic, got {shape}")
    return Lattice(len(shape), shape[0], d=3)


def translation_group(lattice: Lattice) -> list[np.ndarray]:
    """All cyclic translations of a periodic lattice as site permutations."""
    n = lattice.n_sites
    perms = []
    for shifts in itertools.product(range(lattice.L), repeat=lattice.D):
        p = np.arange(n)
        for axis, s in enumerate(shifts):
            if s:
                p = translation_perm(lattice, axis, s)[p]
        perms.append(p)
    return perms


def _point_group(lattice: Lattice) -> list[np.ndarray]:
    """Axis permutations combined with axis reflections (hyperoctahedral group)."""
    n = lattice.n_sites
    coords = lattice.coords()
    out = []
    for axes in itertools.permutations(range(lattice.D)):
        for flips in itertools.product((False, True), repeat=lattice.D):
            c = coords[:, axes].copy()
            for j, f in enumerate(flips):
                if f:
                    c[:, j] = lattice.L - 1 - c[:, j]
            out.append(lattice.indices(c))
    assert all(len(set(p.tolist())) == n for p in out)
    return out


def mirror_group(lattice: Lattice) -> list[np.ndarray]:
    """Translations composed with the hyperoctahedral point group (deduplicated)."""
    seen = {}
    for g in _point_group(lattice):
        for t in translation_group(lattice):
            p = t[g]
            seen.setdefault(p.tobytes(), p)
    return list(seen.values())


def _permute_bits(values: np.ndarray, perm: np.ndarray, n: int) -> np.ndarray:
    """Apply a site permutation to n-bit integers (site i at bit n-1-i).

    Bits are grouped by displacement so the cost is one shift per distinct
    displacement rather than one per site.
    """
    src = n - 1 - np.arange(n)
    dst = n - 1 - perm
    out = np.zeros_like(values)
    for delta in np.unique(dst - src):
        mask = 0
        for b in src[(dst - src) == delta]:
            mask |= 1 << int(b)
        picked = values & np.int64(mask)
        out |= (picked << np.int64(delta)) if delta >= 0 else (picked >> np.int64(-delta))
    return out


@dataclass
class OrbitBasis:
    """Orthonormal basis of orbit states over {1,2}-strings for a site-permutation group.

    ``elements`` holds every string (as an integer, site 0 most significant,
    bit 1 meaning level 2) grouped orbit by orbit; orbit ``i`` occupies
    ``elements[offsets[i]:offsets[i+1]]`` and its first entry is the
    lexicographic minimum.
    """

    lattice: Lattice
    group_order: int
    elements: np.ndarray
    offsets: np.ndarray
    kind: str = "translations"
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.lattice.n_sites

    def __len__(self) -> int:
        return len(self.offsets) - 1

    @property
    def representatives(self) -> np.ndarray:
        return self.elements[self.offsets[:-1]]

    @property
    def orbit_sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    def representative_strings(self) -> list[str]:
        return [_int_to_symbols(int(v), self.n) for v in self.representatives]

    def _configs(self, values: np.ndarray) -> np.ndarray:
        shifts = np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return (((values[:, None] >> shifts) & 1) + 1).astype(np.uint8)

    def state(self, i: int) -> SparseState:
        if i not in self._cache:
            vals = self.elements[self.offsets[i]:self.offsets[i + 1]]
            amps = np.full(len(vals), 1.0 / math.sqrt(len(vals)))
            self._cache[i] = SparseState(self.lattice, self._configs(vals), amps)
        return self._cache[i]

    @cached_property
    def basis(self) -> list[SparseState]:
        return [self.state(i) for i in range(len(self))]

    def combine(self, coeffs: np.ndarray, normalize: bool = True) -> SparseState:
        """State ``sum_i coeffs[i] |orbit_i>``."""
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (len(self),):
            raise ValueError(f"expected {len(self)} coefficients, got {coeffs.shape}")
        sizes = self.orbit_sizes
        amps = np.repeat(coeffs / np.sqrt(sizes), sizes)
        return SparseState(self.lattice, self._configs(self.elements), amps,
                           normalize=normalize, check_norm=normalize)


def _int_to_symbols(v: int, n: int) -> str:
    return "".join("2" if (v >> (n - 1 - i)) & 1 else "1" for i in range(n))


def _orbit_basis(lattice: Lattice, group: list[np.ndarray], kind: str) -> OrbitBasis:
    n = lattice.n_sites
    if n > ORBIT_CAP:
        raise FeasibilityError(f"orbit enumeration over 2^{n} strings exceeds cap n <= {ORBIT_CAP}")
    total = 1 << n
    canon = np.empty(total, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        vals = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        best = vals.copy()
        for p in group:
            np.minimum(best, _permute_bits(vals, p, n), out=best)
        canon[start:start + len(vals)] = best
    order = np.lexsort((np.arange(total), canon))
    elements = order.astype(np.int64)
    _, counts = np.unique(canon[order], return_counts=True)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    return OrbitBasis(lattice, len(group), elements, offsets, kind)


def ti_basis(shape: Sequence[int]) -> OrbitBasis:
    """Translation-orbit basis on a periodic sub-lattice of the given (cubic) shape."""
    lattice = _sub_lattice(shape)
    return _orbit_basis(lattice, translation_group(lattice), "translations")


def mirror_ti_basis(shape: Sequence[int]) -> OrbitBasis:
    """Orbit basis for translations, reflections and axis permutations."""
    lattice = _sub_lattice(shape)
    return _orbit_basis(lattice, mirror_group(lattice), "mirror")


def random_span_state(basis: OrbitBasis, rng: np.random.Generator) -> SparseState:
    """Normalized state with complex Gaussian coefficients over the orbit basis."""
    k = len(basis)
    coeffs = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return basis.combine(coeffs / np.linalg.norm(coeffs))


def ghz_phi(shape: Sequence[int]) -> SparseState:
    """(|1...1> + |2...2>)/sqrt(2) on the sub-lattice."""
    lattice = _sub_lattice(shape)
    n = lattice.n_sites
    return SparseState(lattice, np.array([[1] * n, [2] * n]), np.full(2, 1 / math.sqrt(2)))


def product_phi(shape: Sequence[int], level: int = 1) -> SparseState:
    lattice = _sub_lattice(shape)
    if level not in (1, 2):
        raise ValueError("product phi must use level 1 or 2")
    return SparseState(lattice, np.full((1, lattice.n_sites), level), [1.0])


def qubits_to_symbols(state: SparseState) -> SparseState:
    """Map a qubit state onto levels {1,2} of the same lattice with d=3 (0->1, 1->2)."""
    if state.lattice.d != 2:
        raise ValueError("expected a qubit (d=2) state")
    lat = state.lattice
    return SparseState(Lattice(lat.D, lat.L, 3), state.configs + 1, state.amps,
                       check_norm=False, meta=state.meta)


def _check_plane_state(phi: SparseState, lattice: Lattice) -> None:
    if lattice.d != 3:
        raise ValueError("hyperplane embedding needs a qutrit lattice (d=3)")
    if phi.lattice.n_sites != lattice.plane_size:
        raise ValueError(
            f"phi has {phi.lattice.n_sites} sites but a hyperplane has {lattice.plane_size}"
        )
    if phi.support and phi.configs.min() == 0:
        raise ValueError("phi must be supported on levels {1, 2} only")


def embed_hyperplane(phi: SparseState, k: int, lattice: Lattice) -> SparseState:
    """``|0..0> (x) |phi> (x) |0..0>`` with ``phi`` on hyperplane ``k`` (1-based)."""
    _check_plane_state(phi, lattice)
    if not 1 <= k <= lattice.L:
        raise ValueError(f"hyperplane index {k} outside [1, {lattice.L}]")
    m = lattice.plane_size
    configs = np.zeros((phi.support, lattice.n_sites), dtype=np.uint8)
    configs[:, (k - 1) * m:k * m] = phi.configs
    return SparseState(lattice, configs, phi.amps.copy(), check_norm=False)


def area_law_state(phi: SparseState, lattice: Lattice) -> SparseState:
    """Equal-weight superposition of ``phi`` embedded on each of the L hyperplanes."""
    _check_plane_state(phi, lattice)
    m = lattice.plane_size
    L = lattice.L
    configs = np.zeros((L * phi.support, lattice.n_sites), dtype=np.uint8)
    for k in range(L):
        configs[k * phi.support:(k + 1) * phi.support, k * m:(k + 1) * m] = phi.configs
    amps = np.tile(phi.amps, L) / math.sqrt(L)
    return SparseState(lattice, configs, amps, check_norm=False)


def _mirror_infidelity(phi: SparseState) -> float:
    sub = phi.lattice
    gens = [reflection_perm(sub, a) for a in range(sub.D)]
    gens += [translation_perm(sub, a, 1) for a in range(sub.D)]
    gens += [axis_swap_perm(sub, a, a + 1) for a in range(sub.D - 1)]
    nrm2 = phi.norm**2
    return max(
        1.0 - abs(inner_product(phi, apply_lattice_symmetry(phi, g))) ** 2 / nrm2**2 for g in gens
    )


def rotated_copies(phi: SparseState, lattice: Lattice) -> list[SparseState]:
    """The D rotations of ``area_law_state(phi)``; the first is the unrotated state."""
    psi = area_law_state(phi, lattice)
    order = [lattice.D - 1] + list(range(lattice.D - 1))
    return [apply_lattice_symmetry(psi, stacking_rotation_perm(lattice, j)) for j in order]


def isotropic_area_law_state(phi: SparseState, lattice: Lattice) -> SparseState:
    """Normalized superposition of the D rotated copies of ``area_law_state(phi)``.

    The cross overlaps are computed; when any exceeds ``OVERLAP_TOL`` the
    normalization comes from the full Gram matrix instead of ``D**-1/2``.
    """
    if lattice.L < 2:
        raise ValueError("isotropic construction needs L >= 2")
    _check_plane_state(phi, lattice)
    if phi.lattice.D >= 1 and lattice.D >= 2:
        bad = _mirror_infidelity(phi)
        if bad > MIRROR_TOL:
            raise ValueError(f"phi is not mirror-symmetric and translation-invariant (infidelity {bad:.3g})")
    copies = rotated_copies(phi, lattice)
    D = len(copies)
    gram = np.array([[inner_product(a, b) for b in copies] for a in copies])
    off = gram - np.diag(np.diag(gram))
    scale = 1 / math.sqrt(D) if np.abs(off).max(initial=0.0) <= OVERLAP_TOL else 1 / math.sqrt(gram.sum().real)
    configs = np.concatenate([c.configs for c in copies])
    amps = np.concatenate([c.amps for c in copies]) * scale
    return SparseState(lattice, configs, amps, meta={"max_cross_overlap": float(np.abs(off).max(initial=0.0))})
