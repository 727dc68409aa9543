"""Sparse pure states on qudit lattices and their bipartite spectra.

A state is stored as a canonical term list: a ``(support, n_sites)`` array of
local levels sorted lexicographically (site 0 most significant) and a matching
array of complex amplitudes.  Schmidt spectra are computed from the Gram matrix
of the environment vectors attached to each distinct restriction of the
support to the region, so the cost follows the support size and never
``d**|A|``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lattice import Lattice, Region

__all__ = [
    "AMPLITUDE_FLOOR",
    "NORM_TOL",
    "RANK_RTOL",
    "DENSE_CAP",
    "SparseState",
    "SchmidtSpectrum",
    "FeasibilityError",
    "basis_state",
    "superpose",
    "inner_product",
    "apply_lattice_symmetry",
    "schmidt_spectrum",
    "renyi_entropy",
    "reduced_density_dense",
    "region_sites",
]

AMPLITUDE_FLOOR = 1e-14
NORM_TOL = 1e-12
RANK_RTOL = 1e-12
DENSE_CAP = 3**10


class FeasibilityError(ValueError):
    """Requested size exceeds a configured enumeration or dense-matrix cap."""


class SparseState:
    """Canonical sparse pure state; immutable once built."""

    __slots__ = ("lattice", "configs", "amps", "meta")

    def __init__(self, lattice, configs, amps, *, normalize=False, check_norm=True, meta=None):
        configs = np.asarray(configs, dtype=np.uint8).reshape(-1, lattice.n_sites)
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if len(configs) != len(amps):
            raise ValueError("configs and amplitudes differ in length")
        if configs.size and configs.max() >= lattice.d:
            raise ValueError(f"local level >= d={lattice.d} in configuration")
        configs, amps = _canonicalize(configs, amps)
        if normalize:
            nrm = math.sqrt(float(np.vdot(amps, amps).real))
            if nrm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / nrm
            configs, amps = _drop_small(configs, amps)
        if check_norm:
            nrm2 = float(np.vdot(amps, amps).real)
            if abs(nrm2 - 1.0) > NORM_TOL:
                raise ValueError(f"state is not normalized: sum |a|^2 = {nrm2!r}")
        configs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "meta", dict(meta or {}))

    @property
    def support(self) -> int:
        return len(self.amps)

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self.amps, self.amps).real))

    def config_strings(self) -> list[str]:
        return ["".join(map(str, row)) for row in self.configs]

    def terms(self) -> list[tuple[str, complex]]:
        return list(zip(self.config_strings(), self.amps.tolist()))

    def scaled(self, c: complex) -> "SparseState":
        return SparseState(self.lattice, self.configs, c * self.amps, check_norm=False)

    def to_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Full amplitude vector with site 0 as the most significant digit."""
        dim = self.lattice.d**self.lattice.n_sites
        if dim > cap:
            raise FeasibilityError(f"dense vector of dimension {dim} exceeds cap {cap}")
        vec = np.zeros(dim, dtype=np.complex128)
        vec[_encode(self.configs, self.lattice.d)] = self.amps
        return vec

    @classmethod
    def from_dense(cls, lattice: Lattice, vec: np.ndarray, **kw) -> "SparseState":
        vec = np.asarray(vec, dtype=np.complex128)
        nz = np.flatnonzero(np.abs(vec) >= AMPLITUDE_FLOOR)
        n = lattice.n_sites
        digits = (nz[:, None] // lattice.d ** np.arange(n - 1, -1, -1)) % lattice.d
        return cls(lattice, digits, vec[nz], **kw)

    @classmethod
    def from_strings(cls, lattice: Lattice, terms: Iterable[tuple[str, complex]], **kw):
        terms = list(terms)
        configs = np.array([[int(ch) for ch in s] for s, _ in terms], dtype=np.uint8)
        return cls(lattice, configs.reshape(len(terms), lattice.n_sites), [a for _, a in terms], **kw)

    def to_json(self) -> dict:
        out = {**self.lattice.to_json()}
        out["terms"] = [[s, a.real, a.imag] for s, a in zip(self.config_strings(), self.amps.tolist())]
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_json(cls, data: dict, **kw) -> "SparseState":
        lattice = Lattice(int(data["D"]), int(data["L"]), int(data["d"]))
        terms = [(s, complex(re, im)) for s, re, im in data["terms"]]
        return cls.from_strings(lattice, terms, meta=data.get("meta"), **kw)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path, **kw) -> "SparseState":
        return cls.from_json(json.loads(Path(path).read_text()), **kw)

    def __setattr__(self, name, value):
        raise AttributeError("SparseState is immutable")

    def __repr__(self):
        lat = self.lattice
        return f"SparseState(D={lat.D}, L={lat.L}, d={lat.d}, support={self.support})"


@dataclass(frozen=True)
class SchmidtSpectrum:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.sort(np.clip(np.asarray(self.probabilities, dtype=float), 0.0, None))[::-1]
        if p.size == 0:
            raise ValueError("empty spectrum")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"spectrum sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def rank(self) -> int:
        p = self.probabilities
        return int(np.count_nonzero(p > RANK_RTOL * p[0]))

    def nonzero(self) -> np.ndarray:
        return self.probabilities[: self.rank]


def _encode(configs: np.ndarray, d: int) -> np.ndarray:
    n = configs.shape[1]
    if n == 0:
        return np.zeros(len(configs), dtype=np.int64)
    weights = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return configs.astype(np.int64) @ weights


def _row_groups(rows: np.ndarray, d: int) -> tuple[np.ndarray, int]:
    """Dense labels for identical rows: ``(inverse, n_groups)``."""
    if rows.shape[1] == 0:
        return np.zeros(len(rows), dtype=np.int64), 1
    if rows.shape[1] * math.log2(d) < 62:
        _, inv = np.unique(_encode(rows, d), return_inverse=True)
    else:
        view = np.ascontiguousarray(rows).view(np.dtype((np.void, rows.shape[1])))
        _, inv = np.unique(view.ravel(), return_inverse=True)
    inv = inv.ravel()
    return inv, int(inv.max()) + 1 if inv.size else 0


def _drop_small(configs, amps):
    keep = np.abs(amps) >= AMPLITUDE_FLOOR
    return configs[keep], amps[keep]


def _canonicalize(configs: np.ndarray, amps: np.ndarray):
    if len(amps) == 0:
        return configs, amps
    order = np.lexsort(configs.T[::-1])
    configs, amps = configs[order], amps[order]
    new = np.ones(len(amps), dtype=bool)
    new[1:] = np.any(configs[1:] != configs[:-1], axis=1)
    if not new.all():
        starts = np.flatnonzero(new)
        amps = np.add.reduceat(amps, starts)
        configs = configs[starts]
    return _drop_small(np.ascontiguousarray(configs), amps)


def basis_state(lattice: Lattice, config: str | Sequence[int]) -> SparseState:
    digits = [int(c) for c in config]
    return SparseState(lattice, np.array([digits]), [1.0])


def superpose(coeffs: Sequence[complex], states: Sequence[SparseState], normalize: bool = True) -> SparseState:
    """Linear combination ``sum_i c_i |s_i>`` on a common lattice."""
    if not states:
        raise ValueError("no states to superpose")
    lattice = states[0].lattice
    if any(s.lattice != lattice for s in states):
        raise ValueError("lattice mismatch")
    configs = np.concatenate([s.configs for s in states])
    amps = np.concatenate([c * s.amps for c, s in zip(coeffs, states)])
    return SparseState(lattice, configs, amps, normalize=normalize, check_norm=normalize)


def inner_product(a: SparseState, b: SparseState) -> complex:
    """<a|b> by merging the two sorted term lists."""
    if a.lattice != b.lattice:
        raise ValueError("inner product of states on different lattices")
    if a.support == 0 or b.support == 0:
        return 0j
    d = a.lattice.d
    n = a.lattice.n_sites
    if n * math.log2(d) < 62:
        ka, kb = _encode(a.configs, d), _encode(b.configs, d)
    else:
        both = np.concatenate([a.configs, b.configs])
        inv, _ = _row_groups(both, d)
        ka, kb = inv[: a.support], inv[a.support:]
    # keys inherit the lexicographic order, so both arrays are sorted
    _, ia, ib = np.intersect1d(ka, kb, assume_unique=True, return_indices=True)
    return complex(np.vdot(a.amps[ia], b.amps[ib]))


def _check_perm(perm, n: int) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError("site permutation is not a bijection on the lattice sites")
    return perm


def apply_lattice_symmetry(state: SparseState, perm) -> SparseState:
    """Move the content of site ``i`` to site ``perm[i]``."""
    perm = _check_perm(perm, state.lattice.n_sites)
    configs = np.empty_like(state.configs)
    configs[:, perm] = state.configs
    return SparseState(state.lattice, configs, state.amps.copy(), check_norm=False, meta=state.meta)


def region_sites(state_or_lattice, region) -> np.ndarray:
    """Flat site indices for a :class:`Region` or an explicit site collection."""
    lattice = state_or_lattice.lattice if isinstance(state_or_lattice, SparseState) else state_or_lattice
    if isinstance(region, Region):
        return region.sites(lattice)
    sites = np.array(sorted({lattice.site_index(s) for s in region}), dtype=np.int64)
    return sites


def _split(state: SparseState, sites: np.ndarray):
    mask = np.zeros(state.lattice.n_sites, dtype=bool)
    mask[sites] = True
    return state.configs[:, mask], state.configs[:, ~mask]


def _bipartite_matrix(state: SparseState, sites: np.ndarray):
    """Coefficient matrix indexed by (distinct A-restriction, distinct complement-restriction)."""
    a_rows, b_rows = _split(state, sites)
    ia, na = _row_groups(a_rows, state.lattice.d)
    ib, nb = _row_groups(b_rows, state.lattice.d)
    M = np.zeros((na, nb), dtype=np.complex128)
    M[ia, ib] = state.amps
    return M


def schmidt_spectrum(state: SparseState, region) -> SchmidtSpectrum:
    """Spectrum of the reduced state on ``region`` from the environment Gram matrix."""
    sites = region_sites(state, region)
    M = _bipartite_matrix(state, sites)
    # same nonzero eigenvalues either way; diagonalize the smaller Gram matrix
    G = M @ M.conj().T if M.shape[0] <= M.shape[1] else M.conj().T @ M
    evals = np.linalg.eigvalsh(G)
    return SchmidtSpectrum(np.clip(evals, 0.0, None)[::-1])


def renyi_entropy(spectrum: SchmidtSpectrum | Sequence[float], alpha: float) -> float:
    """Renyi entropy in bits; ``alpha`` may be 0, 1 or ``inf``.

    Entries at or below the rank tolerance count as exact zeros for every alpha.
    """
    if not isinstance(spectrum, SchmidtSpectrum):
        spectrum = SchmidtSpectrum(np.asarray(spectrum, dtype=float))
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0:
        raise ValueError(f"Renyi index must be nonnegative, got {alpha}")
    p = spectrum.nonzero()
    if alpha == 0:
        return math.log2(len(p))
    if alpha == 1:
        return float(-np.sum(p * np.log2(p)))
    if math.isinf(alpha):
        return float(-math.log2(p[0]))
    return float(math.log2(np.sum(p**alpha)) / (1.0 - alpha))


def reduced_density_dense(state: SparseState, region, cap: int = DENSE_CAP) -> np.ndarray:
    """Explicit reduced density matrix on ``region`` in the ``d**|A|`` product basis.

    Basis ordering follows the sorted site indices of the region, lowest site
    most significant.
    """
    sites = region_sites(state, region)
    d = state.lattice.d
    dim = d ** len(sites)
    if dim > cap:
        raise FeasibilityError(f"reduced density matrix of dimension {dim} exceeds dense cap {cap}")
    a_rows, b_rows = _split(state, sites)
    ib, nb = _row_groups(b_rows, d)
    M = np.zeros((dim, max(nb, 1)), dtype=np.complex128)
    M[_encode(a_rows, d), ib] = state.amps
    rho = M @ M.conj().T
    return (rho + rho.conj().T) / 2
