"""Audits and experiments on constructed states.

Area-law sweeps over cubic regions, symmetry checks, connected correlators and
their decay with system size, rotated-copy cross terms, and the epsilon-net
counting comparison.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constructions import rotated_copies
from .lattice import (
    Lattice,
    Region,
    axis_swap_perm,
    chebyshev_distance,
    enumerate_cubic_regions,
    reflection_perm,
    region_boundary,
    rotation_perm,
    translation_perm,
)
from .state import (
    SparseState,
    _row_groups,
    _split,
    apply_lattice_symmetry,
    inner_product,
    reduced_density_dense,
    region_sites,
    renyi_entropy,
    schmidt_spectrum,
)

__all__ = [
    "RegionRecord",
    "AreaLawAudit",
    "CorrelatorRecord",
    "DecayProfile",
    "area_law_audit",
    "rank_bound",
    "rank_limit",
    "isotropic_rank_limit",
    "connected_correlator",
    "decay_profile",
    "site_pattern",
    "cross_term_check",
    "cross_term_vanishes_structurally",
    "counting_report",
    "dimension_for_lattice",
    "invariance_check",
    "symmetry_generators",
    "projector",
]

log = logging.getLogger(__name__)

GRAM_CAP = 6000
EXPONENT_TOL = 0.15


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("AREALAB_THREADS", "1")))
    except ValueError:
        return 1


def rank_limit(region: Region) -> int:
    """``2**(l_0 ... l_{D-2}) * l_{D-1} + 1``: Schmidt-rank ceiling with the last axis stacked."""
    *plane, stack = region.lengths
    return 2 ** math.prod(plane) * stack + 1


def isotropic_rank_limit(region: Region) -> int:
    """Sum of the single-copy ceilings with each axis in turn as the stacking axis."""
    lengths = region.lengths
    return sum(
        2 ** math.prod(lengths[:j] + lengths[j + 1:]) * lengths[j] + 1 for j in range(len(lengths))
    )


def rank_bound(region: Region) -> float:
    """``log2(2**(l_0 ... l_{D-2}) * l_{D-1} + 1)`` in bits."""
    return math.log2(rank_limit(region))


@dataclass
class RegionRecord:
    region: Region
    schmidt_rank: int
    s0: float
    rank_bound: float
    boundary: int
    rank_limit: int

    @property
    def ok(self) -> bool:
        # the rank test is done on integers so log2 rounding cannot flip it
        return self.schmidt_rank <= self.rank_limit and self.s0 <= self.boundary

    def to_json(self) -> dict:
        return {
            "region": self.region.to_json(),
            "schmidt_rank": self.schmidt_rank,
            "s0": self.s0,
            "rank_bound": self.rank_bound,
            "boundary": self.boundary,
            "ok": self.ok,
        }


@dataclass
class AreaLawAudit:
    records: list[RegionRecord]
    skipped: list[Region] = field(default_factory=list)

    @property
    def minimal_c(self) -> float:
        return max((r.s0 / r.boundary for r in self.records), default=0.0)

    @property
    def violations(self) -> list[RegionRecord]:
        return [r for r in self.records if not r.ok]

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.passed:
            return f"PASS: {len(self.records)} regions, minimal c = {self.minimal_c:.6g}"
        first = self.violations[0]
        return (
            f"FAIL: {len(self.violations)} of {len(self.records)} regions violate the bounds; "
            f"first at offset={first.region.offset} lengths={first.region.lengths} "
            f"(S0={first.s0:.6g}, rank bound={first.rank_bound:.6g}, |dA|={first.boundary})"
        )

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "minimal_c": self.minimal_c,
            "n_regions": len(self.records),
            "n_violations": len(self.violations),
            "skipped": [r.to_json() for r in self.skipped],
            "records": [r.to_json() for r in self.records],
        }


def _gram_size(state: SparseState, sites: np.ndarray) -> int:
    a_rows, b_rows = _split(state, sites)
    d = state.lattice.d
    return min(_row_groups(a_rows, d)[1], _row_groups(b_rows, d)[1])


def _audit_region(state: SparseState, region: Region, limit_fn):
    sites = region.sites(state.lattice)
    if _gram_size(state, sites) > GRAM_CAP:
        return None
    rank = schmidt_spectrum(state, sites).rank
    limit = limit_fn(region)
    return RegionRecord(region, rank, math.log2(rank), math.log2(limit), region_boundary(region), limit)


def area_law_audit(state: SparseState, max_region_volume: int | None = None,
                   limit_fn: Callable[[Region], int] = rank_limit) -> AreaLawAudit:
    """S0 of every cubic region against the rank ceiling ``limit_fn`` and |dA|."""
    lattice = state.lattice
    if max_region_volume is None:
        max_region_volume = lattice.n_sites
    regions = enumerate_cubic_regions(lattice, max_region_volume)
    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda r: _audit_region(state, r, limit_fn), regions))
    else:
        results = [_audit_region(state, r, limit_fn) for r in regions]
    records, skipped = [], []
    for region, rec in zip(regions, results):
        if rec is None:
            log.warning("skipping region %s: Gram matrix above cap %d", region, GRAM_CAP)
            skipped.append(region)
        else:
            records.append(rec)
    return AreaLawAudit(records, skipped)


# Correlators


def projector(d: int, level: int) -> np.ndarray:
    P = np.zeros((d, d))
    P[level, level] = 1.0
    return P


@dataclass
class CorrelatorRecord:
    siteA: tuple[int, ...]
    siteB: tuple[int, ...]
    obsA: np.ndarray
    obsB: np.ndarray
    connected_value: float
    separation: int
    imag_residue: float = 0.0

    def to_json(self) -> dict:
        return {
            "siteA": list(self.siteA),
            "siteB": list(self.siteB),
            "connected_value": self.connected_value,
            "separation": self.separation,
            "imag_residue": self.imag_residue,
        }


def _check_hermitian(obs: np.ndarray, d: int) -> np.ndarray:
    obs = np.asarray(obs, dtype=np.complex128)
    if obs.shape != (d, d):
        raise ValueError(f"observable must be {d}x{d}, got {obs.shape}")
    if not np.allclose(obs, obs.conj().T, atol=1e-12):
        raise ValueError("observable is not Hermitian")
    return obs


def connected_correlator(state: SparseState, obsA, siteA, obsB, siteB) -> CorrelatorRecord:
    """<AB> - <A><B> for single-site observables, from the exact two-site marginal."""
    lattice = state.lattice
    d = lattice.d
    A = _check_hermitian(obsA, d)
    B = _check_hermitian(obsB, d)
    ia, ib = lattice.site_index(siteA), lattice.site_index(siteB)
    if ia == ib:
        raise ValueError("observables must act on different sites")
    rho = reduced_density_dense(state, [ia, ib])
    # reduced_density_dense orders the pair by site index
    if ia > ib:
        rho = rho.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    r4 = rho.reshape(d, d, d, d)
    rho_a = np.einsum("ijkj->ik", r4)
    rho_b = np.einsum("ijil->jl", r4)
    ab = np.trace(rho @ np.kron(A, B))
    a = np.trace(rho_a @ A)
    b = np.trace(rho_b @ B)
    value = ab - a * b
    ca, cb = lattice.coord(ia), lattice.coord(ib)
    return CorrelatorRecord(ca, cb, A, B, float(value.real), chebyshev_distance(ca, cb), float(abs(value.imag)))


def site_pattern(name: str, lattice: Lattice):
    """Site pair for a named pattern: ``same-row`` (along axis 0) or ``different-row``."""
    L, D = lattice.L, lattice.D
    origin = (0,) * D
    far = L // 2
    if far == 0:
        raise ValueError("site patterns need L >= 2")
    if name == "same-row":
        return origin, (far,) + (0,) * (D - 1)
    if name == "different-row":
        return origin, (0,) * (D - 1) + (far,)
    raise ValueError(f"unknown site pattern {name!r}")


@dataclass
class DecayProfile:
    Ls: list[int]
    values: list[float]
    exponent: float | None
    max_L_times_value: float
    flag: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def decay_profile(
    family: Callable[[int], SparseState],
    obsA,
    obsB,
    pattern: str | Callable[[Lattice], tuple],
    Ls: Sequence[int],
) -> DecayProfile:
    """Connected correlator versus L with a log-log least-squares exponent."""
    Ls = list(Ls)
    if not Ls:
        raise ValueError("empty list of system sizes")
    if any(b <= a for a, b in zip(Ls, Ls[1:])):
        raise ValueError("system sizes must be increasing")
    values = []
    for L in Ls:
        state = family(L)
        pair = site_pattern(pattern, state.lattice) if isinstance(pattern, str) else pattern(state.lattice)
        values.append(connected_correlator(state, obsA, pair[0], obsB, pair[1]).connected_value)
    vals = np.abs(np.array(values))
    max_lv = float(np.max(np.array(Ls) * vals))
    if np.any(vals <= 1e-14):
        return DecayProfile(Ls, values, None, max_lv, "zero values; exponent undefined")
    if len(Ls) < 2:
        return DecayProfile(Ls, values, None, max_lv, "single size; exponent undefined")
    slope = np.polyfit(np.log(Ls), np.log(vals), 1)[0]
    return DecayProfile(Ls, values, float(slope), max_lv)


# Cross terms between rotated copies


def _plane_sets(lattice: Lattice, axis: int) -> list[frozenset]:
    coords = lattice.coords()
    return [frozenset(np.flatnonzero(coords[:, axis] == c).tolist()) for c in range(lattice.L)]


def cross_term_vanishes_structurally(lattice: Lattice, j: int, k: int, sites) -> bool:
    """True when no hyperplane orthogonal to axis j and none orthogonal to k agree outside A.

    Rotated copy j is supported on configurations whose nonzero sites form one
    full hyperplane orthogonal to axis j; if those patterns restricted to the
    complement never coincide across j and k, the partial trace of the cross
    term is identically zero.
    """
    a = frozenset(int(s) for s in sites)
    outs_j = {p - a for p in _plane_sets(lattice, j)}
    outs_k = {p - a for p in _plane_sets(lattice, k)}
    return not (outs_j & outs_k)


def cross_term_check(phi: SparseState, lattice: Lattice, j: int, k: int, region, strict: bool = True) -> float:
    """Trace norm of tr_complement(R_j|psi><psi|R_k^dagger) on ``region``.

    ``j`` and ``k`` are lattice axes; copy ``j`` carries the embedded ``phi``
    on hyperplanes orthogonal to axis ``j``.  With ``strict`` the region must
    satisfy :func:`cross_term_vanishes_structurally`.
    """
    if j == k:
        raise ValueError("cross term needs two different axes")
    D = lattice.D
    if not (0 <= j < D and 0 <= k < D):
        raise ValueError(f"axes must lie in [0, {D})")
    sites = region_sites(lattice, region)
    if strict and not cross_term_vanishes_structurally(lattice, j, k, sites):
        raise ValueError(
            "region overlaps the complement patterns of both rotated copies; "
            "the cross term is not expected to vanish there"
        )
    copies = rotated_copies(phi, lattice)
    by_axis = {D - 1: copies[0], **{a: copies[a + 1] for a in range(D - 1)}}
    u, w = by_axis[j], by_axis[k]
    d = lattice.d
    a_u, b_u = _split(u, sites)
    a_w, b_w = _split(w, sites)
    a_inv, na = _row_groups(np.concatenate([a_u, a_w]), d)
    b_inv, nb = _row_groups(np.concatenate([b_u, b_w]), d)
    Mu = np.zeros((na, nb), dtype=np.complex128)
    Mw = np.zeros((na, nb), dtype=np.complex128)
    Mu[a_inv[: u.support], b_inv[: u.support]] = u.amps
    Mw[a_inv[u.support:], b_inv[u.support:]] = w.amps
    X = Mu @ Mw.conj().T
    return float(np.linalg.svd(X, compute_uv=False).sum())


# Counting


def dimension_for_lattice(L: int, D: int) -> int:
    """``ceil(2**n / n)`` with ``n = L**(D-1)``: the translation-invariant subspace bound."""
    n = L ** (D - 1)
    return -(-(2**n) // n)


def counting_report(q: int, epsilon: float, budget_bits: int, L: int | None = None, D: int | None = None) -> dict:
    """Compare log2 of an epsilon-net size for C^q with a description budget.

    The Omega constant in the net size (1/eps)^Omega(q) is set to 1.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if budget_bits < 1:
        raise ValueError("budget must be >= 1 bit")
    net_bits = q * math.log2(1 / epsilon)
    report = {
        "q": q,
        "epsilon": epsilon,
        "net_exponent_bits": net_bits,
        "describable_exponent_bits": budget_bits,
        "net_exceeds_budget": net_bits > budget_bits,
        "omega_constant": 1,
        "note": "net size taken as (1/eps)^q and describable set as 2^budget; constants normalized to 1",
    }
    if L is not None and D is not None:
        report["L"] = L
        report["D"] = D
        report["q_from_lattice"] = dimension_for_lattice(L, D)
    return report


# Invariance


def symmetry_generators(lattice: Lattice, group: str) -> list[np.ndarray]:
    """Generators of translations, rotations or reflections as site permutations."""
    D = lattice.D
    if group == "translations":
        return [translation_perm(lattice, a, 1) for a in range(D)]
    if group == "rotations":
        return [rotation_perm(lattice, i, j) for i in range(D) for j in range(D) if i != j]
    if group == "reflections":
        gens = [reflection_perm(lattice, a) for a in range(D)]
        return gens + [axis_swap_perm(lattice, i, j) for i in range(D) for j in range(i + 1, D)]
    raise ValueError(f"unknown symmetry group {group!r}")


def invariance_check(state: SparseState, group: str | Sequence[str]) -> float:
    """Largest ``1 - |<psi|U psi>|**2`` over the generators of the named group(s)."""
    groups = [group] if isinstance(group, str) else list(group)
    worst = 0.0
    for g in groups:
        for perm in symmetry_generators(state.lattice, g):
            f = abs(inner_product(state, apply_lattice_symmetry(state, perm))) ** 2
            worst = max(worst, 1.0 - f)
    return worst


def entropies(state: SparseState, region, alphas: Sequence[float]) -> dict[float, float]:
    spec = schmidt_spectrum(state, region)
    return {a: renyi_entropy(spec, a) for a in alphas}
