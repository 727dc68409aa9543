"""Non-degenerate stabilizer codes and the single-hyperplane code state."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .state import SparseState, inner_product, reduced_density_dense, superpose

__all__ = [
    "StabilizerCode",
    "apply_pauli",
    "paulis_commute",
    "build_513",
    "encode_logical",
    "qecc_area_state",
    "max_mixedness_defect",
]

_PHASE_Y = {0: 1j, 1: -1j}  # Y|0> = i|1>, Y|1> = -i|0>


def apply_pauli(pauli: str, state: SparseState) -> SparseState:
    """Apply a Pauli string (letters I, X, Y, Z; site 0 first) to a qubit state."""
    if state.lattice.d != 2:
        raise ValueError("Pauli strings act on qubit states only")
    if len(pauli) != state.lattice.n_sites:
        raise ValueError(f"Pauli string {pauli!r} has wrong length for {state.lattice.n_sites} qubits")
    configs = state.configs.copy()
    amps = state.amps.copy()
    for i, p in enumerate(pauli.upper()):
        bits = configs[:, i]
        if p == "I":
            continue
        if p == "Z":
            amps = amps * np.where(bits == 1, -1, 1)
        elif p == "Y":
            amps = amps * np.where(bits == 1, _PHASE_Y[1], _PHASE_Y[0])
        elif p != "X":
            raise ValueError(f"unknown Pauli letter {p!r}")
        if p in "XY":
            configs[:, i] = 1 - bits
    return SparseState(state.lattice, configs, amps, check_norm=False)


def paulis_commute(a: str, b: str) -> bool:
    anti = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return anti % 2 == 0


@dataclass(frozen=True)
class StabilizerCode:
    n: int
    k: int
    distance: int
    generators: tuple[str, ...]
    logical_codewords: tuple[SparseState, ...]
    logical_x: tuple[str, ...] = ()
    logical_z: tuple[str, ...] = ()

    @property
    def lattice(self) -> Lattice:
        return self.logical_codewords[0].lattice

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "distance": self.distance,
            "generators": list(self.generators),
            "logical_x": list(self.logical_x),
            "logical_z": list(self.logical_z),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _project(state: SparseState, generators) -> SparseState:
    for g in generators:
        state = superpose([0.5, 0.5], [state, apply_pauli(g, state)], normalize=False)
    return SparseState(state.lattice, state.configs, state.amps, normalize=True)


def build_513() -> StabilizerCode:
    """The five-qubit perfect code [[5,1,3]] with cyclic generators XZZXI."""
    gens = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
    for a, b in itertools.combinations(gens, 2):
        if not paulis_commute(a, b):
            raise AssertionError(f"generators {a} and {b} anticommute")
    lat = Lattice(1, 5, d=2)
    zero = _project(SparseState(lat, [[0] * 5], [1.0]), gens)
    one = _project(SparseState(lat, [[1] * 5], [1.0]), gens)
    # fix the relative phase so that XXXXX maps |0_L> to |1_L>
    phase = inner_product(one, apply_pauli("XXXXX", zero))
    one = one.scaled(phase / abs(phase))
    one = SparseState(lat, one.configs, one.amps)
    return StabilizerCode(5, 1, 3, gens, (zero, one), ("XXXXX",), ("ZZZZZ",))


def encode_logical(code: StabilizerCode, logical) -> SparseState:
    """``sum_i logical[i] |codeword_i>``."""
    logical = np.asarray(logical, dtype=np.complex128).reshape(-1)
    if logical.shape != (2**code.k,):
        raise ValueError(f"logical vector must have {2**code.k} entries")
    if abs(float(np.vdot(logical, logical).real) - 1.0) > 1e-12:
        raise ValueError("logical vector is not normalized")
    combo = superpose(logical, list(code.logical_codewords), normalize=False)
    return SparseState(combo.lattice, combo.configs, combo.amps)


def max_mixedness_defect(state: SparseState, max_size: int) -> tuple[float, tuple[int, ...]]:
    """Worst trace distance to the maximally mixed state over all site subsets of size <= max_size."""
    worst, where = 0.0, ()
    n = state.lattice.n_sites
    d = state.lattice.d
    for size in range(1, max_size + 1):
        for subset in itertools.combinations(range(n), size):
            rho = reduced_density_dense(state, subset)
            dist = 0.5 * np.abs(np.linalg.eigvalsh(rho - np.eye(d**size) / d**size)).sum()
            if dist > worst:
                worst, where = float(dist), subset
    return worst, where


def qecc_area_state(codeword: SparseState, lattice: Lattice, pad: bool = False) -> SparseState:
    """Code state on the first hyperplane (qubit 0 -> level 1, 1 -> level 2), level 0 elsewhere.

    With ``pad=True`` a codeword shorter than the hyperplane is completed with
    level-0 sites; the output ``meta`` records the padding.
    """
    if codeword.lattice.d != 2:
        raise ValueError("codeword must be a qubit state")
    if lattice.d != 3:
        raise ValueError("target lattice must be a qutrit lattice")
    n = codeword.lattice.n_sites
    m = lattice.plane_size
    if n > m or (n < m and not pad):
        raise ValueError(f"codeword has {n} qubits but the hyperplane has {m} sites (pad={pad})")
    configs = np.zeros((codeword.support, lattice.n_sites), dtype=np.uint8)
    configs[:, :n] = codeword.configs + 1
    meta = {"code_qubits": n, "padded_sites": m - n} if n < m else {}
    return SparseState(lattice, configs, codeword.amps.copy(), meta=meta)
