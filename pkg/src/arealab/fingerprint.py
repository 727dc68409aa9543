"""Quantum fingerprints and the SWAP-test equality protocol.

A fingerprint of an ``n``-bit string is ``m**-1/2 sum_i |i>|E(x)_i>`` where
``E`` is a seeded random binary linear code of length ``m = c*n``.  Charlie
runs a controlled-SWAP test on the two fingerprints and measures the ancilla;
acceptance probabilities are evaluated by the Born rule, with Monte Carlo
sampling available for validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .state import SparseState, inner_product

__all__ = [
    "FingerprintCode",
    "ProtocolOutcome",
    "make_code",
    "build_fingerprint",
    "swap_test_accept",
    "swap_test_circuit",
    "equality_protocol",
    "perturbed_protocol",
    "perturb_state",
    "repetitions_for",
    "cost_report",
    "DISTANCE_WINDOW",
]

DISTANCE_WINDOW = (0.25, 0.75)
_DISTANCE_SAMPLES = 256
_MAX_REDRAWS = 64


@dataclass(frozen=True)
class FingerprintCode:
    n: int
    m: int
    matrix: np.ndarray
    seed: int
    redraws: int
    min_rel_distance: float
    max_rel_distance: float

    @property
    def index_qubits(self) -> int:
        return max(1, math.ceil(math.log2(self.m)))

    @property
    def qubits(self) -> int:
        return self.index_qubits + 1

    @property
    def max_overlap(self) -> float:
        """Largest fingerprint overlap among sampled distinct pairs, ``1 - min distance``."""
        return 1.0 - self.min_rel_distance

    def encode(self, x) -> np.ndarray:
        x = _bits(x, self.n)
        return (self.matrix.astype(np.int64) @ x % 2).astype(np.uint8)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "redraws": self.redraws,
            "min_rel_distance": self.min_rel_distance,
            "max_rel_distance": self.max_rel_distance,
        }


def _bits(x, n: int) -> np.ndarray:
    if isinstance(x, str):
        x = [int(c) for c in x]
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    if x.shape != (n,):
        raise ValueError(f"input has {x.size} bits, code expects {n}")
    if np.any((x != 0) & (x != 1)):
        raise ValueError("input must be a bit string")
    return x


def make_code(n: int, seed: int = 0, expansion: int = 8) -> FingerprintCode:
    """Random linear code, redrawn until sampled relative distances fall in the window.

    Distances are sampled on the codewords of random nonzero inputs, which by
    linearity equal the distances between random distinct pairs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = expansion * n
    for redraw in range(_MAX_REDRAWS):
        rng = np.random.default_rng([seed, redraw])
        matrix = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
        z = rng.integers(0, 2, size=(_DISTANCE_SAMPLES, n))
        z[~z.any(axis=1), 0] = 1
        weights = (z @ matrix.T.astype(np.int64) % 2).sum(axis=1) / m
        lo, hi = float(weights.min()), float(weights.max())
        if DISTANCE_WINDOW[0] <= lo and hi <= DISTANCE_WINDOW[1]:
            return FingerprintCode(n, m, matrix, seed, redraw, lo, hi)
    raise RuntimeError(f"no code with distances in {DISTANCE_WINDOW} after {_MAX_REDRAWS} draws")


def build_fingerprint(x, code: FingerprintCode) -> SparseState:
    """``m**-1/2 sum_i |i>|E(x)_i>`` on ``ceil(log2 m) + 1`` qubits."""
    e = code.encode(x)
    q = code.index_qubits
    idx = np.arange(code.m)
    configs = np.zeros((code.m, q + 1), dtype=np.uint8)
    configs[:, :q] = (idx[:, None] >> np.arange(q - 1, -1, -1)) & 1
    configs[:, q] = e
    lattice = Lattice(1, q + 1, d=2)
    return SparseState(lattice, configs, np.full(code.m, 1 / math.sqrt(code.m)))


def swap_test_accept(sigma: SparseState, tau: SparseState) -> float:
    """Probability that the SWAP-test ancilla reads 0: ``1/2 + |<sigma|tau>|**2 / 2``."""
    if sigma.lattice != tau.lattice:
        raise ValueError("SWAP test needs states of equal dimension")
    ov = inner_product(sigma, tau)
    return 0.5 + 0.5 * abs(ov) ** 2 / (sigma.norm**2 * tau.norm**2)


def swap_test_circuit(sigma: np.ndarray, tau: np.ndarray) -> float:
    """Ancilla-0 probability from an explicit H, controlled-SWAP, H circuit on dense vectors."""
    sigma = np.asarray(sigma, dtype=np.complex128)
    tau = np.asarray(tau, dtype=np.complex128)
    if sigma.shape != tau.shape:
        raise ValueError("SWAP test needs states of equal dimension")
    joint = np.outer(sigma, tau)
    # ancilla after H: (|0> + |1>)/sqrt2; controlled swap transposes the joint tensor on branch 1
    branch0 = joint / math.sqrt(2)
    branch1 = joint.T / math.sqrt(2)
    out0 = (branch0 + branch1) / math.sqrt(2)
    return float(np.vdot(out0, out0).real)


@dataclass
class ProtocolOutcome:
    decision: str
    accept_probability: float
    qubits_used: int
    repetitions: int
    threshold: float
    overlap: float
    mode: str = "analytic"
    accepted_rounds: int | None = None
    false_equal_bound: float | None = None
    epsilon: float = 0.0

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def default_threshold(code: FingerprintCode) -> float:
    """Midpoint between 1 and the worst-case accept probability of a distinct pair."""
    worst = 0.5 + 0.5 * code.max_overlap**2
    return 0.5 * (1.0 + worst)


def repetitions_for(delta: float, max_overlap: float) -> int:
    """Smallest ``r`` with ``((1 + w**2)/2)**r <= delta``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    p = 0.5 * (1 + max_overlap**2)
    return max(1, math.ceil(math.log(delta) / math.log(p)))


def _run(sigma, tau, code, repetitions, threshold, mode, rng, epsilon=0.0) -> ProtocolOutcome:
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if threshold is None:
        threshold = default_threshold(code)
    p = swap_test_accept(sigma, tau)
    ov = abs(inner_product(sigma, tau))
    qubits = repetitions * code.qubits
    if mode == "analytic":
        decision = "equal" if p >= threshold else "unequal"
        accepted = None
    elif mode == "sampling":
        if rng is None:
            raise ValueError("sampling mode needs an RNG")
        accepted = int(rng.binomial(repetitions, min(p, 1.0)))
        decision = "equal" if accepted == repetitions else "unequal"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    bound = (0.5 * (1 + ov**2)) ** repetitions
    return ProtocolOutcome(decision, p, qubits, repetitions, threshold, ov, mode, accepted, bound, epsilon)


def equality_protocol(x, y, code: FingerprintCode, repetitions: int = 1, threshold: float | None = None,
                      mode: str = "analytic", rng: np.random.Generator | None = None) -> ProtocolOutcome:
    """Decide x == y from SWAP tests on the two fingerprints.

    Analytic mode compares the Born-rule accept probability with ``threshold``.
    Sampling mode runs ``repetitions`` independent tests and answers "equal"
    only if every test accepts, so equal inputs are never rejected.
    """
    _bits(y, code.n)
    return _run(build_fingerprint(x, code), build_fingerprint(y, code), code, repetitions, threshold, mode, rng)


def perturb_state(state: SparseState, epsilon: float, rng: np.random.Generator) -> SparseState:
    """Pure state at trace distance exactly ``epsilon`` from ``state``.

    Mixes in a random unit direction orthogonalized against ``state``:
    ``sqrt(1 - eps**2) |s> + eps |r>``, so ``|<s|s'>|**2 = 1 - eps**2``.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    if epsilon == 0:
        return state
    lat = state.lattice
    dim = lat.d**lat.n_sites
    vec = state.to_dense(cap=max(dim, 1))
    r = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    r -= np.vdot(vec, r) * vec
    r /= np.linalg.norm(r)
    return SparseState.from_dense(lat, math.sqrt(1 - epsilon**2) * vec + epsilon * r, normalize=True)


def perturbed_protocol(x, y, code: FingerprintCode, epsilon: float, repetitions: int = 1,
                       threshold: float | None = None, mode: str = "analytic",
                       rng: np.random.Generator | None = None, seed: int = 0) -> ProtocolOutcome:
    """Equality protocol on fingerprints replaced by epsilon-close pure states.

    The reported ``false_equal_bound`` uses the worst overlap compatible with
    both perturbations: angles add, so an overlap ``cos(t)`` can grow to
    ``cos(max(0, t - 2 asin(eps)))``.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    pert_rng = np.random.default_rng([seed, 1])
    sigma = perturb_state(build_fingerprint(x, code), epsilon, pert_rng)
    tau = perturb_state(build_fingerprint(y, code), epsilon, pert_rng)
    out = _run(sigma, tau, code, repetitions, threshold, mode, rng, epsilon)
    if epsilon > 0:
        w0 = abs(inner_product(build_fingerprint(x, code), build_fingerprint(y, code)))
        angle = max(0.0, math.acos(min(1.0, w0)) - 2 * math.asin(epsilon))
        out.false_equal_bound = (0.5 * (1 + math.cos(angle) ** 2)) ** repetitions
    return out


def cost_report(n: int, delta: float = 1e-3, expansion: int = 8, description_power: int = 2) -> dict:
    """Qubit cost of the fingerprint protocol against the classical sqrt(n) reference.

    Uses the worst overlap allowed by the accepted distance window, so no code
    is built.  The hypothetical classical description of an M-qubit message
    is charged ``M**description_power`` bits.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    m = expansion * n
    per_copy = max(1, math.ceil(math.log2(m))) + 1
    reps = repetitions_for(delta, 1.0 - DISTANCE_WINDOW[0])
    quantum = reps * per_copy
    classical = math.sqrt(n)
    return {
        "n": n,
        "delta": delta,
        "qubits_per_fingerprint": per_copy,
        "repetitions": reps,
        "quantum_qubits": quantum,
        "classical_reference_bits": classical,
        "classical_constant": 1,
        "description_bits": per_copy**description_power,
        "description_power": description_power,
        "quantum_over_classical": quantum / classical,
    }
