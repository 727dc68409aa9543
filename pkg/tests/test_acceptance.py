"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import math
import time

import numpy as np
import pytest

from arealab.analysis import (
    area_law_audit,
    connected_correlator,
    counting_report,
    cross_term_check,
    cross_term_vanishes_structurally,
    decay_profile,
    dimension_for_lattice,
    invariance_check,
    projector,
    site_pattern,
)
from arealab.constructions import (
    area_law_state,
    embed_hyperplane,
    ghz_phi,
    isotropic_area_law_state,
    mirror_ti_basis,
    product_phi,
    random_span_state,
    ti_basis,
)
from arealab.fingerprint import (
    build_fingerprint,
    equality_protocol,
    make_code,
    perturbed_protocol,
    repetitions_for,
)
from arealab.lattice import Lattice, enumerate_cubic_regions, translation_perm
from arealab.qecc import build_513, encode_logical, max_mixedness_defect, qecc_area_state
from arealab.state import inner_product, schmidt_spectrum

from oracles import (
    brute_orbits,
    dense_spectrum,
    dense_vector,
    hermitian_basis,
    padded,
    random_sparse_state,
    ring_reflection,
    ring_shift,
)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def test_criterion_1_area_law_audit(verdict):
    start = time.perf_counter()
    violations, regions = 0, 0
    for L in range(2, 7):
        basis = ti_basis((L,))
        lattice = Lattice(2, L)
        for seed in range(20):
            psi = area_law_state(random_span_state(basis, np.random.default_rng([L, seed])), lattice)
            audit = area_law_audit(psi)
            violations += len(audit.violations)
            regions += len(audit.records)
            assert not audit.skipped
    elapsed = time.perf_counter() - start
    verdict(1, violations == 0 and elapsed < 60,
            f"{regions} region checks, {violations} violations, {elapsed:.1f} s (limit 60 s)")


def _construction_states():
    rng = np.random.default_rng(2)
    out = []
    for L in (2, 3):
        lat = Lattice(2, L)
        basis = ti_basis((L,))
        for i in range(len(basis)):
            out.append(area_law_state(basis.state(i), lat))
            out.append(embed_hyperplane(basis.state(i), 1, lat))
        for _ in range(5):
            out.append(area_law_state(random_span_state(basis, rng), lat))
        out.append(area_law_state(ghz_phi((L,)), lat))
        out.append(area_law_state(product_phi((L,), 2), lat))
        mirror = mirror_ti_basis((L,))
        for _ in range(3):
            out.append(isotropic_area_law_state(random_span_state(mirror, rng), lat))
    lat = Lattice(3, 2)
    out.append(isotropic_area_law_state(random_span_state(mirror_ti_basis((2, 2)), rng), lat))
    out.append(area_law_state(random_span_state(ti_basis((2, 2)), rng), lat))
    return out


def _spectrum_error(psi):
    lat = psi.lattice
    vec = dense_vector(psi)
    worst = 0.0
    for region in enumerate_cubic_regions(lat, lat.n_sites):
        got = schmidt_spectrum(psi, region).probabilities
        ref = dense_spectrum(vec, lat.d, lat.n_sites, region.sites(lat).tolist())
        size = max(len(got), len(ref))
        worst = max(worst, float(np.max(np.abs(padded(got, size) - padded(ref, size)))))
    return worst


def test_criterion_2_oracle_equivalence(verdict):
    states = _construction_states()
    rng = np.random.default_rng(50)
    shapes = [(2, 2, 3), (2, 3, 3), (1, 9, 3), (1, 7, 3), (3, 2, 3)]
    for t in range(50):
        D, L, d = shapes[t % len(shapes)]
        lat = Lattice(D, L, d)
        states.append(random_sparse_state(lat, int(rng.integers(1, 200)), rng))
    worst = max(_spectrum_error(s) for s in states)
    verdict(2, worst <= 1e-10, f"{len(states)} states, max entrywise deviation {worst:.2e} (tol 1e-10)")


def test_criterion_3_isometry(verdict):
    rng = np.random.default_rng(3)
    worst = 0.0
    shapes = [(3,), (4,), (5,), (6,), (3, 3)]
    for t in range(50):
        shape = shapes[t % len(shapes)]
        basis = ti_basis(shape)
        lat = Lattice(len(shape) + 1, shape[0])
        a, b = random_span_state(basis, rng), random_span_state(basis, rng)
        err = abs(inner_product(area_law_state(a, lat), area_law_state(b, lat)) - inner_product(a, b))
        worst = max(worst, err)
    verdict(3, worst <= 1e-12, f"50 pairs, max |<f(a),f(b)> - <a,b>| = {worst:.2e} (tol 1e-12)")


def test_criterion_4_invariance_and_cross_terms(verdict):
    rng = np.random.default_rng(4)
    trans = 0.0
    for shape in [(2,), (3,), (4,), (5,), (2, 2), (3, 3)]:
        lat = Lattice(len(shape) + 1, shape[0])
        psi = area_law_state(random_span_state(ti_basis(shape), rng), lat)
        trans = max(trans, invariance_check(psi, "translations"))
    iso = 0.0
    for shape in [(2,), (3,), (4,), (2, 2)]:
        lat = Lattice(len(shape) + 1, shape[0])
        big = isotropic_area_law_state(random_span_state(mirror_ti_basis(shape), rng), lat)
        iso = max(iso, invariance_check(big, ["rotations", "reflections"]))
    cross, checks = 0.0, 0
    for shape in [(3,), (4,), (2, 2)]:
        lat = Lattice(len(shape) + 1, shape[0])
        phi = random_span_state(mirror_ti_basis(shape), rng)
        for region in enumerate_cubic_regions(lat, lat.n_sites):
            sites = region.sites(lat)
            for j, k in itertools.permutations(range(lat.D), 2):
                if cross_term_vanishes_structurally(lat, j, k, sites):
                    cross = max(cross, cross_term_check(phi, lat, j, k, region))
                    checks += 1
    ok = trans <= 1e-12 and iso <= 1e-12 and cross <= 1e-12 and checks > 0
    verdict(4, ok, f"translation {trans:.1e}, rotation+reflection {iso:.1e}, "
                   f"cross terms {cross:.1e} over {checks} (j,k,A) (tol 1e-12)")


def test_criterion_5_dimension_bounds(verdict):
    mismatches = []
    for n in range(1, 15):
        size = len(ti_basis((n,)))
        if ti_basis((n,)).representative_strings() != brute_orbits(n, [ring_shift(n)]) or size * n < 2**n:
            mismatches.append(n)
        mirror = mirror_ti_basis((n,))
        brute = brute_orbits(n, [ring_shift(n), ring_reflection(n)])
        if mirror.representative_strings() != brute or len(mirror) * 2 * n * math.factorial(2) < 2**n:
            mismatches.append(f"mirror {n}")
    torus = mirror_ti_basis((3, 3))
    if len(torus) * 2 * 9 * math.factorial(3) < 2**9:
        mismatches.append("mirror 3x3")
    verdict(5, not mismatches, f"n = 1..14 against brute force, mismatches: {mismatches or 'none'}")


def test_criterion_6_qecc(verdict):
    code = build_513()
    rng = np.random.default_rng(6)
    mix = 0.0
    states = []
    for _ in range(25):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        cw = encode_logical(code, v / np.linalg.norm(v))
        states.append(cw)
        mix = max(mix, max_mixedness_defect(cw, 2)[0])
    lat = Lattice(2, 5)
    psi = qecc_area_state(states[0], lat)
    basis = hermitian_basis(3)
    corr = 0.0
    for ia, ib in itertools.combinations(range(lat.n_sites), 2):
        for A in basis:
            for B in basis:
                corr = max(corr, abs(connected_correlator(psi, A, ia, B, ib).connected_value))
    ok = mix <= 1e-12 and corr <= 1e-12
    verdict(6, ok, f"marginal trace distance {mix:.1e}, max |connected| {corr:.1e} "
                   f"over 300 site pairs x 81 basis observables (tol 1e-12)")


def test_criterion_7_decay(verdict):
    P1 = projector(3, 1)
    prof = decay_profile(lambda L: area_law_state(ghz_phi((L,)), Lattice(2, L)), P1, P1, "same-row", range(3, 9))
    err = max(abs(v - (1 / (2 * L) - 1 / (4 * L * L))) for L, v in zip(prof.Ls, prof.values))
    ok = err <= 1e-10 and abs(prof.exponent + 1) <= 0.15
    verdict(7, ok, f"closed-form deviation {err:.1e} (tol 1e-10), exponent {prof.exponent:.4f} (target -1 +/- 0.15)")


def test_criterion_8_fingerprinting(verdict):
    n = 64
    code = make_code(n, seed=0)
    reps = repetitions_for(1e-3, code.max_overlap)
    one_sided = True
    for trial in range(200):
        x = np.random.default_rng([1, trial]).integers(0, 2, n)
        one_sided &= equality_protocol(x, x, code).decision == "equal"
        one_sided &= equality_protocol(x, x, code, reps, mode="sampling",
                                       rng=np.random.default_rng([2, trial])).decision == "equal"
    false_equal = 0
    bit_exact = True
    for trial in range(200):
        pair_rng = np.random.default_rng([0, trial])
        x = pair_rng.integers(0, 2, n)
        y = pair_rng.integers(0, 2, n)
        if np.array_equal(x, y):
            y[0] ^= 1
        out = equality_protocol(x, y, code, reps, mode="sampling", rng=np.random.default_rng([0, trial]))
        false_equal += out.decision == "equal"
        pert = perturbed_protocol(x, y, code, 0.0, reps, mode="sampling", rng=np.random.default_rng([0, trial]))
        bit_exact &= (out.decision, out.accept_probability, out.accepted_rounds) == (
            pert.decision, pert.accept_probability, pert.accepted_rounds)
    rate = false_equal / 200
    shots = 10**5
    rng = np.random.default_rng(8)
    sigma_ok = True
    for _ in range(5):
        x, y = rng.integers(0, 2, n), rng.integers(0, 2, n)
        out = equality_protocol(x, y, code, shots, mode="sampling", rng=rng)
        p = out.accept_probability
        sigma_ok &= abs(out.accepted_rounds / shots - p) <= 3 * math.sqrt(p * (1 - p) / shots)
    ok = one_sided and rate <= 2e-3 and bit_exact and sigma_ok
    verdict(8, ok, f"one-sided {one_sided}, r = {reps}, false-equal rate {rate:.4f} (limit 2e-3), "
                   f"eps=0 bit-exact {bit_exact}, 3-sigma agreement {sigma_ok}")


def test_criterion_9_counting(verdict):
    q = dimension_for_lattice(10, 2)
    small = counting_report(q, 0.1, 10**6, L=10, D=2)
    big = counting_report(2**20, 0.1, 10**6)
    ok = q == 103 and small["net_exceeds_budget"] is False and big["net_exceeds_budget"] is True
    verdict(9, ok, f"q=103: {small['net_exponent_bits']:.1f} bits -> {small['net_exceeds_budget']}; "
                   f"q=2^20: {big['net_exponent_bits']:.3g} bits -> {big['net_exceeds_budget']}")
