import itertools

import numpy as np
import pytest

from arealab.analysis import connected_correlator, projector
from arealab.lattice import Lattice, Region
from arealab.qecc import (
    apply_pauli,
    build_513,
    encode_logical,
    max_mixedness_defect,
    paulis_commute,
    qecc_area_state,
)
from arealab.state import SparseState, basis_state, inner_product, reduced_density_dense, schmidt_spectrum

from oracles import dense_vector, hermitian_basis, pauli_string_matrix


@pytest.fixture(scope="module")
def code():
    return build_513()


def test_generators_commute(code):
    for a, b in itertools.combinations(code.generators, 2):
        assert paulis_commute(a, b)
    assert not paulis_commute("XI", "ZI")
    assert paulis_commute("XX", "ZZ")


def test_codewords_are_stabilized(code):
    for cw in code.logical_codewords:
        vec = dense_vector(cw)
        for g in code.generators:
            assert np.allclose(pauli_string_matrix(g) @ vec, vec, atol=1e-14)


def test_codewords_orthonormal_and_sparse(code):
    zero, one = code.logical_codewords
    assert inner_product(zero, zero) == pytest.approx(1.0, abs=1e-14)
    assert abs(inner_product(zero, one)) < 1e-15
    for cw in (zero, one):
        assert cw.support == 16
        assert np.allclose(np.abs(cw.amps), 0.25, atol=1e-15)
        assert np.allclose(cw.amps.imag, 0)
    assert "00000" in zero.config_strings()
    assert "11111" in one.config_strings()


def test_logical_operators(code):
    zero, one = code.logical_codewords
    assert inner_product(one, apply_pauli("XXXXX", zero)) == pytest.approx(1.0, abs=1e-14)
    assert inner_product(zero, apply_pauli("ZZZZZ", zero)) == pytest.approx(1.0, abs=1e-14)
    assert inner_product(one, apply_pauli("ZZZZZ", one)) == pytest.approx(-1.0, abs=1e-14)


def test_apply_pauli_matches_dense():
    rng = np.random.default_rng(0)
    lat = Lattice(1, 3, d=2)
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    configs = [[int(b) for b in f"{i:03b}"] for i in range(8)]
    psi = SparseState(lat, configs, amps, normalize=True)
    for p in ["XYZ", "IYI", "ZZX", "YYY"]:
        got = dense_vector(apply_pauli(p, psi))
        assert np.allclose(got, pauli_string_matrix(p) @ dense_vector(psi), atol=1e-14)
    with pytest.raises(ValueError):
        apply_pauli("XQ I", psi)
    with pytest.raises(ValueError):
        apply_pauli("XX", psi)


def test_two_qubit_marginals_maximally_mixed(code):
    rng = np.random.default_rng(5)
    for _ in range(5):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi = encode_logical(code, v / np.linalg.norm(v))
        for pair in itertools.combinations(range(5), 2):
            assert np.allclose(reduced_density_dense(psi, pair), np.eye(4) / 4, atol=1e-12)
        worst, _ = max_mixedness_defect(psi, 2)
        assert worst <= 1e-12


def test_three_qubit_marginals_not_mixed(code):
    worst, where = max_mixedness_defect(code.logical_codewords[0], 3)
    assert worst > 0.1
    assert len(where) == 3


def test_encode_examples(code):
    zero = encode_logical(code, [1, 0])
    assert zero.config_strings() == code.logical_codewords[0].config_strings()
    plus = encode_logical(code, [2**-0.5, 2**-0.5])
    assert plus.support == 32
    with pytest.raises(ValueError):
        encode_logical(code, [1, 1])
    with pytest.raises(ValueError):
        encode_logical(code, [1, 0, 0])


def test_qecc_area_state_examples():
    two = SparseState(Lattice(1, 2, d=2), [[1, 1]], [1.0])
    out = qecc_area_state(two, Lattice(2, 2))
    assert out.config_strings() == ["2200"]
    with pytest.raises(ValueError):
        qecc_area_state(basis_state(Lattice(1, 3, d=2), "000"), Lattice(2, 2))
    with pytest.raises(ValueError):
        qecc_area_state(two, Lattice(2, 2, d=2))


def test_qecc_area_state_on_5x5(code):
    lat = Lattice(2, 5)
    psi = qecc_area_state(code.logical_codewords[0], lat)
    assert lat.n_sites == 25
    assert psi.support == 16
    assert all(s[5:] == "0" * 20 for s in psi.config_strings())
    for l1 in range(1, 6):
        for l2 in range(1, 6):
            r = Region((0, 0), (l1, l2))
            assert schmidt_spectrum(psi, r).rank <= 2 ** min(l1, 5 - l1)


def test_qecc_padding(code):
    lat = Lattice(2, 6)
    with pytest.raises(ValueError):
        qecc_area_state(code.logical_codewords[1], lat)
    psi = qecc_area_state(code.logical_codewords[1], lat, pad=True)
    assert psi.meta == {"code_qubits": 5, "padded_sites": 1}
    assert all(s[5] == "0" for s in psi.config_strings())


def test_qecc_correlators_vanish(code):
    rng = np.random.default_rng(12)
    lat = Lattice(2, 5)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    psi = qecc_area_state(encode_logical(code, v / np.linalg.norm(v)), lat)
    basis = hermitian_basis(3)
    pairs = [((0, 0), (1, 0)), ((0, 0), (4, 0)), ((2, 0), (3, 0)), ((1, 0), (2, 3)), ((3, 4), (4, 4))]
    for a, b in pairs:
        for A in basis:
            for B in basis:
                rec = connected_correlator(psi, A, a, B, b)
                assert abs(rec.connected_value) <= 1e-12
                assert rec.imag_residue <= 1e-12


def test_hermitian_basis_spans():
    basis = hermitian_basis(3)
    flat = np.array([b.reshape(-1) for b in basis])
    assert np.linalg.matrix_rank(flat) == 9
    for b in basis:
        assert np.allclose(b, b.conj().T)
    assert np.allclose(projector(3, 1), np.diag([0, 1, 0]))
