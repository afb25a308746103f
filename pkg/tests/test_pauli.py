import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_gamma
from qcsi.pauli import (
    CapacityError,
    CliffordGate,
    DimensionError,
    PauliOperator,
    PhaseConvention,
    PhasePoint,
    beta,
    conjugate,
    dense_matrix,
    dense_unitary,
    format_pauli,
    multiply,
    named_matrix,
    parse_pauli,
    symplectic_form,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
LETTER = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_label(label):
    m = np.eye(1, dtype=complex)
    for ch in label:
        m = np.kron(m, LETTER[ch])
    return m


def all_points(n):
    return [PhasePoint.from_index(i, n) for i in range(1 << 2 * n)]


# -- symplectic form -------------------------------------------------------


def test_symplectic_examples():
    assert symplectic_form(PhasePoint.from_bits("00", "10"), PhasePoint.from_bits("10", "00")) == 1
    assert symplectic_form(PhasePoint.from_label("ZI"), PhasePoint.from_label("IZ")) == 0
    assert symplectic_form(PhasePoint.from_label("YY"), PhasePoint.from_label("XX")) == 0


def test_symplectic_dimension_error():
    with pytest.raises(DimensionError):
        symplectic_form(PhasePoint.zero(1), PhasePoint.zero(2))


@pytest.mark.parametrize("n", [1, 2])
def test_symplectic_matches_commutation(n):
    for a, b in itertools.product(all_points(n), repeat=2):
        A, B = kron_label(a.label()), kron_label(b.label())
        commute = np.allclose(A @ B, B @ A)
        assert symplectic_form(a, b) == (0 if commute else 1)
    for a in all_points(n):
        assert symplectic_form(a, a) == 0


def test_point_roundtrip_and_label():
    a = PhasePoint.from_label("XZY")
    assert a.label() == "XZY"
    assert PhasePoint.from_index(a.index, 3) == a
    assert a + a == PhasePoint.zero(3)
    assert (a + PhasePoint.zero(3)) == a


# -- conventions -----------------------------------------------------------


def test_gamma0_values_n1():
    g = PhaseConvention.gamma0(1)
    assert [int(g(PhasePoint.from_index(i, 1))) for i in range(4)] == [0, 0, 0, 1]


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        PhaseConvention.from_table([0, 0, 0, 0], 1)
    with pytest.raises(ValueError):
        PhaseConvention.from_table([2, 0, 0, 1], 1)


@pytest.mark.parametrize("n", [1, 2])
def test_hermiticity_iff_parity(n):
    for idx in range(1, 1 << 2 * n):
        a = PhasePoint.from_index(idx, n)
        for v in range(4):
            zx = np.eye(1, dtype=complex)
            for k in range(n):
                zk = a.z >> (n - 1 - k) & 1
                xk = a.x >> (n - 1 - k) & 1
                zx = np.kron(zx, np.linalg.matrix_power(Z, zk) @ np.linalg.matrix_power(X, xk))
            herm = np.allclose((1j**v) * zx, ((1j**v) * zx).conj().T)
            assert herm == (v % 2 == a.y_count() % 2)


def test_gamma_json_roundtrip():
    rng = np.random.default_rng(1)
    g = random_gamma(2, rng)
    assert PhaseConvention.from_json(g.to_json()) == g
    g0 = PhaseConvention.gamma0(3)
    assert PhaseConvention.from_json(g0.to_json()) == g0


def test_gamma0_tensor_split():
    g1, g2, g3 = (PhaseConvention.gamma0(k) for k in (1, 2, 3))
    for a in all_points(1):
        for b in all_points(2):
            ab = PhasePoint((a.z << 2) | b.z, (a.x << 2) | b.x, 3)
            assert int(g3(ab)) == (int(g1(a)) + int(g2(b))) % 4


# -- dense rendering -------------------------------------------------------


def test_dense_examples():
    g1 = PhaseConvention.gamma0(1)
    assert np.allclose(dense_matrix(g1, PhasePoint.zero(1)), I2)
    T11 = dense_matrix(g1, PhasePoint(1, 1, 1))
    assert np.allclose(T11, 1j * Z @ X)
    assert np.allclose(T11, -Y)
    g2 = PhaseConvention.gamma0(2)
    TYY = dense_matrix(g2, PhasePoint.from_label("YY"))
    assert np.allclose(TYY, TYY.conj().T)
    assert abs(np.trace(TYY)) < 1e-12
    assert np.allclose(TYY @ TYY, np.eye(4))


def test_dense_capacity(monkeypatch):
    monkeypatch.setenv("QCSI_DENSE_LIMIT", "2")
    with pytest.raises(CapacityError):
        dense_matrix(PhaseConvention.gamma0(3), PhasePoint.zero(3))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dense_is_hermitian_for_random_gamma(n):
    rng = np.random.default_rng(n)
    g = random_gamma(n, rng)
    for idx in rng.integers(0, 1 << 2 * n, size=20):
        T = dense_matrix(g, PhasePoint.from_index(idx, n))
        assert np.allclose(T, T.conj().T)


# -- beta and multiplication ----------------------------------------------


def test_beta_examples():
    g2 = PhaseConvention.gamma0(2)
    assert beta(g2, PhasePoint.from_label("XX"), PhasePoint.from_label("ZZ")) == 2
    g1 = PhaseConvention.gamma0(1)
    assert beta(g1, PhasePoint.from_label("Z"), PhasePoint.from_label("X")) == 1
    for a in all_points(2):
        assert beta(g2, a, PhasePoint.zero(2)) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_beta_dense_identity(n):
    rng = np.random.default_rng(10 + n)
    g = random_gamma(n, rng)
    for _ in range(60):
        a = PhasePoint.from_index(rng.integers(1 << 2 * n), n)
        b = PhasePoint.from_index(rng.integers(1 << 2 * n), n)
        lhs = dense_matrix(g, a + b)
        rhs = (1j ** beta(g, a, b)) * dense_matrix(g, a) @ dense_matrix(g, b)
        assert np.max(np.abs(lhs - rhs)) < 1e-12
        if symplectic_form(a, b) == 0:
            assert beta(g, a, b) in (0, 2)


def test_multiply_examples():
    g1 = PhaseConvention.gamma0(1)
    zx = multiply(g1, PauliOperator(0, PhasePoint.from_label("Z")), PauliOperator(0, PhasePoint.from_label("X")))
    assert np.allclose(dense_matrix(g1, zx), Z @ X)
    g2 = PhaseConvention.gamma0(2)
    p = multiply(g2, PauliOperator(0, PhasePoint.from_label("XX")), PauliOperator(0, PhasePoint.from_label("ZZ")))
    assert p.point == PhasePoint.from_label("YY") and p.phase == 2
    t = PauliOperator(0, PhasePoint.from_label("XY"))
    assert multiply(g2, t, PauliOperator.identity(2)) == t


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 63), st.integers(0, 3), st.integers(0, 3))
def test_multiply_associative_and_dense(i, j, k, p, q):
    g = PhaseConvention.gamma0(3)
    A = PauliOperator(p, PhasePoint.from_index(i, 3))
    B = PauliOperator(q, PhasePoint.from_index(j, 3))
    C = PauliOperator(0, PhasePoint.from_index(k, 3))
    assert multiply(g, multiply(g, A, B), C) == multiply(g, A, multiply(g, B, C))
    assert np.allclose(dense_matrix(g, multiply(g, A, B)), dense_matrix(g, A) @ dense_matrix(g, B))


# -- text syntax -----------------------------------------------------------


@pytest.mark.parametrize("text", ["+XZI", "-YYZ", "+III", "-ZXY"])
def test_parse_pauli_literal(text):
    rng = np.random.default_rng(0)
    for g in (PhaseConvention.gamma0(3), random_gamma(3, rng)):
        p = parse_pauli(text, g)
        sign = -1 if text[0] == "-" else 1
        assert np.allclose(dense_matrix(g, p), sign * kron_label(text[1:]))
        assert format_pauli(p, g) == text


# -- Clifford tableaux -----------------------------------------------------


def _random_word(n, length, rng):
    names1 = ["H", "S", "X", "Y", "Z"]
    names2 = ["CZ", "CNOT"] if n > 1 else []
    g = CliffordGate.identity(n)
    for _ in range(length):
        if names2 and rng.random() < 0.35:
            q = rng.choice(n, 2, replace=False)
            g = g.then(CliffordGate.named(str(rng.choice(names2)), list(q), n))
        else:
            g = g.then(CliffordGate.named(str(rng.choice(names1)), [int(rng.integers(n))], n))
    return g


def test_conjugate_examples():
    g1 = PhaseConvention.gamma0(1)
    H = CliffordGate.named("H", [0], 1)
    out = conjugate(g1, H, PauliOperator(0, PhasePoint.from_label("Z")))
    assert out == PauliOperator(0, PhasePoint.from_label("X"))
    g2 = PhaseConvention.gamma0(2)
    CZ = CliffordGate.named("CZ", [0, 1], 2)
    out = conjugate(g2, CZ, PauliOperator(0, PhasePoint.from_label("XI")))
    assert out.point == PhasePoint.from_label("XZ")
    U = named_matrix("CZ")
    assert np.allclose(dense_matrix(g2, out), U.conj().T @ dense_matrix(g2, PhasePoint.from_label("XI")) @ U)
    Id = CliffordGate.identity(2)
    p = PauliOperator(2, PhasePoint.from_label("YZ"))
    assert conjugate(g2, Id, p) == p


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tableau_matches_dense_random_words(n):
    rng = np.random.default_rng(100 + n)
    for trial in range(100):
        G = _random_word(n, 6, rng)
        U = G.matrix
        gam = random_gamma(n, rng) if trial % 2 else PhaseConvention.gamma0(n)
        for idx in rng.integers(0, 1 << 2 * n, size=4):
            a = PhasePoint.from_index(idx, n)
            out = conjugate(gam, G, PauliOperator(0, a))
            assert out.is_hermitian()
            assert np.allclose(dense_matrix(gam, out), U.conj().T @ dense_matrix(gam, a) @ U, atol=1e-12)
        for a, b in itertools.product(rng.integers(0, 1 << 2 * n, size=5), repeat=2):
            pa, pb = PhasePoint.from_index(a, n), PhasePoint.from_index(b, n)
            assert symplectic_form(G.act(pa), G.act(pb)) == symplectic_form(pa, pb)


@pytest.mark.parametrize("name,qubits,n", [("H", [0], 1), ("S", [1], 2), ("CZ", [0, 2], 3), ("CNOT", [2, 0], 3),
                                           ("X", [0], 2), ("Y", [1], 2), ("Z", [0], 1), ("SWAP", [0, 1], 2)])
def test_generators_match_dense(name, qubits, n):
    G = CliffordGate.named(name, qubits, n)
    gam = PhaseConvention.gamma0(n)
    for a in all_points(n):
        out = conjugate(gam, G, PauliOperator(0, a))
        assert np.allclose(dense_matrix(gam, out), G.matrix.conj().T @ dense_matrix(gam, a) @ G.matrix)


def test_inverse_and_unitary_reconstruction():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        G = _random_word(n, 8, rng)
        assert G.then(G.inverse()).same_action(CliffordGate.identity(n))
        bare = CliffordGate(n, G.images)  # drop the stored matrix
        U = dense_unitary(bare)
        V = G.matrix
        ov = np.trace(U.conj().T @ V) / (1 << n)
        assert abs(abs(ov) - 1) < 1e-10


def test_pauli_gate_is_sign_flip():
    a = PhasePoint.from_label("XZ")
    P = CliffordGate.pauli(a)
    gam = PhaseConvention.gamma0(2)
    for b in all_points(2):
        out = conjugate(gam, P, PauliOperator(0, b))
        assert out.point == b
        assert out.phase == 2 * symplectic_form(a, b)


def test_clifford_json_roundtrip():
    G = _random_word(2, 5, np.random.default_rng(3))
    assert CliffordGate.from_json(G.to_json()).same_action(G)
