import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcsi.errors import ImpossibleOutcomeError, SchemeViolationError, ValidationError
from qcsi.pauli import PhaseConvention, PhasePoint, dense_matrix, named_matrix
from qcsi.states import (
    bloch_state,
    enumerate_stabilizer_states,
    magic_A,
    maximally_mixed,
    random_density,
    random_hermitian,
)
from qcsi.wigner import (
    WignerMap,
    distance_to_phase_points,
    effect_wigner,
    find_positivity_breaking,
    measure_update,
    measure_update_oracle,
    operator_from_wigner,
    phase_point_operator,
    sum_negativity,
    trace_inner_product,
    wigner_of,
)

from helpers import random_gamma

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def zx(z, x, n):
    m = np.eye(1, dtype=complex)
    for k in range(n):
        zk, xk = z >> (n - 1 - k) & 1, x >> (n - 1 - k) & 1
        m = np.kron(m, np.linalg.matrix_power(Z, zk) @ np.linalg.matrix_power(X, xk))
    return m


def oracle_wigner(table, rho, n):
    """Brute force: A_0 = 2^-n sum T_a, A_u = T_u A_0 T_u^dag, W = Tr(A_u rho)/2^n."""
    Ts = [(1j ** int(table[i])) * zx(i >> n, i & ((1 << n) - 1), n) for i in range(1 << 2 * n)]
    A0 = sum(Ts) / (1 << n)
    return np.array([np.trace(T @ A0 @ T.conj().T @ rho).real / (1 << n) for T in Ts])


G1 = PhaseConvention.gamma0(1)


def test_mixed_state_is_uniform():
    W = wigner_of(G1, maximally_mixed(1))
    assert np.allclose(W.values, 0.25)


def test_zero_state_values():
    W = wigner_of(G1, bloch_state([0, 0, 1]))
    assert np.allclose(W.values, [0.5, 0.0, 0.5, 0.0])  # index order (z<<1)|x: (0,0),(0,1),(1,0),(1,1)


def test_magic_state_single_negative_point():
    W = wigner_of(G1, magic_A())
    neg = np.flatnonzero(W.values < 0)
    assert neg.size == 1
    assert W.values[neg[0]] == pytest.approx((1 - np.sqrt(2)) / 4, abs=1e-12)
    assert sum_negativity(W) == pytest.approx((np.sqrt(2) - 1) / 4, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_matches_bruteforce_oracle(n):
    rng = np.random.default_rng(n)
    for trial in range(5):
        g = random_gamma(n, rng) if trial else PhaseConvention.gamma0(n)
        rho = random_density(n, rng)
        W = wigner_of(g, rho)
        assert np.allclose(W.values, oracle_wigner(g.table, rho, n), atol=1e-12)


def test_phase_point_operator_properties():
    rng = np.random.default_rng(4)
    g = random_gamma(2, rng)
    A0 = phase_point_operator(g, PhasePoint.zero(2))
    for i in range(16):
        u = PhasePoint.from_index(i, 2)
        A = phase_point_operator(g, u)
        T = dense_matrix(g, u)
        assert np.allclose(A, A.conj().T)
        assert np.trace(A).real == pytest.approx(1)
        assert np.allclose(A, T @ A0 @ T.conj().T)


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        wigner_of(G1, np.array([[1, 1], [0, 0]], dtype=complex))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reconstruction_and_trip(n):
    rng = np.random.default_rng(20 + n)
    for _ in range(30):
        g = random_gamma(n, rng)
        rho = random_density(n, rng)
        sig = random_hermitian(n, rng)
        Wr, Ws = wigner_of(g, rho), wigner_of(g, sig)
        assert Wr.total() == pytest.approx(1, abs=1e-10)
        assert np.allclose(operator_from_wigner(g, Wr), rho, atol=1e-10)
        # direct sum over A_u as a second route
        if n <= 2:
            recon = sum(Wr.values[i] * phase_point_operator(g, PhasePoint.from_index(i, n)) for i in range(1 << 2 * n))
            assert np.allclose(recon, rho, atol=1e-10)
        assert trace_inner_product(Wr, Ws) == pytest.approx(np.trace(rho @ sig).real, abs=1e-12)


def test_trip_examples():
    for n in (1, 2):
        W = wigner_of(PhaseConvention.gamma0(n), maximally_mixed(n))
        assert trace_inner_product(W, W) == pytest.approx(1 / 2**n)
    W = wigner_of(G1, magic_A())
    assert trace_inner_product(W, W) == pytest.approx(1)


@pytest.mark.parametrize("n", [1, 2])
def test_pauli_covariance(n):
    rng = np.random.default_rng(30 + n)
    g = random_gamma(n, rng)
    rho = random_density(n, rng)
    W = wigner_of(g, rho)
    for i in range(1 << 2 * n):
        a = PhasePoint.from_index(i, n)
        T = dense_matrix(g, a)
        assert wigner_of(g, T @ rho @ T.conj().T).allclose(W.translate(a), atol=1e-12)


def test_effect_examples():
    W = effect_wigner(2, PhasePoint.zero(2), 0)
    assert np.allclose(W.values, 0.25)
    Wz = effect_wigner(1, PhasePoint.from_label("Z"), 0)
    support = {PhasePoint.from_index(i, 1) for i in np.flatnonzero(Wz.values)}
    assert support == {PhasePoint(0, 0, 1), PhasePoint(1, 0, 1)}  # u_X = 0
    assert np.allclose(Wz.values[Wz.values > 0], 0.5)
    Wx = effect_wigner(2, PhasePoint.from_label("XI"), 1)
    assert np.count_nonzero(Wx.values) == 8 and np.allclose(Wx.values[Wx.values > 0], 0.25)


@pytest.mark.parametrize("n", [1, 2])
def test_effect_matches_wigner_of_projector(n):
    rng = np.random.default_rng(40 + n)
    g = random_gamma(n, rng)
    for i in range(1 << 2 * n):
        a = PhasePoint.from_index(i, n)
        for s in (0, 1):
            E = (np.eye(1 << n) + (-1) ** s * dense_matrix(g, a)) / 2
            assert wigner_of(g, E).allclose(effect_wigner(n, a, s), atol=1e-12)


def test_measure_update_examples():
    p, W = measure_update(G1, wigner_of(G1, maximally_mixed(1)), PhasePoint.from_label("X"), 0)
    assert p == pytest.approx(0.5)
    W0 = wigner_of(G1, bloch_state([0, 0, 1]))
    p, W1 = measure_update(G1, W0, PhasePoint.from_label("Z"), 0)
    assert p == pytest.approx(1) and W1.allclose(W0)
    with pytest.raises(ImpossibleOutcomeError):
        measure_update(G1, W0, PhasePoint.from_label("Z"), 1)
    g2 = PhaseConvention.gamma0(2)
    with pytest.raises(SchemeViolationError):
        measure_update(g2, wigner_of(g2, maximally_mixed(2)), PhasePoint.from_label("YY"), 0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_measure_update_matches_oracle(n):
    from qcsi.scheme import build_scheme

    rng = np.random.default_rng(50 + n)
    g = PhaseConvention.gamma0(n)
    sch = build_scheme(g)
    for _ in range(10):
        rho = random_density(n, rng)
        W = wigner_of(g, rho)
        for a in sch.V_O[1:]:
            for s in (0, 1):
                p, W2 = measure_update(sch, W, a, s)
                q, rho2 = measure_update_oracle(g, rho, a, s)
                assert p == pytest.approx(q, abs=1e-12)
                assert W2.allclose(wigner_of(g, rho2), atol=1e-10)


def test_measure_update_preserves_positivity():
    from qcsi.scheme import build_scheme

    g = PhaseConvention.gamma0(2)
    sch = build_scheme(g)
    rng = np.random.default_rng(9)
    for _ in range(50):
        v = rng.random(16)
        W = WignerMap(2, v / v.sum())
        a = sch.V_O[rng.integers(1, len(sch.V_O))]
        _, W2 = measure_update(sch, W, a, int(rng.integers(2)))
        assert W2.is_nonnegative()


def test_negativity_generation_witness():
    # (I - T_b)/4 has W >= 0; the -1 branch of T_a with beta(a, b) = 2 has W(0) = -2/16
    g = PhaseConvention.gamma0(2)
    a, b = PhasePoint.from_label("XX"), PhasePoint.from_label("ZZ")
    rho = (np.eye(4) - dense_matrix(g, b)) / 4
    assert wigner_of(g, rho).is_nonnegative()
    p, post = measure_update_oracle(g, rho, a, 1)
    assert wigner_of(g, post)[PhasePoint.zero(2)] == pytest.approx(-2 / 16)


def test_sum_negativity_of_beta2_stabilizer_state():
    g = PhaseConvention.gamma0(2)
    a, b = PhasePoint.from_label("XX"), PhasePoint.from_label("ZZ")
    Ta, Tb = dense_matrix(g, a), dense_matrix(g, b)
    rho = (np.eye(4) + Ta) @ (np.eye(4) + Tb) / 4
    assert sum_negativity(wigner_of(g, rho)) > 0
    assert sum_negativity(wigner_of(g, maximally_mixed(2))) == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_factorization_under_gamma0(seed):
    rng = np.random.default_rng(seed)
    for n1, n2 in ((1, 1), (1, 2)):
        r1, r2 = random_density(n1, rng), random_density(n2, rng)
        W = wigner_of(PhaseConvention.gamma0(n1 + n2), np.kron(r1, r2))
        W1 = wigner_of(PhaseConvention.gamma0(n1), r1)
        W2 = wigner_of(PhaseConvention.gamma0(n2), r2)
        assert W.allclose(W1.kron(W2), atol=1e-12)


def all_hermitian_gammas(n):
    N = 1 << 2 * n
    par = [(i >> n & i).bit_count() & 1 for i in range(N)]
    for bits in itertools.product((0, 1), repeat=N - 1):
        yield PhaseConvention.from_table([0] + [par[i] + 2 * bits[i - 1] for i in range(1, N)], n)


def test_hadamard_noncovariance_all_gammas():
    H = named_matrix("H")
    count = 0
    for g in all_hermitian_gammas(1):
        A0 = phase_point_operator(g, PhasePoint.zero(1))
        assert distance_to_phase_points(g, H @ A0 @ H.conj().T) > 0.1
        count += 1
    assert count == 8


def test_positivity_not_preserved_by_H():
    g = PhaseConvention.gamma0(2)
    H1 = np.kron(named_matrix("H"), np.eye(2))
    found = find_positivity_breaking(g, H1, enumerate_stabilizer_states(2), threshold=0.05)
    assert found is not None
    rho, W, W2 = found
    assert W.is_nonnegative() and sum_negativity(W2) > 0.05


def test_stabilizer_state_count():
    assert len(enumerate_stabilizer_states(1)) == 6
    assert len(enumerate_stabilizer_states(2)) == 60
