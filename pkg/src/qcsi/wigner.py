"""Discrete Wigner functions over the qubit phase space.

With phase-point operators ``A_u = T_u A_0 T_u^dag`` and
``A_0 = 2**-n sum_a T_a``, the Wigner function of an operator is

    W(u) = 2**-n Tr(A_u rho) = 4**-n sum_a (-1)**[u, a] Tr(T_a rho).

Both the Pauli coefficients ``c_a = Tr(T_a rho)`` and the sum over ``a`` are
Walsh-Hadamard transforms, so evaluation costs ``O(n 4**n)`` on top of reading
the matrix.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ImpossibleOutcomeError, SchemeViolationError, ValidationError
from .pauli import (
    PhaseConvention,
    PhasePoint,
    _check_dense,
    all_indices,
    dense_matrix,
    split_indices,
    symplectic_table,
)
from .states import check_hermitian, qubit_count

POSITIVITY_TOL = 1e-12


def _wht(arr: np.ndarray, axis: int, bits: int) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along ``axis`` (length ``2**bits``)."""
    arr = np.moveaxis(arr, axis, -1)
    shape = arr.shape
    t = arr.reshape(shape[:-1] + (2,) * bits)
    for k in range(bits):
        ax = len(shape) - 1 + k
        a0 = np.take(t, 0, axis=ax)
        a1 = np.take(t, 1, axis=ax)
        t = np.stack([a0 + a1, a0 - a1], axis=ax)
    return np.moveaxis(t.reshape(shape), -1, axis)


@dataclass(frozen=True, eq=False)
class WignerMap:
    """Real quasiprobability values over the ``4**n`` phase-space points."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.shape != (1 << (2 * self.n),):
            raise ValidationError(f"Wigner map on n={self.n} needs {1 << 2 * self.n} values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, u: PhasePoint) -> float:
        return float(self.values[u.index])

    def total(self) -> float:
        return float(self.values.sum())

    def min(self) -> float:
        return float(self.values.min())

    def is_nonnegative(self, tol: float = POSITIVITY_TOL) -> bool:
        return bool(self.values.min() >= -tol)

    def translate(self, a: PhasePoint) -> "WignerMap":
        """``u -> W(u + a)``."""
        return WignerMap(self.n, self.values[all_indices(self.n) ^ a.index])

    def kron(self, other: "WignerMap") -> "WignerMap":
        """Map on the joint register with ``self`` on the leading qubits."""
        n1, n2 = self.n, other.n
        n = n1 + n2
        u = all_indices(n)
        z, x = split_indices(u, n)
        m2 = (1 << n2) - 1
        i1 = ((z >> n2) << n1) | (x >> n2)
        i2 = ((z & m2) << n2) | (x & m2)
        return WignerMap(n, self.values[i1] * other.values[i2])

    def allclose(self, other: "WignerMap", atol: float = 1e-10) -> bool:
        return self.n == other.n and bool(np.allclose(self.values, other.values, atol=atol, rtol=0))

    def __repr__(self) -> str:
        return f"WignerMap(n={self.n}, min={self.min():.4g}, total={self.total():.4g})"


def pauli_coefficients(gamma: PhaseConvention, rho: np.ndarray) -> np.ndarray:
    """``c[a] = Tr(T^gamma_a rho)`` for every point index ``a``.

    Complex in general; real when ``rho`` is Hermitian.
    """
    rho = np.asarray(rho, dtype=complex)
    n = qubit_count(rho)
    if n != gamma.n:
        raise DimensionError(f"operator on {n} qubits, convention on {gamma.n}")
    dim = 1 << n
    y = np.arange(dim)
    # cols[x, y] = rho[y ^ x, y]; Tr(Z(z)X(x) rho) = sum_y (-1)^{z.y} cols[x, y]
    cols = rho[y[None, :] ^ y[:, None], y[None, :]]
    plain = _wht(cols, axis=1, bits=n)  # plain[x, z]
    plain = plain.T.reshape(-1)  # index (z << n) | x
    return (1j ** gamma.table.astype(np.int64)) * plain


def _symplectic_wht(c: np.ndarray, n: int) -> np.ndarray:
    """``sum_a (-1)**[u, a] c[a]`` for every ``u``."""
    dim = 1 << n
    grid = c.reshape(dim, dim)  # [a_Z, a_X]
    out = _wht(_wht(grid, 0, n), 1, n)  # out[s, t] = sum (-1)^{s.a_Z + t.a_X} c
    # [u, a] = u_X.a_Z + u_Z.a_X, so W(u_Z, u_X) = out[u_X, u_Z]
    return out.T.reshape(-1)


def wigner_of(gamma: PhaseConvention, rho: np.ndarray) -> WignerMap:
    """Wigner map of a Hermitian operator (positivity is not required)."""
    rho = check_hermitian(rho)
    n = gamma.n
    c = pauli_coefficients(gamma, rho).real
    return WignerMap(n, _symplectic_wht(c, n) / (1 << (2 * n)))


def operator_from_wigner(gamma: PhaseConvention, W: WignerMap) -> np.ndarray:
    """Invert :func:`wigner_of`: ``rho = sum_u W(u) A_u``."""
    n = W.n
    _check_dense(n)
    if n != gamma.n:
        raise DimensionError("map and convention disagree on n")
    dim = 1 << n
    c = _symplectic_wht(W.values.astype(complex), n)  # = Tr(T_a rho)
    # rho = 2**-n sum_a c_a T_a; entry [r ^ x, r] = 2**-n sum_z c(z,x) i^gamma (-1)^{z.(r^x)}
    coef = (c * (1j ** gamma.table.astype(np.int64))).reshape(dim, dim)  # [z, x]
    sums = _wht(coef, axis=0, bits=n)  # sums[w, x] = sum_z (-1)^{z.w} coef[z, x]
    rho = np.zeros((dim, dim), dtype=complex)
    r = np.arange(dim)
    for x in range(dim):
        rows = r ^ x
        rho[rows, r] = sums[rows, x]
    return rho / dim


@functools.lru_cache(maxsize=256)
def _phase_point_cached(gamma: PhaseConvention, index: int) -> np.ndarray:
    n = gamma.n
    dim = 1 << n
    a = all_indices(n)
    signs = 1 - 2 * symplectic_table(n, np.array([index]))[0].astype(float)
    A = np.zeros((dim, dim), dtype=complex)
    for idx in a:
        A += signs[idx] * dense_matrix(gamma, PhasePoint.from_index(idx, n))
    A /= dim
    A.setflags(write=False)
    return A


def phase_point_operator(gamma: PhaseConvention, u: PhasePoint) -> np.ndarray:
    """Dense ``A_u``; cached per ``(gamma, u)``."""
    _check_dense(gamma.n)
    if u.n != gamma.n:
        raise DimensionError("point and convention disagree on n")
    return _phase_point_cached(gamma, u.index)


def effect_wigner(n: int, a: PhasePoint, s: int) -> WignerMap:
    """Map of the effect ``(I + (-1)**s T_a) / 2``: ``2**-n`` where ``[a, u] = s``."""
    if a.n != n:
        raise DimensionError("point and register disagree on n")
    hit = symplectic_table(n, np.array([a.index]))[0] == (s & 1)
    return WignerMap(n, hit.astype(float) / (1 << n))


def outcome_probability(W: WignerMap, a: PhasePoint, s: int) -> float:
    """Born probability ``sum_{[a,u]=s} W(u)`` of outcome ``(-1)**s`` for ``T_a``."""
    hit = symplectic_table(W.n, np.array([a.index]))[0] == (s & 1)
    return float(W.values[hit].sum())


def measure_update(gamma, W: WignerMap, a: PhasePoint, s: int, *, check: bool = True,
                   prob_tol: float = 1e-14) -> tuple[float, WignerMap]:
    """Measure ``T_a`` with outcome ``(-1)**s`` directly on the map.

    ``gamma`` may be a :class:`PhaseConvention` or a scheme exposing ``gamma``
    and ``V_O``.  The update is ``p W'(u) = delta_{s,[a,u]} (W(u) + W(u+a)) / 2``,
    which is only the correct quantum update when ``a`` is directly measurable.
    """
    if check:
        from .scheme import is_directly_measurable

        scheme_O = getattr(gamma, "V_O_indices", None)
        conv = getattr(gamma, "gamma", gamma)
        ok = (a.index in scheme_O) if scheme_O is not None else is_directly_measurable(conv, a)
        if not ok:
            raise SchemeViolationError(f"{a.label()} is not directly measurable under this convention")
    hit = symplectic_table(W.n, np.array([a.index]))[0] == (s & 1)
    p = float(W.values[hit].sum())
    if p <= prob_tol:
        raise ImpossibleOutcomeError(f"outcome {s} of {a.label()} has probability {p:.3g}")
    avg = 0.5 * (W.values + W.values[all_indices(W.n) ^ a.index])
    return p, WignerMap(W.n, np.where(hit, avg, 0.0) / p)


def measure_update_oracle(gamma: PhaseConvention, rho: np.ndarray, a: PhasePoint, s: int,
                          prob_tol: float = 1e-14) -> tuple[float, np.ndarray]:
    """Projective update on the dense operator; valid for any ``a``."""
    n = gamma.n
    P = (np.eye(1 << n) + (-1) ** (s & 1) * dense_matrix(gamma, a)) / 2
    post = P @ rho @ P
    p = float(np.trace(post).real)
    if p <= prob_tol:
        raise ImpossibleOutcomeError(f"outcome {s} of {a.label()} has probability {p:.3g}")
    return p, post / p


def trace_inner_product(Wr: WignerMap, Ws: WignerMap) -> float:
    """``Tr(rho sigma) = 2**n sum_u W_rho(u) W_sigma(u)``."""
    if Wr.n != Ws.n:
        raise DimensionError("maps on different registers")
    return float((1 << Wr.n) * np.dot(Wr.values, Ws.values))


def sum_negativity(W: WignerMap, tol: float = POSITIVITY_TOL) -> float:
    neg = -W.values[W.values < -tol]
    return float(neg.sum())


def conjugate_by_unitary(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    return U @ rho @ U.conj().T


def distance_to_phase_points(gamma: PhaseConvention, M: np.ndarray) -> float:
    """Smallest operator-norm distance from ``M`` to any ``A_u``."""
    n = gamma.n
    return min(
        float(np.linalg.norm(M - phase_point_operator(gamma, PhasePoint.from_index(i, n)), 2))
        for i in range(1 << (2 * n))
    )


def find_positivity_breaking(gamma: PhaseConvention, U: np.ndarray, candidates, threshold: float = 0.0):
    """First state in ``candidates`` with ``W >= 0`` whose image under ``U`` has negativity above ``threshold``.

    Returns ``(rho, W_before, W_after)`` or ``None``.
    """
    for rho in candidates:
        W = wigner_of(gamma, rho)
        if not W.is_nonnegative():
            continue
        W2 = wigner_of(gamma, conjugate_by_unitary(rho, U))
        if sum_negativity(W2) > threshold:
            return rho, W, W2
    return None
