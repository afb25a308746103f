"""Dense density matrices used as inputs and as oracle ground truth."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .pauli import PhasePoint, _check_dense, plain_pauli_matrix

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0, -1.0]).astype(complex)


def label_matrix(label: str) -> np.ndarray:
    """Literal tensor product of Pauli letters, with optional leading sign."""
    sign = 1.0
    if label[:1] in "+-":
        sign = -1.0 if label[0] == "-" else 1.0
        label = label[1:]
    a = PhasePoint.from_label(label)
    _check_dense(a.n)
    # Y = -i Z X per qubit
    return sign * (1j ** (-a.y_count() & 3)) * plain_pauli_matrix(a.z, a.x, a.n)


def maximally_mixed(n: int) -> np.ndarray:
    _check_dense(n)
    return np.eye(1 << n, dtype=complex) / (1 << n)


def bloch_state(r: Sequence[float]) -> np.ndarray:
    x, y, z = (float(v) for v in r)
    if x * x + y * y + z * z > 1 + 1e-12:
        raise ValidationError("Bloch vector outside the unit ball")
    return 0.5 * (np.eye(2) + x * _X + y * _Y + z * _Z)


def pure(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def magic_A() -> np.ndarray:
    """Single-qubit ``+1`` eigenstate of ``(X + Y)/sqrt(2)``."""
    return bloch_state([1 / np.sqrt(2), 1 / np.sqrt(2), 0.0])


def ghz(n: int = 3) -> np.ndarray:
    _check_dense(n)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = psi[-1] = 1
    return pure(psi)


def stabilizer_state(generators: Sequence[str]) -> np.ndarray:
    """Project ``I/2**n`` onto the ``+1`` space of each signed Pauli string in turn."""
    if not generators:
        raise ValidationError("need at least one generator (or use maximally_mixed)")
    n = len(generators[0].lstrip("+-"))
    rho = maximally_mixed(n)
    for g in generators:
        P = (np.eye(1 << n) + label_matrix(g)) / 2
        rho = P @ rho @ P
    tr = np.trace(rho).real
    if tr < 1e-12:
        raise ValidationError("generators are inconsistent (zero state)")
    return rho / tr


def from_pauli_expansion(coeffs: Mapping[str, float]) -> np.ndarray:
    """``sum_P coeff_P * P`` for literal Pauli strings."""
    items = list(coeffs.items())
    if not items:
        raise ValidationError("empty Pauli expansion")
    n = len(items[0][0].lstrip("+-"))
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    for label, c in items:
        rho += complex(c) * label_matrix(label)
    return rho


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed random state of the given rank (full rank by default)."""
    dim = 1 << n
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    dim = 1 << n
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (G + G.conj().T) / 2


def check_hermitian(rho: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] & (rho.shape[0] - 1):
        raise ValidationError(f"expected a square 2**n matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValidationError("operator is not Hermitian")
    return rho


def qubit_count(rho: np.ndarray) -> int:
    return int(rho.shape[0]).bit_length() - 1


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    n = qubit_count(rho)
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    for k, q in enumerate(sorted(drop, reverse=True)):
        m = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + m)
    d = 1 << len(keep)
    return t.reshape(d, d)


def enumerate_stabilizer_states(n: int) -> list[np.ndarray]:
    """All pure ``n``-qubit stabilizer states (``n <= 3``), via signed commuting generator sets."""
    if n > 3:
        raise ValidationError("stabilizer enumeration limited to n <= 3")
    import itertools

    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=n)][1:]
    mats = {lab: label_matrix(lab) for lab in labels}
    seen = []
    keys = set()
    for gens in itertools.combinations(labels, n):
        Ms = [mats[g] for g in gens]
        if any(not np.allclose(A @ B, B @ A) for A, B in itertools.combinations(Ms, 2)):
            continue
        for signs in itertools.product((1, -1), repeat=n):
            rho = np.eye(1 << n, dtype=complex) / (1 << n)
            for s, M in zip(signs, Ms):
                P = (np.eye(1 << n) + s * M) / 2
                rho = P @ rho @ P
            tr = np.trace(rho).real
            if tr < 1e-9:
                continue
            rho = rho / tr
            if abs(np.trace(rho @ rho).real - 1) > 1e-9:
                continue
            key = tuple(np.round(rho.ravel(), 6))
            if key not in keys:
                keys.add(key)
                seen.append(rho)
    return seen
