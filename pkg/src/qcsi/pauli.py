"""Phase-space arithmetic for n-qubit Heisenberg-Weyl operators.

A phase-space point ``a = (a_Z, a_X)`` is stored as two ``n``-bit integers.
Qubit ``k`` (0-based, written first in Pauli strings and most significant in
dense tensor products) lives at bit ``n - 1 - k``, so printing ``a_Z`` in binary
reads qubit 1 first.  Dense arrays over the whole phase space are indexed by
``(a_Z << n) | a_X`` (row-major in ``(a_Z, a_X)``).

The operator attached to a point depends on a phase convention ``gamma``::

    T_a = i**gamma(a) * Z(a_Z) X(a_X)

All phases are kept as exponents of ``i`` modulo 4.  Complex matrices only
appear in :func:`dense_matrix` and :func:`dense_unitary`, which exist to check
the bit-level arithmetic against brute force.
"""
from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DimensionError",
    "CapacityError",
    "dense_limit",
    "PhasePoint",
    "PhaseConvention",
    "PauliOperator",
    "CliffordGate",
    "symplectic_form",
    "beta",
    "multiply",
    "conjugate",
    "dense_matrix",
    "dense_unitary",
    "plain_pauli_matrix",
    "all_indices",
    "split_indices",
    "parity",
    "parse_pauli",
    "format_pauli",
    "named_matrix",
]


from .errors import CapacityError, DimensionError


def dense_limit() -> int:
    """Largest qubit count for which dense matrices are built (env ``QCSI_DENSE_LIMIT``)."""
    return int(os.environ.get("QCSI_DENSE_LIMIT", "6"))


def _check_dense(n: int) -> None:
    if n > dense_limit():
        raise CapacityError(f"dense rendering needs n <= {dense_limit()}, got n={n}")


def parity(x):
    """Parity of the popcount, for Python ints or integer numpy arrays."""
    if isinstance(x, (int, np.integer)):
        return int(x).bit_count() & 1
    return (np.bitwise_count(x) & 1).astype(np.uint8)


def all_indices(n: int) -> np.ndarray:
    return np.arange(1 << (2 * n), dtype=np.int64)


def split_indices(idx, n: int):
    """Split packed phase-space indices into ``(a_Z, a_X)``."""
    mask = (1 << n) - 1
    return idx >> n, idx & mask


# --------------------------------------------------------------------------
# Phase-space points


@dataclass(frozen=True, order=True)
class PhasePoint:
    """A point ``(a_Z, a_X)`` of the phase space ``Z_2^n x Z_2^n``."""

    z: int
    x: int
    n: int

    def __post_init__(self):
        lim = 1 << self.n
        if self.n < 0 or not (0 <= self.z < lim and 0 <= self.x < lim):
            raise ValueError(f"bits out of range for n={self.n}: z={self.z}, x={self.x}")

    @classmethod
    def zero(cls, n: int) -> "PhasePoint":
        return cls(0, 0, n)

    @classmethod
    def from_index(cls, index: int, n: int) -> "PhasePoint":
        index = int(index)
        return cls(index >> n, index & ((1 << n) - 1), n)

    @classmethod
    def from_bits(cls, z: str, x: str) -> "PhasePoint":
        """Build from bit strings written qubit 1 first, e.g. ``from_bits("10", "00")``."""
        if len(z) != len(x):
            raise DimensionError("z and x bit strings differ in length")
        return cls(int(z, 2) if z else 0, int(x, 2) if x else 0, len(z))

    @classmethod
    def from_label(cls, label: str) -> "PhasePoint":
        """Point of a letter string such as ``"XZI"`` (signs are ignored)."""
        n = len(label)
        z = x = 0
        for k, ch in enumerate(label.upper()):
            bit = 1 << (n - 1 - k)
            if ch in "ZY":
                z |= bit
            if ch in "XY":
                x |= bit
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli letter {ch!r} in {label!r}")
        return cls(z, x, n)

    @classmethod
    def single(cls, letter: str, qubit: int, n: int) -> "PhasePoint":
        label = ["I"] * n
        label[qubit] = letter
        return cls.from_label("".join(label))

    @property
    def index(self) -> int:
        return (self.z << self.n) | self.x

    def __add__(self, other: "PhasePoint") -> "PhasePoint":
        _same_n(self, other)
        return PhasePoint(self.z ^ other.z, self.x ^ other.x, self.n)

    __sub__ = __add__

    def __bool__(self) -> bool:
        return bool(self.z or self.x)

    def label(self) -> str:
        out = []
        for k in range(self.n):
            bit = 1 << (self.n - 1 - k)
            out.append("IXZY"[(bool(self.z & bit) << 1) | bool(self.x & bit)])
        return "".join(out)

    def y_count(self) -> int:
        return (self.z & self.x).bit_count()

    def support(self) -> list[int]:
        return [k for k in range(self.n) if (self.z | self.x) >> (self.n - 1 - k) & 1]

    def __repr__(self) -> str:
        return f"PhasePoint({self.label()})"


def _same_n(*points) -> int:
    ns = {p.n for p in points}
    if len(ns) != 1:
        raise DimensionError(f"mismatched qubit counts {sorted(ns)}")
    return ns.pop()


def symplectic_form(a: PhasePoint, b: PhasePoint) -> int:
    """``[a, b] = a_X.b_Z + a_Z.b_X mod 2``; zero iff ``T_a`` and ``T_b`` commute."""
    _same_n(a, b)
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() & 1


def _symp_int(az: int, ax: int, bz: int, bx: int) -> int:
    return ((ax & bz) ^ (az & bx)).bit_count() & 1


# --------------------------------------------------------------------------
# Phase conventions


def _gamma0_value(z, x):
    if isinstance(z, (int, np.integer)):
        return (int(z) & int(x)).bit_count() & 3
    return (np.bitwise_count(z & x) & 3).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class PhaseConvention:
    """A Hermitian phase convention ``gamma: V -> Z_4``.

    Either a dense table of ``4**n`` entries (row-major in ``(a_Z, a_X)``) or
    the closed-form convention ``gamma0(a) = a_Z . a_X mod 4`` (``builtin="gamma0"``),
    which evaluates for any ``n`` without a table.
    """

    n: int
    _table: np.ndarray | None = field(default=None, repr=False)
    builtin: str | None = None

    TABLE_LIMIT = 8

    def __post_init__(self):
        if self.builtin is None and self._table is None:
            raise ValueError("need a table or a builtin convention")
        if self.builtin not in (None, "gamma0"):
            raise ValueError(f"unknown builtin convention {self.builtin!r}")
        if self._table is not None:
            t = np.asarray(self._table, dtype=np.int64) % 4
            if t.shape != (1 << (2 * self.n),):
                raise ValueError(f"table must have 4**n = {1 << 2 * self.n} entries, got {t.shape}")
            z, x = split_indices(all_indices(self.n), self.n)
            if np.any((t & 1) != parity(z & x)):
                bad = int(np.flatnonzero((t & 1) != parity(z & x))[0])
                raise ValueError(
                    f"non-Hermitian convention: gamma{PhasePoint.from_index(bad, self.n)!r} has wrong parity"
                )
            if t[0] != 0:
                raise ValueError("gamma(0) must be 0")
            t = t.astype(np.uint8)
            t.setflags(write=False)
            object.__setattr__(self, "_table", t)

    @classmethod
    def gamma0(cls, n: int) -> "PhaseConvention":
        return cls(n, None, "gamma0")

    @classmethod
    def from_table(cls, table: Sequence[int] | np.ndarray, n: int | None = None) -> "PhaseConvention":
        table = np.asarray(table)
        if n is None:
            n = int(round(np.log2(table.size) / 2))
        return cls(n, table)

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            if self.n > self.TABLE_LIMIT:
                raise CapacityError(f"dense gamma table limited to n <= {self.TABLE_LIMIT}")
            z, x = split_indices(all_indices(self.n), self.n)
            t = _gamma0_value(z, x)
            t.setflags(write=False)
            object.__setattr__(self, "_table", t)
        return self._table

    def __call__(self, a: PhasePoint) -> int:
        if a.n != self.n:
            raise DimensionError(f"point on {a.n} qubits, convention on {self.n}")
        return self.value(a.z, a.x)

    def value(self, z, x):
        """Evaluate on raw bit words (ints or arrays)."""
        if self.builtin == "gamma0":
            return _gamma0_value(z, x)
        return self.table[(z << self.n) | x]

    def at_index(self, idx):
        if self.builtin == "gamma0":
            z, x = split_indices(idx, self.n)
            return _gamma0_value(z, x)
        return self.table[idx]

    def shifted(self, sign_bits: np.ndarray) -> "PhaseConvention":
        """``gamma + 2*s mod 4`` for a sign-bit vector ``s`` over all of V."""
        s = np.asarray(sign_bits, dtype=np.int64)
        return PhaseConvention(self.n, (self.table.astype(np.int64) + 2 * s) % 4)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseConvention) or other.n != self.n:
            return False
        if self.builtin and self.builtin == other.builtin:
            return True
        return bool(np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return hash((self.n, self.table.tobytes()))

    def is_gamma0(self) -> bool:
        return self.builtin == "gamma0" or self == PhaseConvention.gamma0(self.n)

    def to_json(self) -> dict:
        if self.builtin:
            return {"n": self.n, "builtin": self.builtin}
        return {"n": self.n, "table": [int(v) for v in self.table]}

    @classmethod
    def from_json(cls, data: dict) -> "PhaseConvention":
        n = int(data["n"])
        if "builtin" in data:
            if data["builtin"] != "gamma0":
                raise ValueError(f"unknown builtin {data['builtin']!r}")
            return cls.gamma0(n)
        return cls(n, np.asarray(data["table"]))


def beta(gamma: PhaseConvention, a: PhasePoint, b: PhasePoint) -> int:
    """Exponent ``beta`` with ``T_{a+b} = i**beta(a,b) T_a T_b``."""
    _same_n(a, b)
    if a.n != gamma.n:
        raise DimensionError(f"points on {a.n} qubits, convention on {gamma.n}")
    return _beta_int(gamma, a.z, a.x, b.z, b.x)


def _beta_int(gamma, az, ax, bz, bx) -> int:
    g = gamma.value
    return int(-int(g(az, ax)) - int(g(bz, bx)) + int(g(az ^ bz, ax ^ bx)) + 2 * ((ax & bz).bit_count())) & 3


def beta_table(gamma: PhaseConvention, rows: np.ndarray | None = None) -> np.ndarray:
    """``beta[i, j]`` for point indices ``rows`` (default: all) against all of V."""
    n = gamma.n
    idx = all_indices(n)
    rows = idx if rows is None else np.asarray(rows, dtype=np.int64)
    t = gamma.table.astype(np.int16)
    az, ax = split_indices(rows[:, None], n)
    bz, bx = split_indices(idx[None, :], n)
    cross = np.bitwise_count(ax & bz).astype(np.int16)
    return ((t[rows[:, None] ^ idx[None, :]] - t[rows][:, None] - t[idx][None, :] + 2 * cross) & 3).astype(np.uint8)


def symplectic_table(n: int, rows: np.ndarray | None = None) -> np.ndarray:
    idx = all_indices(n)
    rows = idx if rows is None else np.asarray(rows, dtype=np.int64)
    az, ax = split_indices(rows[:, None], n)
    bz, bx = split_indices(idx[None, :], n)
    return parity((ax & bz) ^ (az & bx))


# --------------------------------------------------------------------------
# Pauli operators relative to a convention


@dataclass(frozen=True)
class PauliOperator:
    """``i**phase * T_point`` relative to some fixed :class:`PhaseConvention`."""

    phase: int
    point: PhasePoint

    def __post_init__(self):
        object.__setattr__(self, "phase", int(self.phase) & 3)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(0, PhasePoint.zero(n))

    @property
    def n(self) -> int:
        return self.point.n

    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def sign_bit(self) -> int:
        """0 for ``+T_a``, 1 for ``-T_a``; only meaningful for Hermitian operators."""
        if not self.is_hermitian():
            raise ValueError("non-Hermitian operator has no sign bit")
        return self.phase >> 1

    def __neg__(self) -> "PauliOperator":
        return PauliOperator(self.phase + 2, self.point)


def multiply(gamma: PhaseConvention, p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Operator product ``p q``."""
    b = beta(gamma, p.point, q.point)
    return PauliOperator(p.phase + q.phase - b, p.point + q.point)


def plain_pauli_matrix(z: int, x: int, n: int) -> np.ndarray:
    """Dense ``Z(z) X(x)`` without any phase prefactor."""
    _check_dense(n)
    dim = 1 << n
    w = np.arange(dim, dtype=np.int64)
    rows = w ^ x
    m = np.zeros((dim, dim), dtype=complex)
    m[rows, w] = 1 - 2 * parity(rows & z).astype(float)
    return m


def dense_matrix(gamma: PhaseConvention, p: PauliOperator | PhasePoint) -> np.ndarray:
    """Exact ``2**n x 2**n`` matrix of ``i**phase T_point``."""
    if isinstance(p, PhasePoint):
        p = PauliOperator(0, p)
    a = p.point
    if a.n != gamma.n:
        raise DimensionError(f"operator on {a.n} qubits, convention on {gamma.n}")
    return (1j ** ((p.phase + int(gamma(a))) & 3)) * plain_pauli_matrix(a.z, a.x, a.n)


# --------------------------------------------------------------------------
# Clifford gates in tableau form
#
# The tableau stores, for each Z_k and X_k, the image g^dag P g as
# ``i**phase * T~_point`` where T~ uses the internal convention gamma0.  Since
# gamma0(z_k) = gamma0(x_k) = 0, T~ of a basis point is just Z_k or X_k.

def _w(z: int, x: int) -> int:
    return (z & x).bit_count()


def _mul_tilde(p1: int, z1: int, x1: int, p2: int, z2: int, x2: int) -> tuple[int, int, int]:
    """``(i^p1 T~_a)(i^p2 T~_b)`` under gamma0."""
    z, x = z1 ^ z2, x1 ^ x2
    b = (-_w(z1, x1) - _w(z2, x2) + _w(z, x) + 2 * (x1 & z2).bit_count()) & 3
    return (p1 + p2 - b) & 3, z, x


@dataclass(frozen=True, eq=False)
class CliffordGate:
    """An n-qubit Clifford unitary ``g`` described by its conjugation action.

    ``images[k]`` is ``(phase, z, x)`` with ``g^dag Z_k g = i**phase T~_(z,x)`` for
    ``k < n`` and likewise for ``X_{k-n}``, relative to the internal convention
    ``gamma0``.  ``matrix`` is an optional dense unitary kept alongside for
    oracle checks; it is carried through composition when both sides have one.
    """

    n: int
    images: tuple[tuple[int, int, int], ...]
    matrix: np.ndarray | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if len(self.images) != 2 * self.n:
            raise ValueError("need 2n basis images")
        S = self.symplectic_matrix()
        if not _is_symplectic(S, self.n):
            raise ValueError("basis images do not preserve the symplectic form")
        if any(p & 1 for p, _, _ in self.images):
            raise ValueError("basis images must be Hermitian")

    # -- construction ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "CliffordGate":
        imgs = tuple((0, 1 << (n - 1 - k), 0) for k in range(n)) + tuple(
            (0, 0, 1 << (n - 1 - k)) for k in range(n)
        )
        mat = np.eye(1 << n, dtype=complex) if n <= dense_limit() else None
        return cls(n, imgs, mat, "I")

    @classmethod
    def from_unitary(cls, U: np.ndarray, name: str = "") -> "CliffordGate":
        U = np.asarray(U, dtype=complex)
        dim = U.shape[0]
        n = dim.bit_length() - 1
        if U.shape != (dim, dim) or 1 << n != dim:
            raise ValueError("unitary must be square with power-of-two size")
        if not np.allclose(U.conj().T @ U, np.eye(dim), atol=1e-10):
            raise ValueError("matrix is not unitary")
        imgs = []
        for kind in ("z", "x"):
            for k in range(n):
                bit = 1 << (n - 1 - k)
                P = plain_pauli_matrix(bit if kind == "z" else 0, bit if kind == "x" else 0, n)
                imgs.append(_identify_pauli(U.conj().T @ P @ U, n))
        return cls(n, tuple(imgs), U, name)

    @classmethod
    def from_symplectic(cls, S: np.ndarray, phases: Sequence[int] | None = None, name: str = "") -> "CliffordGate":
        """Gate whose action on points is the binary matrix ``S`` (columns = basis images)."""
        S = np.asarray(S, dtype=np.uint8) & 1
        n = S.shape[0] // 2
        phases = [0] * (2 * n) if phases is None else list(phases)
        imgs = []
        for col in range(2 * n):
            z, x = _vec_to_words(S[:, col], n)
            imgs.append((phases[col] & 3, z, x))
        return cls(n, tuple(imgs), None, name)

    @classmethod
    def pauli(cls, point: PhasePoint) -> "CliffordGate":
        """The plain Pauli ``Z(z)X(x)`` as a gate (it flips signs of anticommuting Paulis)."""
        n = point.n
        imgs = []
        for kind in ("z", "x"):
            for k in range(n):
                bit = 1 << (n - 1 - k)
                ez, ex = (bit, 0) if kind == "z" else (0, bit)
                flip = _symp_int(point.z, point.x, ez, ex)
                imgs.append((2 * flip, ez, ex))
        mat = plain_pauli_matrix(point.z, point.x, n) if n <= dense_limit() else None
        return cls(n, tuple(imgs), mat, point.label())

    def embed(self, qubits: Sequence[int], n: int) -> "CliffordGate":
        """Place this ``k``-qubit gate on ``qubits`` of an ``n``-qubit register."""
        k = self.n
        if len(qubits) != k or len(set(qubits)) != k or any(not 0 <= q < n for q in qubits):
            raise ValueError(f"bad qubit list {qubits} for n={n}")

        def lift(word: int) -> int:
            out = 0
            for j, q in enumerate(qubits):
                if word >> (k - 1 - j) & 1:
                    out |= 1 << (n - 1 - q)
            return out

        base = CliffordGate.identity(n).images if n <= dense_limit() else tuple(
            (0, 1 << (n - 1 - j), 0) for j in range(n)
        ) + tuple((0, 0, 1 << (n - 1 - j)) for j in range(n))
        imgs = list(base)
        for j, q in enumerate(qubits):
            p, z, x = self.images[j]
            imgs[q] = (p, lift(z), lift(x))
            p, z, x = self.images[k + j]
            imgs[n + q] = (p, lift(z), lift(x))
        mat = None
        if self.matrix is not None and n <= dense_limit():
            mat = _embed_matrix(self.matrix, qubits, n)
        label = f"{self.name}[{','.join(str(q + 1) for q in qubits)}]" if self.name else ""
        return CliffordGate(n, tuple(imgs), mat, label)

    # -- action ------------------------------------------------------------

    def symplectic_matrix(self) -> np.ndarray:
        n = self.n
        S = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for col, (_, z, x) in enumerate(self.images):
            S[:, col] = _words_to_vec(z, x, n)
        return S

    def act(self, a: PhasePoint) -> PhasePoint:
        """Image point ``S a`` (phases dropped)."""
        _, z, x = self.conjugate_tilde(0, a.z, a.x)
        return PhasePoint(z, x, self.n)

    def conjugate_tilde(self, phase: int, z: int, x: int) -> tuple[int, int, int]:
        """``g^dag (i^phase T~_(z,x)) g`` under the internal convention."""
        n = self.n
        acc = ((phase + _w(z, x)) & 3, 0, 0)
        for k in range(n):
            if z >> (n - 1 - k) & 1:
                acc = _mul_tilde(*acc, *self.images[k])
        for k in range(n):
            if x >> (n - 1 - k) & 1:
                acc = _mul_tilde(*acc, *self.images[n + k])
        return acc

    def point_map(self) -> tuple[np.ndarray, np.ndarray]:
        """Image index ``S a`` and internal phase for every point index ``a``."""
        n = self.n
        N = 1 << (2 * n)
        img = np.empty(N, dtype=np.int64)
        ph = np.empty(N, dtype=np.uint8)
        for i in range(N):
            p, z, x = self.conjugate_tilde(0, i >> n, i & ((1 << n) - 1))
            img[i] = (z << n) | x
            ph[i] = p
        return img, ph

    def plain_phase_map(self) -> tuple[np.ndarray, np.ndarray]:
        """``theta`` with ``g^dag Z(z)X(x) g = i**theta * Z(z')X(x')`` for every index."""
        n = self.n
        img, ph = self.point_map()
        z, x = split_indices(all_indices(n), n)
        iz, ix = split_indices(img, n)
        theta = (ph.astype(np.int64) + _gamma0_value(iz, ix).astype(np.int64) - _gamma0_value(z, x)) & 3
        return img, theta.astype(np.uint8)

    # -- algebra -----------------------------------------------------------

    def then(self, other: "CliffordGate") -> "CliffordGate":
        """Apply ``self`` first, then ``other`` (unitary ``other @ self``)."""
        if other.n != self.n:
            raise DimensionError("gates act on different registers")
        imgs = tuple(self.conjugate_tilde(*other.images[j]) for j in range(2 * self.n))
        mat = None
        if self.matrix is not None and other.matrix is not None:
            mat = other.matrix @ self.matrix
        name = f"{self.name};{other.name}" if self.name and other.name else ""
        return CliffordGate(self.n, imgs, mat, name)

    def inverse(self) -> "CliffordGate":
        n = self.n
        S = self.symplectic_matrix()
        Om = _omega(n)
        Sinv = (Om @ S.T @ Om) & 1
        imgs = []
        for col in range(2 * n):
            z, x = _vec_to_words(Sinv[:, col], n)
            p, _, _ = self.conjugate_tilde(0, z, x)
            imgs.append(((-p) & 3, z, x))
        mat = None if self.matrix is None else self.matrix.conj().T
        return CliffordGate(n, tuple(imgs), mat, f"({self.name})^-1" if self.name else "")

    def same_action(self, other: "CliffordGate") -> bool:
        """Equal as Clifford unitaries up to a global phase."""
        return self.n == other.n and self.images == other.images

    def key(self) -> tuple:
        return self.images

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "images": [[int(p), int(z), int(x)] for p, z, x in self.images],
            **({"name": self.name} if self.name else {}),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CliffordGate":
        return cls(int(data["n"]), tuple(tuple(int(v) for v in im) for im in data["images"]), None, data.get("name", ""))

    def __repr__(self) -> str:
        return f"CliffordGate(n={self.n}{', ' + self.name if self.name else ''})"

    # -- named generators ---------------------------------------------------

    @classmethod
    def named(cls, name: str, qubits: Sequence[int], n: int) -> "CliffordGate":
        base = _named_1q_2q(name.upper())
        return base.embed(list(qubits), n)


def _identify_pauli(Q: np.ndarray, n: int) -> tuple[int, int, int]:
    """Write a dense Hermitian Pauli as ``i**phase T~_(z,x)`` under gamma0."""
    dim = 1 << n
    for idx in range(1 << (2 * n)):
        z, x = idx >> n, idx & ((1 << n) - 1)
        coeff = np.trace(plain_pauli_matrix(z, x, n).conj().T @ Q) / dim
        if abs(coeff) > 0.5:
            # Q = coeff * Z X = coeff * i^{-w} T~
            val = coeff * (1j ** (-_w(z, x) & 3))
            for p in range(4):
                if abs(val - 1j**p) < 1e-8:
                    return (p, z, x)
            raise ValueError("matrix is not a Pauli operator up to a power of i")
    raise ValueError("matrix is not a Pauli operator")


def _words_to_vec(z: int, x: int, n: int) -> np.ndarray:
    v = np.zeros(2 * n, dtype=np.uint8)
    for k in range(n):
        v[k] = z >> (n - 1 - k) & 1
        v[n + k] = x >> (n - 1 - k) & 1
    return v


def _vec_to_words(v, n: int) -> tuple[int, int]:
    z = x = 0
    for k in range(n):
        if v[k]:
            z |= 1 << (n - 1 - k)
        if v[n + k]:
            x |= 1 << (n - 1 - k)
    return z, x


def _omega(n: int) -> np.ndarray:
    Om = np.zeros((2 * n, 2 * n), dtype=np.int64)
    Om[:n, n:] = np.eye(n, dtype=np.int64)
    Om[n:, :n] = np.eye(n, dtype=np.int64)
    return Om


def _is_symplectic(S: np.ndarray, n: int) -> bool:
    Om = _omega(n)
    S = S.astype(np.int64)
    return bool(np.array_equal((S.T @ Om @ S) & 1, Om))


def _embed_matrix(U: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    order = list(qubits) + rest
    full = np.kron(U, np.eye(1 << (n - k), dtype=complex))
    # full acts on qubits in `order`; permute axes back to natural order.
    t = full.reshape([2] * (2 * n))
    perm = [order.index(q) for q in range(n)]
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(1 << n, 1 << n)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

_NAMED_MATRICES = {
    "H": _H,
    "S": _S,
    "SDG": _S.conj().T,
    "X": _X,
    "Y": _Y,
    "Z": _Z,
    "CZ": _CZ,
    "CNOT": _CNOT,
    "CX": _CNOT,
    "SWAP": _SWAP,
}


@functools.lru_cache(maxsize=None)
def _named_1q_2q(name: str) -> CliffordGate:
    if name not in _NAMED_MATRICES:
        raise ValueError(f"unknown gate {name!r}; known: {sorted(_NAMED_MATRICES)}")
    return CliffordGate.from_unitary(_NAMED_MATRICES[name], name)


def named_matrix(name: str) -> np.ndarray:
    return _NAMED_MATRICES[name.upper()].copy()


def conjugate(gamma: PhaseConvention, g: CliffordGate, p: PauliOperator) -> PauliOperator:
    """``g^dag p g`` with the phase expressed relative to ``gamma``.

    The tableau works in gamma0; the conversion is
    ``phi(a) = phi~(a) + (gamma0(Sa) - gamma0(a)) - (gamma(Sa) - gamma(a))``.
    """
    a = p.point
    if a.n != g.n or gamma.n != g.n:
        raise DimensionError("gate, operator and convention must share n")
    ph_t, z, x = g.conjugate_tilde(0, a.z, a.x)
    phi = ph_t + (_w(z, x) - _w(a.z, a.x)) - (int(gamma.value(z, x)) - int(gamma.value(a.z, a.x)))
    return PauliOperator(p.phase + phi, PhasePoint(z, x, a.n))


def dense_unitary(g: CliffordGate) -> np.ndarray:
    """Dense unitary of ``g`` (up to global phase).

    Uses the stored matrix when present; otherwise reconstructs it from the
    conjugation action via ``sum_a (g T_a g^dag) M T_a = 2**n Tr(g^dag M) g``.
    """
    if g.matrix is not None:
        return g.matrix
    n = g.n
    _check_dense(n)
    dim = 1 << n
    ginv = g.inverse()
    gamma0 = PhaseConvention.gamma0(n)
    N = 1 << (2 * n)
    for i in range(dim):
        acc = np.zeros((dim, dim), dtype=complex)
        for idx in range(N):
            a = PhasePoint.from_index(idx, n)
            Ta = dense_matrix(gamma0, a)
            img = conjugate(gamma0, ginv, PauliOperator(0, a))  # g T_a g^dag
            acc += np.outer(dense_matrix(gamma0, img)[:, i], Ta[0, :])
        nrm = np.linalg.norm(acc)
        if nrm > 1e-9:
            U = acc / nrm * np.sqrt(dim)
            return U
    raise AssertionError("failed to reconstruct unitary")


# --------------------------------------------------------------------------
# Text syntax: optional sign, then one letter per qubit, e.g. "-XZI".
# The string denotes the literal tensor product of Pauli matrices.


def parse_pauli(text: str, gamma: PhaseConvention) -> PauliOperator:
    """Read ``"+XZI"``-style text as ``i**phase T^gamma_a``."""
    s = text.strip()
    neg = 0
    if s[:1] in "+-":
        neg = s[0] == "-"
        s = s[1:]
    if not s:
        raise ValueError(f"empty Pauli string {text!r}")
    a = PhasePoint.from_label(s)
    if a.n != gamma.n:
        raise DimensionError(f"{text!r} has {a.n} qubits, convention has {gamma.n}")
    return PauliOperator(2 * neg - a.y_count() - int(gamma(a)), a)


def format_pauli(p: PauliOperator, gamma: PhaseConvention) -> str:
    """Inverse of :func:`parse_pauli` for Hermitian operators."""
    e = (p.phase + int(gamma(p.point)) + p.point.y_count()) & 3
    if e & 1:
        raise ValueError("only Hermitian Pauli operators have a text form")
    return ("-" if e else "+") + p.point.label()
