"""Free sector of the scheme defined by a phase convention.

A point ``a`` is directly measurable when measuring ``T_a`` can never create
Wigner negativity, which happens exactly when ``beta(a, b) = 0`` for every
``b`` commuting with ``a``.  Inferable points are those reachable by adding a
commuting directly measurable point to an inferable one; a scheme is
tomographically complete when every point is inferable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, SchemeViolationError, ValidationError
from .pauli import (
    CliffordGate,
    PauliOperator,
    PhaseConvention,
    PhasePoint,
    _check_dense,
    all_indices,
    beta_table,
    conjugate,
    dense_matrix,
    parse_pauli,
    split_indices,
    symplectic_form,
    symplectic_table,
)

ENUMERATION_LIMIT = 6


def is_directly_measurable(gamma: PhaseConvention, a: PhasePoint) -> bool:
    if a.n != gamma.n:
        raise DimensionError("point and convention disagree on n")
    row = np.array([a.index])
    b = beta_table(gamma, row)[0]
    comm = symplectic_table(gamma.n, row)[0] == 0
    return bool(np.all(b[comm] == 0))


def build_O(gamma: PhaseConvention, chunk: int = 256) -> np.ndarray:
    """Sorted indices of every directly measurable point (full ``16**n`` scan)."""
    n = gamma.n
    if n > ENUMERATION_LIMIT:
        raise CapacityError(f"exhaustive scan limited to n <= {ENUMERATION_LIMIT}")
    idx = all_indices(n)
    keep = []
    for start in range(0, idx.size, chunk):
        rows = idx[start:start + chunk]
        b = beta_table(gamma, rows)
        comm = symplectic_table(n, rows) == 0
        keep.append(~np.any(comm & (b != 0), axis=1))
    return idx[np.concatenate(keep)]


def build_M(V_O: Iterable[int], n: int) -> tuple[np.ndarray, dict[int, tuple[int, int]]]:
    """Closure of ``V_O`` plus one recorded parent pair per added point.

    Points are added in rounds; within a round the first pair ``(a, b)`` in
    lexicographic order (``a`` from ``V_O``, ``b`` from the current set)
    becomes the parent.
    """
    O = np.array(sorted(set(int(v) for v in V_O)), dtype=np.int64)
    N = 1 << (2 * n)
    inM = np.zeros(N, dtype=bool)
    inM[O] = True
    parents: dict[int, tuple[int, int]] = {}
    if O.size == 0:
        return O, parents
    comm_O = symplectic_table(n, O) == 0  # [len(O), N]
    while True:
        M = np.flatnonzero(inM)
        found = {}
        ok = comm_O[:, M]
        for i, j in zip(*np.nonzero(ok)):
            a, b = int(O[i]), int(M[j])
            c = a ^ b
            if not inM[c] and c not in found:
                found[c] = (a, b)
        if not found:
            break
        for c, pr in found.items():
            parents[c] = pr
            inM[c] = True
    return np.flatnonzero(inM).astype(np.int64), parents


@dataclass(frozen=True)
class MeasurementResolution:
    """Points ``a_1 .. a_N`` from ``V_O`` summing to ``target`` with nested commutation."""

    target: PhasePoint
    sequence: tuple[PhasePoint, ...]

    def is_valid(self, V_O: Iterable[int] | None = None) -> bool:
        n = self.target.n
        acc = PhasePoint.zero(n)
        for p in self.sequence:
            acc = acc + p
        if acc != self.target:
            return False
        for i, ai in enumerate(self.sequence):
            rest = PhasePoint.zero(n)
            for aj in self.sequence[i + 1:]:
                rest = rest + aj
            if symplectic_form(ai, rest):
                return False
        if V_O is not None:
            Os = set(int(v) for v in V_O)
            return all(p.index in Os for p in self.sequence)
        return True


@dataclass(eq=False)
class Scheme:
    """Directly measurable and inferable sets of a convention, plus an optional frame.

    ``frame`` is a dense unitary ``F``; when present the scheme's observables
    are ``F T_a F^dag`` instead of ``T_a``.  It only arises from conjugating
    by a non-Clifford unitary and only affects dense rendering.
    """

    gamma: PhaseConvention
    V_O_indices: frozenset
    V_M_indices: frozenset
    parents: dict = field(repr=False)
    frame: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.gamma.n

    @property
    def V_O(self) -> list[PhasePoint]:
        return [PhasePoint.from_index(i, self.n) for i in sorted(self.V_O_indices)]

    @property
    def V_M(self) -> list[PhasePoint]:
        return [PhasePoint.from_index(i, self.n) for i in sorted(self.V_M_indices)]

    @property
    def P1(self) -> bool:
        return True

    @property
    def P2(self) -> bool:
        return len(self.V_M_indices) == 1 << (2 * self.n)

    def in_O(self, a: PhasePoint) -> bool:
        return a.index in self.V_O_indices

    def in_M(self, a: PhasePoint) -> bool:
        return a.index in self.V_M_indices

    def resolution(self, target: PhasePoint) -> MeasurementResolution:
        if target.index not in self.V_M_indices:
            raise SchemeViolationError(f"{target.label()} is not inferable")
        seq = []
        cur = target.index
        while cur not in self.V_O_indices:
            a, b = self.parents[cur]
            seq.append(a)
            cur = b
        if cur:
            seq.append(cur)
        return MeasurementResolution(target, tuple(PhasePoint.from_index(i, self.n) for i in seq))

    def observable(self, a: PhasePoint) -> np.ndarray:
        T = dense_matrix(self.gamma, a)
        if self.frame is not None:
            T = self.frame @ T @ self.frame.conj().T
        return T

    def to_json(self) -> dict:
        from .pauli import format_pauli

        return {
            "n": self.n,
            "gamma": self.gamma.to_json(),
            "V_O": [format_pauli(PauliOperator(0, p), self.gamma) for p in self.V_O],
            "V_O_points": [[p.z, p.x] for p in self.V_O],
            "V_M_size": len(self.V_M_indices),
            "P1": True,
            "P2": self.P2,
        }


def build_scheme(gamma: PhaseConvention) -> Scheme:
    O = build_O(gamma)
    M, parents = build_M(O, gamma.n)
    return Scheme(gamma, frozenset(int(v) for v in O), frozenset(int(v) for v in M), parents)


def scheme_from_O(gamma: PhaseConvention, V_O: Iterable[PhasePoint | int]) -> Scheme:
    """Scheme with a hand-chosen measurable set (used for restricted toy schemes)."""
    idx = sorted({p.index if isinstance(p, PhasePoint) else int(p) for p in V_O} | {0})
    M, parents = build_M(idx, gamma.n)
    return Scheme(gamma, frozenset(idx), frozenset(int(v) for v in M), parents)


def check_P2(scheme: Scheme) -> bool:
    return scheme.P2


def in_O_witness(gamma: PhaseConvention, a: PhasePoint) -> tuple[PhasePoint, np.ndarray, np.ndarray] | None:
    """For ``a`` outside ``V_O``: a commuting ``b`` with ``beta = 2`` and the states showing it.

    Returns ``(b, rho_in, rho_out)`` where ``rho_in = (I - T_b)/2**n`` has a
    non-negative Wigner function and ``rho_out`` is its normalized ``-1``
    branch after measuring ``T_a``; ``rho_out`` has ``W(0) = -2/4**n``.
    Returns ``None`` when ``a`` is directly measurable.
    """
    n = gamma.n
    row = np.array([a.index])
    bt = beta_table(gamma, row)[0]
    comm = symplectic_table(n, row)[0] == 0
    bad = np.flatnonzero(comm & (bt != 0))
    if bad.size == 0:
        return None
    b = PhasePoint.from_index(int(bad[0]), n)
    _check_dense(n)
    dim = 1 << n
    I = np.eye(dim)
    rho_in = (I - dense_matrix(gamma, b)) / dim
    P = (I - dense_matrix(gamma, a)) / 2
    post = P @ rho_in @ P
    return b, rho_in, post / np.trace(post).real


# --------------------------------------------------------------------------
# Free gates


def is_free_gate(scheme: Scheme, g: CliffordGate) -> bool:
    if g.n != scheme.n:
        raise DimensionError("gate and scheme disagree on n")
    return all(g.act(p).index in scheme.V_O_indices for p in scheme.V_O)


def _symplectic_matrices(n: int) -> Iterable[np.ndarray]:
    """All of ``Sp(2n, Z_2)`` by column-wise backtracking (n <= 2)."""
    m = 2 * n
    vecs = [np.array([(v >> (m - 1 - k)) & 1 for k in range(m)], dtype=np.int64) for v in range(1, 1 << m)]
    Om = np.zeros((m, m), dtype=np.int64)
    Om[:n, n:] = np.eye(n, dtype=np.int64)
    Om[n:, :n] = np.eye(n, dtype=np.int64)

    def form(u, v):
        return int(u @ Om @ v) & 1

    cols: list[np.ndarray] = [None] * m  # type: ignore

    def rec(k):
        if k == m:
            yield np.stack(cols, axis=1).astype(np.uint8)
            return
        for v in vecs:
            if all(form(cols[j], v) == int(Om[j, k]) for j in range(k)):
                cols[k] = v
                yield from rec(k + 1)

    yield from rec(0)


def enumerate_free_gates(scheme: Scheme, generators: Sequence[CliffordGate] | None = None) -> dict:
    """Free Clifford gates modulo global phase.

    For ``n <= 2`` the whole symplectic group is scanned.  For larger ``n`` a
    generator list is required; the free ones among them are closed into a
    group.  Each free symplectic matrix carries ``4**n`` gates (one per Pauli
    translation).
    """
    n = scheme.n
    O = [p for p in scheme.V_O]

    def free(S):
        g = CliffordGate.from_symplectic(S)
        return all(g.act(p).index in scheme.V_O_indices for p in O)

    if n <= 2 and generators is None:
        free_S = [S for S in _symplectic_matrices(n) if free(S)]
    else:
        if generators is None:
            raise CapacityError("exhaustive enumeration limited to n <= 2; pass generators")
        gens = [g.symplectic_matrix() for g in generators if is_free_gate(scheme, g)]
        free_S = _close_group(gens, n)
    keyset = {S.tobytes() for S in free_S}
    # greedy generating set
    chosen: list[np.ndarray] = []
    reached = {np.eye(2 * n, dtype=np.uint8).tobytes()}
    for S in free_S:
        if S.tobytes() not in reached:
            chosen.append(S)
            reached = {s.tobytes() for s in _close_group(chosen, n)}
    assert reached <= keyset
    return {
        "n": n,
        "symplectic_count": len(free_S),
        "count": len(free_S) * (1 << (2 * n)),
        "generators": [CliffordGate.from_symplectic(S) for S in chosen],
        "symplectic": free_S,
    }


def _close_group(gens: Sequence[np.ndarray], n: int) -> list[np.ndarray]:
    I = np.eye(2 * n, dtype=np.uint8)
    seen = {I.tobytes(): I}
    frontier = [I]
    gens = [g.astype(np.int64) for g in gens]
    while frontier:
        nxt = []
        for S in frontier:
            for g in gens:
                T = ((g @ S.astype(np.int64)) & 1).astype(np.uint8)
                k = T.tobytes()
                if k not in seen:
                    seen[k] = T
                    nxt.append(T)
        frontier = nxt
    return list(seen.values())


# --------------------------------------------------------------------------
# Free states


def generate_free_state(scheme: Scheme, steps: Sequence) -> np.ndarray:
    """Apply ordered projectors ``(I + (-1)**s T_a)/2`` to ``I/2**n`` and renormalize.

    Each step is a Pauli string such as ``"+Z I"``-free ``"+ZI"``, a
    :class:`PauliOperator`, or a ``(PhasePoint, sign_bit)`` pair.
    """
    n = scheme.n
    _check_dense(n)
    dim = 1 << n
    rho = np.eye(dim, dtype=complex) / dim
    for st in steps:
        a, s = _as_signed_point(scheme.gamma, st)
        if a.index not in scheme.V_O_indices:
            raise SchemeViolationError(f"{a.label()} is not directly measurable")
        P = (np.eye(dim) + (-1) ** s * scheme.observable(a)) / 2
        rho = P @ rho @ P
    tr = float(np.trace(rho).real)
    if tr < 1e-12:
        raise ValidationError("projector sequence annihilates the state")
    return rho / tr


def _as_signed_point(gamma: PhaseConvention, st) -> tuple[PhasePoint, int]:
    if isinstance(st, str):
        st = parse_pauli(st, gamma)
    if isinstance(st, PauliOperator):
        return st.point, st.sign_bit
    a, s = st
    return a, int(s) & 1


# --------------------------------------------------------------------------
# Conjugating whole schemes


def conjugate_scheme(scheme: Scheme, U) -> Scheme:
    """Scheme whose observables are ``U T_a U^dag`` for the old ``T_a``.

    For a :class:`CliffordGate` the result is a new convention ``gamma'`` on
    the permuted points, ``T'_{Sa} = U T_a U^dag``.  A dense non-Clifford
    unitary is absorbed into the scheme's frame instead.
    """
    if isinstance(U, CliffordGate) and scheme.frame is None:
        n = scheme.n
        g = U.inverse()  # g^dag T_a g = U T_a U^dag
        gamma = scheme.gamma
        table = np.zeros(1 << (2 * n), dtype=np.int64)
        img = np.zeros(1 << (2 * n), dtype=np.int64)
        for idx in range(1 << (2 * n)):
            out = conjugate(gamma, g, PauliOperator(0, PhasePoint.from_index(idx, n)))
            img[idx] = out.point.index
            table[out.point.index] = (int(gamma(out.point)) + out.phase) & 3
        new_gamma = PhaseConvention.from_table(table, n)
        O = frozenset(int(img[i]) for i in scheme.V_O_indices)
        M, parents = build_M(O, n)
        return Scheme(new_gamma, O, frozenset(int(v) for v in M), parents)
    Ud = U.matrix if isinstance(U, CliffordGate) else np.asarray(U, dtype=complex)
    if Ud is None:
        from .pauli import dense_unitary

        Ud = dense_unitary(U)
    frame = Ud if scheme.frame is None else Ud @ scheme.frame
    return Scheme(scheme.gamma, scheme.V_O_indices, scheme.V_M_indices, scheme.parents, frame)


# --------------------------------------------------------------------------
# Searching conventions


def hermitian_parity(n: int) -> np.ndarray:
    z, x = split_indices(all_indices(n), n)
    return (np.bitwise_count(z & x) & 1).astype(np.int64)


def _batch_O_mask(tables: np.ndarray, n: int) -> np.ndarray:
    """Directly-measurable mask for a batch of gamma tables, shape ``[G, 4**n]``."""
    idx = all_indices(n)
    az, ax = split_indices(idx[:, None], n)
    bz, bx = split_indices(idx[None, :], n)
    cross = 2 * np.bitwise_count(ax & bz).astype(np.int16)
    comm = symplectic_table(n) == 0
    t = tables.astype(np.int16)
    sums = idx[:, None] ^ idx[None, :]
    beta = (t[:, sums] - t[:, :, None] - t[:, None, :] + cross[None]) & 3
    return ~np.any(comm[None] & (beta != 0), axis=2)


def _batch_P2(Omask: np.ndarray, n: int) -> np.ndarray:
    N = 1 << (2 * n)
    idx = all_indices(n)
    comm = symplectic_table(n) == 0
    sums = idx[:, None] ^ idx[None, :]
    M = Omask.copy()
    while True:
        # reach[g, c] = exists a in O, b in M, comm(a,b), a^b = c
        pair = Omask[:, :, None] & M[:, None, :] & comm[None]
        new = M.copy()
        for a in range(N):
            hits = pair[:, a, :]
            if hits.any():
                np.logical_or.at(new, (np.nonzero(hits)[0], sums[a][np.nonzero(hits)[1]]), True)
        if np.array_equal(new, M):
            return M.all(axis=1)
        M = new


def _clifford_generators(n: int) -> list[CliffordGate]:
    gens = []
    for q in range(n):
        gens += [CliffordGate.named("H", [q], n), CliffordGate.named("S", [q], n),
                 CliffordGate.named("X", [q], n), CliffordGate.named("Z", [q], n)]
    for q in range(n - 1):
        gens.append(CliffordGate.named("CNOT", [q, q + 1], n))
    return gens


def act_on_tables(g: CliffordGate, tables: np.ndarray) -> np.ndarray:
    """Tables of the conventions obtained by conjugating each scheme with ``g``.

    ``T'_{Sb} = g^dag T_b g``, i.e. ``gamma'(Sb) = gamma(b) + theta(b)`` with
    ``g^dag Z(b_Z)X(b_X) g = i**theta Z X(Sb)``.
    """
    img, theta = g.plain_phase_map()
    out = np.empty_like(tables)
    out[:, img] = (tables + theta[None, :].astype(tables.dtype)) & 3
    return out


def table_key(table: np.ndarray) -> int:
    """Base-4 integer of a table read left to right; smaller is lexicographically smaller."""
    k = 0
    for v in table:
        k = 4 * k + int(v)
    return k


def search_gammas(n: int = 2, mode: str = "exhaustive", trials: int = 10000, seed: int = 0,
                  batch: int = 4096) -> dict:
    """Conventions whose scheme satisfies tomographic completeness.

    ``exhaustive`` (n = 2) scans every Hermitian convention and groups the
    solutions into Clifford classes; ``random`` samples ``trials`` conventions.
    Also reports how many conventions make every point directly measurable.
    """
    N = 1 << (2 * n)
    par = hermitian_parity(n)
    free_pts = np.flatnonzero(np.arange(N) > 0)
    if mode == "exhaustive":
        if n > 2:
            raise CapacityError("exhaustive search limited to n <= 2")
        total = 1 << (N - 1)
        codes = np.arange(total, dtype=np.int64)
    elif mode == "random":
        rng = np.random.default_rng(seed)
        total = trials
        codes = None
    else:
        raise ValidationError(f"unknown search mode {mode!r}")

    sols = []
    all_O = 0
    for start in range(0, total, batch):
        if codes is not None:
            c = codes[start:start + batch]
            bits = ((c[:, None] >> np.arange(N - 1)[None, :]) & 1)
        else:
            bits = rng.integers(0, 2, size=(min(batch, total - start), N - 1))
        tables = np.zeros((bits.shape[0], N), dtype=np.int64)
        tables[:, free_pts] = par[free_pts][None, :] + 2 * bits
        Om = _batch_O_mask(tables, n)
        all_O += int(Om.all(axis=1).sum())
        ok = _batch_P2(Om, n)
        sols.append(tables[ok])
    sols = np.concatenate(sols) if sols else np.zeros((0, N), dtype=np.int64)
    result = {"n": n, "mode": mode, "scanned": total, "solutions": sols, "count": len(sols),
              "all_points_measurable": all_O}
    if mode == "exhaustive" and len(sols):
        result.update(_clifford_classes(sols, n))
    return result


def _clifford_classes(sols: np.ndarray, n: int) -> dict:
    keys = np.array([table_key(t) for t in sols], dtype=object)
    pos = {k: i for i, k in enumerate(keys)}
    parent = list(range(len(sols)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in _clifford_generators(n):
        moved = act_on_tables(g, sols)
        for i, t in enumerate(moved):
            j = pos.get(table_key(t))
            if j is None:
                raise AssertionError("Clifford action left the solution set")
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    classes: dict[int, list[int]] = {}
    for i in range(len(sols)):
        classes.setdefault(find(i), []).append(i)
    reps = []
    for members in classes.values():
        m = min(members, key=lambda i: keys[i])
        reps.append((keys[m], m, len(members)))
    reps.sort()
    label = {}
    for cid, (_, m, _) in enumerate(reps):
        for i in classes[find(m)]:
            label[i] = cid
    g0 = PhaseConvention.gamma0(n).table.astype(np.int64)
    g0_class = label.get(pos.get(table_key(g0)), None)
    class_of = np.array([label[i] for i in range(len(sols))])
    return {
        "classes": [
            {"id": cid, "size": size, "representative": [int(v) for v in sols[m]],
             "V_O_size": int(_batch_O_mask(sols[m][None], n)[0].sum())}
            for cid, (_, m, size) in enumerate(reps)
        ],
        "class_of": class_of,
        "gamma0_class": g0_class,
    }
