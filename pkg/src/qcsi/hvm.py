"""Non-contextual hidden-variable models over the inferable observables.

A value assignment gives every inferable point ``a`` a sign ``lambda(a) =
(-1)**s(a)``.  Consistency demands ``s(a + b) = s(a) + s(b)`` whenever ``b`` is
directly measurable, ``a`` is inferable and the two commute (then
``T_{a+b} = T_a T_b`` exactly), together with ``s(0) = 0``.  These are linear
equations over GF(2), so the consistent assignments form a subspace.  Each
assignment is stored as its coordinate vector (an ``int``) in a fixed
reduced basis of that subspace; translating by a phase-space point ``u``,
``s(a) -> s(a) + [u, a]``, is then a single XOR.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityError, ImpossibleOutcomeError, SchemeViolationError, SolverError, ValidationError
from .pauli import PhaseConvention, PhasePoint, symplectic_table
from .scheme import Scheme, build_O
from .wigner import WignerMap, operator_from_wigner, pauli_coefficients

MAX_BASIS_DIM = 24
LP_TOL = 1e-9


# --------------------------------------------------------------------------
# GF(2) linear algebra on Python-int bitsets


def _rref(rows: list[int], width: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns ``(rows, pivot_columns)`` with pivots ascending."""
    rows = [r for r in rows if r]
    pivots: list[int] = []
    basis: list[int] = []
    for col in range(width):
        bit = 1 << col
        for i, r in enumerate(rows):
            if r & bit:
                piv = rows.pop(i)
                break
        else:
            continue
        rows = [r ^ piv if r & bit else r for r in rows]
        basis = [b ^ piv if b & bit else b for b in basis]
        basis.append(piv)
        pivots.append(col)
    return basis, pivots


def _kernel(rows: list[int], width: int) -> list[int]:
    basis, pivots = _rref(rows, width)
    pivset = set(pivots)
    kern = []
    for free in range(width):
        if free in pivset:
            continue
        v = 1 << free
        for r, p in zip(basis, pivots):
            if r >> free & 1:
                v |= 1 << p
        kern.append(v)
    return kern


def consistency_constraints(scheme: Scheme) -> list[int]:
    """Constraint rows (bitsets over point indices) for the product rule."""
    n = scheme.n
    N = 1 << (2 * n)
    M = np.array(sorted(scheme.V_M_indices), dtype=np.int64)
    rows = [1]  # s(0) = 0
    for b in sorted(scheme.V_O_indices):
        if b == 0:
            continue
        comm = symplectic_table(n, np.array([b]))[0] == 0
        inM = np.zeros(N, dtype=bool)
        inM[M] = True
        for a in np.flatnonzero(comm & inM):
            a = int(a)
            c = a ^ b
            if a < c:  # each unordered pair once
                rows.append((1 << a) ^ (1 << b) ^ (1 << c))
    return rows


# --------------------------------------------------------------------------
# State space


@dataclass(eq=False)
class HvmStateSpace:
    """Consistent value assignments and their orbit structure under translations.

    ``basis[k]`` is a bitset over point indices; assignment ``c`` (an int with
    ``dim`` bits) has sign bits ``s_c = XOR_{k in c} basis[k]``.  ``point_mask[a]``
    collects the basis vectors that touch ``a``, so ``s_c(a) = parity(c & point_mask[a])``.
    """

    scheme: Scheme
    basis: list[int]
    pivots: list[int]
    point_mask: np.ndarray = field(repr=False)
    shift: np.ndarray = field(repr=False)
    orbit_of: np.ndarray = field(repr=False)
    orbit_reps: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.scheme.n

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def orbit_count(self) -> int:
        return len(self.orbit_reps)

    def sign_bits(self, coords=None) -> np.ndarray:
        """``[len(coords), 4**n]`` array of sign bits (all assignments by default)."""
        if coords is None:
            coords = np.arange(self.size, dtype=np.int64)
        coords = np.asarray(coords, dtype=np.int64)
        return (np.bitwise_count(coords[:, None] & self.point_mask[None, :]) & 1).astype(np.uint8)

    def values(self, coords=None) -> np.ndarray:
        """``lambda_nu(a)`` in ``{+1, -1}``."""
        return 1 - 2 * self.sign_bits(coords).astype(np.int8)

    def value(self, nu: int, a: PhasePoint) -> int:
        return 1 - 2 * (int(nu & int(self.point_mask[a.index])).bit_count() & 1)

    def translate(self, nu, u: PhasePoint | int):
        """``nu + u``; vectorized over ``nu``."""
        ui = u.index if isinstance(u, PhasePoint) else int(u)
        return nu ^ self.shift[ui]

    def coords_of(self, sign_bits: np.ndarray) -> int:
        """Coordinate of an assignment given by its sign bits (must lie in the space)."""
        c = 0
        for k, p in enumerate(self.pivots):
            if sign_bits[p]:
                c |= 1 << k
        if not np.array_equal(self.sign_bits([c])[0], np.asarray(sign_bits, dtype=np.uint8)):
            raise ValidationError("sign pattern is not a consistent assignment")
        return c

    def orbit_members(self, orbit: int) -> np.ndarray:
        """Members ``tau + u`` ordered by ``u``'s point index."""
        return self.orbit_reps[orbit] ^ self.shift

    def rephased_gamma(self, orbit: int) -> PhaseConvention:
        s = self.sign_bits([self.orbit_reps[orbit]])[0]
        return self.scheme.gamma.shifted(s)

    def special_orbit(self) -> int:
        return int(self.orbit_of[0])


def enumerate_assignments(scheme: Scheme) -> HvmStateSpace:
    if not scheme.P2:
        raise SchemeViolationError("hidden-variable state space needs a tomographically complete scheme")
    n = scheme.n
    N = 1 << (2 * n)
    kern = _kernel(consistency_constraints(scheme), N)
    if len(kern) > MAX_BASIS_DIM:
        raise CapacityError(f"state space of 2**{len(kern)} assignments exceeds 2**{MAX_BASIS_DIM}")
    basis, pivots = _rref(kern, N)
    order = np.argsort(pivots)
    basis = [basis[i] for i in order]
    pivots = [pivots[i] for i in order]
    d = len(basis)
    point_mask = np.zeros(N, dtype=np.int64)
    for k, b in enumerate(basis):
        for a in range(N):
            if b >> a & 1:
                point_mask[a] |= 1 << k
    # translations: sigma_u(a) = [u, a]
    symp = symplectic_table(n)
    shift = np.zeros(N, dtype=np.int64)
    for u in range(N):
        c = 0
        for k, p in enumerate(pivots):
            if symp[u, p]:
                c |= 1 << k
        shift[u] = c
    space = HvmStateSpace(scheme, basis, pivots, point_mask, shift, np.zeros(0), np.zeros(0))
    # translation closure: sigma_u must itself be consistent
    if not np.array_equal(space.sign_bits(shift), symp.astype(np.uint8)):
        raise AssertionError("translation action leaves the assignment space")
    orbit_of = np.full(1 << d, -1, dtype=np.int64)
    reps = []
    for c in range(1 << d):
        if orbit_of[c] >= 0:
            continue
        members = c ^ shift
        bits = space.sign_bits(members)
        # lexicographically smallest sign vector; np.lexsort uses the last key as primary
        first = int(np.lexsort(bits[:, ::-1].T)[0])
        orbit_of[members] = len(reps)
        reps.append(int(members[first]))
    space.orbit_of = orbit_of
    space.orbit_reps = np.array(reps, dtype=np.int64)
    return space


# --------------------------------------------------------------------------
# Distributions


def expectations(space: HvmStateSpace, q: np.ndarray) -> np.ndarray:
    """``sum_nu q(nu) lambda_nu(a)`` for every point ``a``."""
    return space.values().T.astype(float) @ np.asarray(q, dtype=float)


def q_from_wigner(space: HvmStateSpace, W: WignerMap, orbit: int | None = None) -> np.ndarray:
    """Place a non-negative Wigner map on one orbit: ``q(tau + u) = W(u)``."""
    if not W.is_nonnegative():
        raise ValidationError("Wigner map has negative entries")
    orbit = space.special_orbit() if orbit is None else orbit
    q = np.zeros(space.size)
    q[space.orbit_members(orbit)] = np.clip(W.values, 0, None)
    return q


def hvm_update(space: HvmStateSpace, q: np.ndarray, a: PhasePoint, s: int,
               prob_tol: float = 1e-14) -> tuple[float, np.ndarray]:
    """Outcome probability of ``(-1)**s`` for ``T_a`` and the updated distribution."""
    if a.index not in space.scheme.V_O_indices:
        raise SchemeViolationError(f"{a.label()} is not directly measurable")
    nu = np.arange(space.size, dtype=np.int64)
    match = (np.bitwise_count(nu & space.point_mask[a.index]) & 1) == (s & 1)
    p = float(q[match].sum())
    if p <= prob_tol:
        raise ImpossibleOutcomeError(f"outcome {s} of {a.label()} has probability {p:.3g}")
    mixed = 0.5 * (q + q[space.translate(nu, a)])
    return p, np.where(match, mixed, 0.0) / p


def joint_distribution(space: HvmStateSpace, q: np.ndarray, points) -> dict[tuple[int, ...], float]:
    """Probability of each sign-bit pattern on ``points`` under ``q``."""
    bits = space.sign_bits()[:, [p.index for p in points]]
    out: dict[tuple[int, ...], float] = {}
    for row, w in zip(map(tuple, bits), q):
        if w:
            out[row] = out.get(row, 0.0) + float(w)
    return out


# --------------------------------------------------------------------------
# Orbit decomposition


@dataclass(frozen=True, eq=False)
class OrbitState:
    orbit: int
    representative: int
    weight: float
    gamma: PhaseConvention
    wigner: WignerMap

    def operator(self) -> np.ndarray:
        return operator_from_wigner(self.gamma, self.wigner)


def ensemble_decompose(space: HvmStateSpace, q: np.ndarray, tol: float = 0.0) -> list[OrbitState]:
    """Split ``q`` into orbit weights and per-orbit non-negative Wigner maps."""
    q = np.asarray(q, dtype=float)
    out = []
    for o, tau in enumerate(space.orbit_reps):
        vals = q[tau ^ space.shift]
        p = float(vals.sum())
        if p <= tol:
            continue
        out.append(OrbitState(o, int(tau), p, space.rephased_gamma(o), WignerMap(space.n, vals / p)))
    return out


def rephased_O(space: HvmStateSpace, orbit: int) -> frozenset:
    return frozenset(int(v) for v in build_O(space.rephased_gamma(orbit)))


# --------------------------------------------------------------------------
# Contextuality decision


@dataclass
class Certificate:
    """Linear witness over point indices: ``max_nu sum w lambda_nu < sum w <T>``."""

    weights: dict[int, Fraction]
    hvm_bound: Fraction
    quantum_value: float

    @property
    def gap(self) -> float:
        return self.quantum_value - float(self.hvm_bound)


@dataclass
class ContextualityResult:
    feasible: bool
    q: np.ndarray | None = None
    residual: float = float("nan")
    verified_exact: bool = False
    certificate: Certificate | None = None
    lp_status: str = ""

    def support(self) -> dict[int, float]:
        if self.q is None:
            return {}
        return {int(i): float(self.q[i]) for i in np.flatnonzero(self.q > 0)}


def state_expectations(space: HvmStateSpace, rho: np.ndarray) -> np.ndarray:
    e = pauli_coefficients(space.scheme.gamma, rho)
    if np.max(np.abs(e.imag)) > 1e-9:
        raise ValidationError("operator is not Hermitian")
    return e.real


def decide_contextuality(space: HvmStateSpace, rho: np.ndarray | None = None, *,
                         expect: np.ndarray | None = None, tol: float = LP_TOL) -> ContextualityResult:
    """Find ``q >= 0`` reproducing every inferable expectation, or a separating witness."""
    e = state_expectations(space, rho) if expect is None else np.asarray(expect, dtype=float)
    rows = np.array(sorted(space.scheme.V_M_indices), dtype=np.int64)
    L = space.values()[:, rows].T.astype(float)  # [rows, |S|]
    b = e[rows]
    R, m = L.shape
    c = np.concatenate([np.zeros(m), np.ones(2 * R)])
    A = np.hstack([L, np.eye(R), -np.eye(R)])
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise SolverError(f"feasibility LP failed: {res.message}")
    if res.fun <= 1e-7:
        q = _polish(L, b, res.x[:m])
        resid = float(np.max(np.abs(L @ q - b)))
        if resid <= tol and q.min() >= 0:
            ok, exact_resid = _exact_verify(L, b, q, tol)
            return ContextualityResult(True, q, resid, ok, None, res.message)
    cert = _witness(L, b, rows)
    if cert is None or cert.gap <= tol:
        raise SolverError(f"undecided: slack {res.fun:.3g} but no separating witness")
    return ContextualityResult(False, None, float(res.fun), False, cert, res.message)


def _polish(L: np.ndarray, b: np.ndarray, q: np.ndarray) -> np.ndarray:
    supp = np.flatnonzero(q > 1e-12)
    out = np.zeros_like(q)
    if supp.size == 0:
        return out
    sol, *_ = np.linalg.lstsq(L[:, supp], b, rcond=None)
    if sol.min() < -1e-12:
        out[supp] = np.clip(q[supp], 0, None)
        return out
    out[supp] = np.clip(sol, 0, None)
    return out


def _exact_verify(L: np.ndarray, b: np.ndarray, q: np.ndarray, tol: float) -> tuple[bool, float]:
    """Re-solve on the support basis in rational arithmetic and re-check every row."""
    supp = [int(i) for i in np.flatnonzero(q > 0)]
    if len(supp) > 80:
        return False, float("nan")
    # independent columns of the support, then independent rows of those columns
    cols = _independent([L[:, j] for j in supp])
    cols = [supp[j] for j in cols]
    sub = L[:, cols]
    rws = _independent(list(sub))
    A = [[Fraction(int(sub[i, j])) for j in range(len(cols))] for i in rws]
    rhs = [Fraction(float(b[i])) for i in rws]
    x = _solve_fraction(A, rhs)
    if x is None or any(v < 0 for v in x):
        return False, float("nan")
    worst = Fraction(0)
    for i in range(L.shape[0]):
        r = sum((Fraction(int(L[i, cols[j]])) * x[j] for j in range(len(cols))), Fraction(0)) - Fraction(float(b[i]))
        worst = max(worst, abs(r))
    return float(worst) <= tol, float(worst)


def _independent(vectors) -> list[int]:
    keep = []
    mat = np.zeros((0, len(vectors[0]))) if vectors else None
    for i, v in enumerate(vectors):
        trial = np.vstack([mat, v])
        if np.linalg.matrix_rank(trial) > mat.shape[0]:
            mat = trial
            keep.append(i)
    return keep


def _solve_fraction(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    n = len(A)
    if n == 0:
        return []
    M = [row[:] + [bi] for row, bi in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _witness(L: np.ndarray, b: np.ndarray, rows: np.ndarray) -> Certificate | None:
    """Maximize ``w.b - max_nu w.L[:, nu]`` subject to ``|w|_1 <= 1`` (identity row excluded)."""
    keep = rows != 0
    Lr, br, pts = L[keep], b[keep], rows[keep]
    R, m = Lr.shape
    # variables: w+ (R), w- (R), t
    c = np.concatenate([-br, br, [1.0]])
    A_ub = np.vstack([
        np.hstack([Lr.T, -Lr.T, -np.ones((m, 1))]),
        np.concatenate([np.ones(2 * R), [0.0]])[None, :],
    ])
    b_ub = np.concatenate([np.zeros(m), [1.0]])
    bounds = [(0, None)] * (2 * R) + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs-ds")
    if res.status != 0:
        raise SolverError(f"witness LP failed: {res.message}")
    w = res.x[:R] - res.x[R:2 * R]
    scale = np.max(np.abs(w))
    if scale <= 0:
        return None
    w = w / scale
    for denom in (1, 2, 4, 8, 16, 64, 256, 1024):
        wf = [Fraction(float(v)).limit_denominator(denom) for v in w]
        cert = _make_certificate(Lr, br, pts, wf)
        if cert.gap > LP_TOL:
            return cert
    return _make_certificate(Lr, br, pts, [Fraction(float(v)) for v in w])


def _make_certificate(Lr, br, pts, wf) -> Certificate:
    nz = [i for i, v in enumerate(wf) if v != 0]
    Li = Lr[nz].astype(int)
    vals = [sum((wf[i] * int(Li[k, j]) for k, i in enumerate(nz)), Fraction(0)) for j in range(Lr.shape[1])]
    bound = max(vals) if vals else Fraction(0)
    qv = float(sum(float(wf[i]) * br[i] for i in nz))
    return Certificate({int(pts[i]): wf[i] for i in nz}, bound, qv)
