"""The gamma0 scheme at work: cluster magic states, a small MBQC demo and the Mermin-star witness.

Under gamma0 every local Pauli is measurable and every local Clifford is
free.  The magic resource is a graph state in which the sites in ``R`` are
stabilized by ``A_a prod_b Z_b^Gamma_ab`` with ``A = (X + Y)/sqrt(2)``
instead of ``X_a prod_b Z_b^Gamma_ab``.  Equivalently it is the graph state
with ``exp(-i pi/8 Z)`` applied on each site of ``R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, SchemeViolationError, ValidationError
from .hvm import HvmStateSpace
from .pauli import PhaseConvention, PhasePoint, _check_dense
from .scheme import build_scheme, is_directly_measurable
from .simulate import Circuit, Measure, _pattern, exact_distribution, run_hvm_sampler, run_oracle, run_wigner_sampler
from .states import label_matrix

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0, -1.0]).astype(complex)
A_OP = (_X + _Y) / np.sqrt(2)
T_ROT = np.diag([np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)])  # Bloch rotation by pi/4 about Z; maps X to A
PAULIS = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}


def gamma0(n: int) -> PhaseConvention:
    return PhaseConvention.gamma0(n)


# -- clusters ----------------------------------------------------------------


@dataclass(frozen=True)
class ClusterSpec:
    """Graph on vertices ``0..n-1`` with A-type sites ``R``."""

    n: int
    edges: tuple[tuple[int, int], ...]
    R: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("a cluster needs at least one vertex")
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ValidationError(f"self loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) leaves the vertex set")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        object.__setattr__(self, "R", frozenset(int(r) for r in self.R))
        if any(not 0 <= r < self.n for r in self.R):
            raise ValidationError("R must be a subset of the vertices")

    @classmethod
    def chain(cls, n: int, R: Iterable[int] = ()) -> "ClusterSpec":
        return cls(n, tuple((k, k + 1) for k in range(n - 1)), frozenset(R))

    @classmethod
    def cycle(cls, order: Sequence[int], R: Iterable[int] = ()) -> "ClusterSpec":
        k = len(order)
        return cls(k, tuple((order[i], order[(i + 1) % k]) for i in range(k)), frozenset(R))

    @classmethod
    def from_adjacency(cls, G: np.ndarray, R: Iterable[int] = ()) -> "ClusterSpec":
        G = np.asarray(G)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValidationError("adjacency must be square")
        if not np.array_equal(G, G.T) or np.any(np.diag(G)):
            raise ValidationError("adjacency must be symmetric with zero diagonal")
        n = G.shape[0]
        return cls(n, tuple((u, v) for u in range(n) for v in range(u + 1, n) if G[u, v]), frozenset(R))

    @classmethod
    def from_text(cls, text: str) -> "ClusterSpec":
        """Edge list, one ``u v`` pair per line (1-based), plus an optional ``R: a b ...`` line."""
        edges, R, top = [], [], 0
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.upper().startswith("R:"):
                R.extend(int(t) for t in line[2:].replace(",", " ").split())
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"bad edge line {raw!r}")
            u, v = (int(t) for t in parts)
            if u < 1 or v < 1:
                raise ValidationError("vertices are numbered from 1")
            edges.append((u - 1, v - 1))
            top = max(top, u, v)
        top = max([top] + R)
        return cls(top, tuple(edges), frozenset(r - 1 for r in R))

    def to_text(self) -> str:
        lines = [f"{u + 1} {v + 1}" for u, v in self.edges]
        if self.R:
            lines.append("R: " + " ".join(str(r + 1) for r in sorted(self.R)))
        return "\n".join(lines) + "\n"

    def adjacency(self) -> np.ndarray:
        G = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.edges:
            G[u, v] = G[v, u] = 1
        return G

    def neighbors(self, a: int) -> list[int]:
        return [int(b) for b in np.flatnonzero(self.adjacency()[a])]

    def is_sparse(self) -> bool:
        """No two A-sites adjacent and none of degree one or less."""
        G = self.adjacency()
        return all(G[r].sum() > 1 and not any(G[r, s] for s in self.R) for r in self.R)


def _site_op(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for k in range(n):
        m = np.kron(m, ops.get(k, _I))
    return m


def cluster_stabilizers(spec: ClusterSpec) -> list[np.ndarray]:
    """``K_a`` for every vertex: X- or A-type on ``a``, Z on its neighbours."""
    _check_dense(spec.n)
    out = []
    for a in range(spec.n):
        ops = {b: _Z for b in spec.neighbors(a)}
        ops[a] = A_OP if a in spec.R else _X
        out.append(_site_op(spec.n, ops))
    return out


def build_cluster_magic_state(spec: ClusterSpec, check_tol: float = 1e-10) -> np.ndarray:
    """Unique joint +1 eigenstate of all cluster stabilizers, as a density matrix."""
    n = spec.n
    _check_dense(n)
    dim = 1 << n
    rho = np.eye(dim, dtype=complex) / dim
    Ks = cluster_stabilizers(spec)
    for K in Ks:
        P = (np.eye(dim) + K) / 2
        rho = P @ rho @ P
    tr = np.trace(rho).real
    # the joint +1 space is one dimensional iff the trace left is 2**-n
    if abs(tr * dim - 1) > 1e-9:
        raise ValidationError("stabilizers do not fix a unique state")
    rho /= tr
    for K in Ks:
        if np.max(np.abs(K @ rho - rho)) > check_tol:
            raise AssertionError("eigenvalue equation violated")
    return rho


def stabilizer_residuals(spec: ClusterSpec, rho: np.ndarray) -> list[float]:
    """``max |K_a rho - rho|`` per vertex."""
    return [float(np.max(np.abs(K @ rho - rho))) for K in cluster_stabilizers(spec)]


# -- MBQC demo ---------------------------------------------------------------

# hexagon 1-2-3-6-5-4-1 (1-based), A-site at 2, reference vertex 1, output vertex 6
HEXAGON = ClusterSpec.cycle([0, 1, 2, 5, 4, 3], R=[1])
REFERENCE, OUTPUT = 0, 5


def _obs(n: int, site: int, letter: str) -> str:
    return "+" + "".join(letter if k == site else "I" for k in range(n))


def mbqc_pattern(pattern: str, n: int = 6) -> Circuit:
    """Measurement pattern on the hexagon.

    ``a``: cut the path through the A-site with Z on vertices 2 and 3 and
    route through 4, 5 with X.  ``b``: cut 4, 5 with Z and route through the
    A-site; vertex 2 is measured in X or Y depending on the Z outcome of
    vertex 4, which fixes the sense of the rotation.  ``z``: every vertex
    between reference and output measured in Z.
    """
    if n != 6:
        raise DimensionError("the built-in patterns live on the six-vertex hexagon")
    if pattern == "a":
        steps = [Measure.always(_obs(n, 1, "Z")), Measure.always(_obs(n, 2, "Z")),
                 Measure.always(_obs(n, 3, "X")), Measure.always(_obs(n, 4, "X"))]
    elif pattern == "b":
        steps = [Measure.always(_obs(n, 3, "Z")), Measure.always(_obs(n, 4, "Z")),
                 Measure.xor(_obs(n, 1, "Y"), [0], _obs(n, 1, "X")), Measure.always(_obs(n, 2, "X"))]
    elif pattern == "z":
        steps = [Measure.always(_obs(n, k, "Z")) for k in (1, 2, 3, 4)]
    else:
        raise ValidationError(f"unknown pattern {pattern!r} (expected a, b or z)")
    return Circuit(n, steps)


def _edge_state() -> np.ndarray:
    psi = np.full(4, 0.5, dtype=complex)
    psi[3] = -0.5
    return psi


def _branches(rho: np.ndarray, circuit: Circuit):
    """Yield ``(bits, probability, post-measurement state)`` for each possible branch."""
    n = circuit.n
    dim = 1 << n
    stack = [([], 1.0, rho)]
    while stack:
        bits, p, r = stack.pop()
        t = len(bits)
        if t == len(circuit.steps):
            yield bits, p, r
            continue
        st = circuit.steps[t]
        M = label_matrix(st.table[_pattern(bits, st.control)])
        for s in (1, 0):
            P = (np.eye(dim) + (-1) ** s * M) / 2
            post = P @ r @ P
            ps = float(np.trace(post).real)
            if ps > 1e-14:
                stack.append((bits + [s], p * ps, post / ps))


def _reduce(rho: np.ndarray, n: int, keep: Sequence[int]) -> np.ndarray:
    t = rho.reshape([2] * (2 * n))
    drop = [q for q in range(n) if q not in keep]
    for q in sorted(drop, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + m)
    d = 1 << len(keep)
    return t.reshape(d, d)


def mbqc_demo(pattern: str = "b", spec: ClusterSpec = HEXAGON, target: np.ndarray | None = None) -> dict:
    """Run a measurement pattern on the cluster magic state with the dense oracle.

    The unmeasured reference and output vertices hold ``(I x V)|E>`` with
    ``|E>`` the two-vertex edge state; ``V`` is the logical map.  Each branch
    is scored by the best Pauli byproduct ``P``: ``max_P <E|(I x PU)^dag
    rho (I x PU)|E>``, which is the process fidelity of ``U`` after the
    byproduct is undone.
    """
    circuit = mbqc_pattern(pattern, spec.n)
    g = gamma0(spec.n)
    for st in circuit.steps:
        for obs in st.table:
            if not is_directly_measurable(g, PhasePoint.from_label(obs[1:])):
                raise SchemeViolationError(f"{obs} is not measurable under gamma0")
    if target is None:
        target = {"a": _I, "b": T_ROT, "z": _I}[pattern]
    rho = build_cluster_magic_state(spec)
    E = _edge_state()
    branches = []
    for bits, p, post in _branches(rho, circuit):
        res = _reduce(post, spec.n, [REFERENCE, OUTPUT])
        scores = {}
        for name, P in PAULIS.items():
            v = np.kron(_I, P @ target) @ E
            scores[name] = float(np.vdot(v, res @ v).real)
        best = max(scores, key=scores.get)
        ref = _reduce(res.reshape(4, 4), 2, [0])
        branches.append({
            "outcomes": "".join(map(str, bits)),
            "probability": p,
            "byproduct": best,
            "fidelity": scores[best],
            "connected": bool(np.trace(ref @ ref).real < 0.75),
        })
    branches.sort(key=lambda b: b["outcomes"])
    return {
        "pattern": pattern,
        "observables": [list(st.table) for st in circuit.steps],
        "target": np.round(target, 12).tolist(),
        "branches": branches,
        "min_fidelity": min(b["fidelity"] for b in branches),
        "total_probability": sum(b["probability"] for b in branches),
        "connected": all(b["connected"] for b in branches),
    }


# -- Mermin star -------------------------------------------------------------

MERMIN_CONTEXTS = (("XXX", 1), ("XYY", -1), ("YXY", -1), ("YYX", -1))
HVM_BOUND = 2
QUANTUM_VALUE = 4


@dataclass
class WitnessReport:
    engine: str
    contexts: dict[str, float]
    value: float
    std_error: float
    hvm_bound: int = HVM_BOUND
    quantum_value: int = QUANTUM_VALUE

    def to_json(self) -> dict:
        return {"engine": self.engine, "contexts": self.contexts, "value": self.value,
                "std_error": self.std_error, "hvm_bound": self.hvm_bound, "quantum_value": self.quantum_value}


def context_circuit(label: str) -> Circuit:
    """Measure each qubit's letter in turn; the product of the outcomes is the context value."""
    n = len(label)
    return Circuit(n, [Measure.always(_obs(n, k, L)) for k, L in enumerate(label)])


def _parity_mean(dist: dict[str, float]) -> float:
    return sum(p * (-1) ** k.count("1") for k, p in dist.items())


def mermin_witness(engine: str = "oracle", state=None, *, space: HvmStateSpace | None = None,
                   q: np.ndarray | None = None, shots: int = 100_000, seed: int = 0) -> WitnessReport:
    """Estimate ``<XXX> - <XYY> - <YXY> - <YYX>`` by local measurements.

    ``oracle`` with ``shots=0`` gives exact values; ``wigner`` needs a
    non-negative input; ``hvm`` needs ``space`` and ``q``.
    """
    contexts, var = {}, 0.0
    for k, (label, w) in enumerate(MERMIN_CONTEXTS):
        c = context_circuit(label)
        if engine == "oracle":
            if state is None:
                raise ValidationError("the oracle engine needs a state")
            if shots == 0:
                contexts[label] = _parity_mean(exact_distribution(c, state))
                continue
            rec = run_oracle(c, state, shots, seed + k)
        elif engine == "wigner":
            rec = run_wigner_sampler(build_scheme(gamma0(3)), c, state, shots, seed + k)
        elif engine == "hvm":
            if space is None or q is None:
                raise ValidationError("the hvm engine needs a state space and a distribution q")
            rec = run_hvm_sampler(space, q, c, shots, seed + k)
        else:
            raise ValidationError(f"unknown engine {engine!r}")
        m = _parity_mean(rec.distribution())
        contexts[label] = m
        var += (1 - m * m) / shots
    value = sum(w * contexts[label] for label, w in MERMIN_CONTEXTS)
    return WitnessReport(engine, contexts, float(value), float(np.sqrt(var)))
