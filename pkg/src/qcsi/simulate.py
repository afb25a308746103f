"""Adaptive Pauli-measurement circuits, unitary elimination and three engines.

Circuits are convention independent: measured observables are signed literal
Pauli strings (``"+ZII"``, ``"-XY"``) and gates are Clifford tableaux.  A step
may depend on earlier outcomes through a control tuple; its variants are
stored in a table indexed by the control bits (bit ``j`` of the index is the
outcome at ``control[j]``).  The JSON form ``{"if": [...], "else_...": ...}``
is the XOR special case: the primary variant runs when the parity of the
listed outcomes is 1.

Engines:

* ``run_oracle``: dense Born-rule branching, exact distribution included.
* ``run_wigner_sampler``: sample a phase point from a non-negative Wigner
  map, read outcomes off ``[a, v]``, move ``v -> v + a`` on a fair coin.
* ``run_hvm_sampler``: the same with a value assignment ``nu`` drawn from an
  ncHVM distribution ``q``.

Randomness: shots are processed in fixed blocks of ``BLOCK`` shots, block
``b`` drawing from ``Philox(SeedSequence([seed, b]))``.  Results do not
depend on how blocks are scheduled.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, DimensionError, SchemeViolationError, ValidationError
from .hvm import HvmStateSpace
from .pauli import (
    CliffordGate,
    PhaseConvention,
    PhasePoint,
    _check_dense,
    conjugate,
    dense_unitary,
    format_pauli,
    parse_pauli,
)
from .scheme import Scheme, is_free_gate
from .states import check_hermitian, label_matrix
from .wigner import WignerMap, wigner_of

BLOCK = 4096
MAX_CONTROLS = 16
PROB_TOL = 1e-14


# -- circuits ----------------------------------------------------------------


def _pauli_text(text: str) -> str:
    s = text.strip()
    sign = "-" if s.startswith("-") else "+"
    body = s.lstrip("+-").upper()
    PhasePoint.from_label(body)  # validates letters
    return sign + body


def _xor_table(primary, alternative, k: int) -> tuple:
    return tuple(primary if bin(i).count("1") & 1 else alternative for i in range(1 << k))


@dataclass(frozen=True)
class Gate:
    """Clifford step; ``table[i]`` is the gate for control pattern ``i`` (``None`` = identity)."""

    table: tuple
    control: tuple[int, ...] = ()

    @classmethod
    def always(cls, g: CliffordGate) -> "Gate":
        return cls((g,))

    @classmethod
    def xor(cls, g: CliffordGate, control: Sequence[int], else_gate: CliffordGate | None = None) -> "Gate":
        control = tuple(control)
        if not control:
            return cls.always(g)
        return cls(_xor_table(g, else_gate, len(control)), control)


@dataclass(frozen=True)
class Measure:
    """Pauli measurement; ``table[i]`` is the signed literal string for control pattern ``i``."""

    table: tuple[str, ...]
    control: tuple[int, ...] = ()

    @classmethod
    def always(cls, observable: str) -> "Measure":
        return cls((_pauli_text(observable),))

    @classmethod
    def xor(cls, observable: str, control: Sequence[int], else_observable: str | None = None) -> "Measure":
        control = tuple(control)
        if not control:
            return cls.always(observable)
        if else_observable is None:
            raise ValidationError("a controlled measurement needs an alternative observable")
        return cls(_xor_table(_pauli_text(observable), _pauli_text(else_observable), len(control)), control)


def _pattern(bits: Sequence[int], control: Sequence[int]) -> int:
    return sum(int(bits[c]) << j for j, c in enumerate(control))


@dataclass(frozen=True)
class Circuit:
    n: int
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        seen = 0
        for st in self.steps:
            if len(st.table) != 1 << len(st.control):
                raise ValidationError("step table size does not match its control tuple")
            if len(st.control) > MAX_CONTROLS:
                raise CapacityError(f"more than {MAX_CONTROLS} control bits on one step")
            if any(c < 0 or c >= seen for c in st.control):
                raise ValidationError(f"control {st.control} refers to an outcome not yet produced")
            if isinstance(st, Measure):
                for obs in st.table:
                    if len(obs) - 1 != self.n:
                        raise DimensionError(f"{obs!r} does not act on {self.n} qubits")
                seen += 1
            elif isinstance(st, Gate):
                for g in st.table:
                    if g is not None and g.n != self.n:
                        raise DimensionError("gate acts on the wrong number of qubits")
            else:
                raise ValidationError(f"unknown step {st!r}")

    @property
    def measurement_count(self) -> int:
        return sum(isinstance(s, Measure) for s in self.steps)

    @property
    def gate_free(self) -> bool:
        return all(isinstance(s, Measure) for s in self.steps)


# -- preprocessing -----------------------------------------------------------


def _merge_controls(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(set(a) | set(b)))


def _reindex(i: int, full: tuple, sub: tuple) -> int:
    """Pattern index over ``sub`` taken from pattern ``i`` over ``full``."""
    pos = {c: j for j, c in enumerate(full)}
    return sum(((i >> pos[c]) & 1) << j for j, c in enumerate(sub))


def _prune(table: list, control: tuple) -> tuple[tuple, tuple]:
    """Drop control bits the table does not depend on."""
    for c in list(control):
        j = control.index(c)
        if all(table[i] == table[i ^ (1 << j)] for i in range(len(table))):
            keep = [i for i in range(len(table)) if not i >> j & 1]
            table = [table[i] for i in keep]
            control = control[:j] + control[j + 1:]
    return tuple(table), control


def check_circuit(scheme: Scheme, circuit: Circuit) -> None:
    """Every gate free and every measured point in the scheme's measurable set."""
    if circuit.n != scheme.n:
        raise DimensionError("circuit and scheme disagree on n")
    for st in circuit.steps:
        if isinstance(st, Gate):
            for g in st.table:
                if g is not None and not is_free_gate(scheme, g):
                    raise SchemeViolationError(f"gate {g.name or g.key()} does not preserve the measurable set")
        else:
            for obs in st.table:
                if not scheme.in_O(PhasePoint.from_label(obs[1:])):
                    raise SchemeViolationError(f"{obs} is not directly measurable in this scheme")


def preprocess(scheme: Scheme, circuit: Circuit) -> Circuit:
    """Eliminate gates: measure ``G^dag O G`` on the input, ``G`` the gates applied so far."""
    check_circuit(scheme, circuit)
    n = circuit.n
    g0 = PhaseConvention.gamma0(n)
    frame_ctrl: tuple = ()
    frame = [CliffordGate.identity(n)]
    out = []
    for st in circuit.steps:
        ctrl = _merge_controls(frame_ctrl, st.control)
        if len(ctrl) > MAX_CONTROLS:
            raise CapacityError("adaptive frame depends on too many outcomes")
        if isinstance(st, Gate):
            table = []
            for i in range(1 << len(ctrl)):
                G = frame[_reindex(i, ctrl, frame_ctrl)]
                g = st.table[_reindex(i, ctrl, st.control)]
                table.append(G if g is None else G.then(g))
            frame, frame_ctrl = list(table), ctrl
            continue
        table = []
        for i in range(1 << len(ctrl)):
            G = frame[_reindex(i, ctrl, frame_ctrl)]
            obs = st.table[_reindex(i, ctrl, st.control)]
            p = conjugate(g0, G, parse_pauli(obs, g0))
            if not scheme.in_O(p.point):
                raise AssertionError(f"free gate moved {obs} outside the measurable set")
            table.append(format_pauli(p, g0))
        table, ctrl = _prune(table, ctrl)
        out.append(Measure(table, ctrl))
    return Circuit(n, out)


# -- exact oracle ------------------------------------------------------------


def _input_matrix(n: int, state) -> np.ndarray:
    if isinstance(state, WignerMap):
        raise ValidationError("the oracle needs a dense input state")
    rho = check_hermitian(state)
    if rho.shape[0] != 1 << n:
        raise DimensionError("input state does not match the circuit size")
    return rho


def exact_distribution(circuit: Circuit, state: np.ndarray, prune: float = PROB_TOL) -> dict[str, float]:
    """Born-rule probability of every outcome string, by branching on dense matrices."""
    n = circuit.n
    _check_dense(n)
    rho = _input_matrix(n, state)
    dim = 1 << n
    unitaries: dict[int, np.ndarray] = {}
    projectors: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def unitary(g):
        if id(g) not in unitaries:
            unitaries[id(g)] = dense_unitary(g)
        return unitaries[id(g)]

    def proj(obs):
        if obs not in projectors:
            M = label_matrix(obs)
            projectors[obs] = ((np.eye(dim) + M) / 2, (np.eye(dim) - M) / 2)
        return projectors[obs]

    result: dict[str, float] = {}

    def walk(k, rho, bits, p):
        if k == len(circuit.steps):
            key = "".join(map(str, bits))
            result[key] = result.get(key, 0.0) + p
            return
        st = circuit.steps[k]
        choice = st.table[_pattern(bits, st.control)]
        if isinstance(st, Gate):
            if choice is not None:
                U = unitary(choice)
                rho = U @ rho @ U.conj().T
            walk(k + 1, rho, bits, p)
            return
        for s, P in enumerate(proj(choice)):
            post = P @ rho @ P
            ps = float(np.trace(post).real)
            if ps > prune:
                walk(k + 1, post / ps, bits + [s], p * ps)

    walk(0, rho, [], 1.0)
    return dict(sorted(result.items()))


# -- records -----------------------------------------------------------------


@dataclass
class OutcomeRecord:
    engine: str
    shots: int
    seed: int
    counts: dict[str, int]
    samples: np.ndarray | None = field(default=None, repr=False)
    exact: dict[str, float] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValidationError("histogram total differs from shot count")

    def distribution(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def to_json(self) -> dict:
        d = {"engine": self.engine, "seed": self.seed, "shots": self.shots, "counts": dict(self.counts)}
        d.update(self.meta)
        return d


def _histogram(samples: np.ndarray) -> dict[str, int]:
    shots, m = samples.shape
    if m == 0:
        return {"": shots}
    keys, counts = np.unique(samples, axis=0, return_counts=True)
    return {"".join(map(str, k)): int(c) for k, c in zip(keys, counts)}


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), block])))


def run_oracle(circuit: Circuit, state: np.ndarray, shots: int, seed: int = 0) -> OutcomeRecord:
    """Sample outcome strings from the exact distribution."""
    exact = exact_distribution(circuit, state)
    keys = list(exact)
    p = np.array([exact[k] for k in keys])
    p = p / p.sum()
    counts = np.zeros(len(keys), dtype=np.int64)
    for b, start in enumerate(range(0, shots, BLOCK)):
        counts += _block_rng(seed, b).multinomial(min(BLOCK, shots - start), p)
    hist = {k: int(c) for k, c in zip(keys, counts) if c}
    return OutcomeRecord("oracle", shots, seed, hist, exact=exact)


# -- sampling engines --------------------------------------------------------


@dataclass(frozen=True)
class _Model:
    """Per-point outcome mask and move vector for one engine.

    The outcome of measuring ``T_a`` on state ``x`` is ``parity(x & mask[a])``
    and the coin moves ``x -> x ^ move[a]``.
    """

    gamma: PhaseConvention
    mask: np.ndarray
    move: np.ndarray
    states: np.ndarray
    weights: np.ndarray


def _swap_halves(n: int) -> np.ndarray:
    idx = np.arange(1 << 2 * n, dtype=np.int64)
    low = (1 << n) - 1
    return ((idx & low) << n) | (idx >> n)


def wigner_model(gamma: PhaseConvention, W: WignerMap, tol: float = 1e-12) -> _Model:
    if W.n != gamma.n:
        raise DimensionError("Wigner map and convention disagree on n")
    if W.min() < -tol:
        raise ValidationError(f"input Wigner map is negative (min {W.min():.3g}); it cannot be sampled")
    N = 1 << 2 * gamma.n
    idx = np.arange(N, dtype=np.int64)
    return _Model(gamma, _swap_halves(gamma.n), idx, idx, np.clip(W.values, 0, None))


def hvm_model(space: HvmStateSpace, q: np.ndarray, tol: float = 1e-9) -> _Model:
    q = np.asarray(q, dtype=float)
    if q.shape != (space.size,):
        raise DimensionError(f"q must have {space.size} entries")
    if q.min() < -tol or abs(q.sum() - 1) > 1e-6:
        raise ValidationError("q is not a probability distribution")
    return _Model(space.scheme.gamma, np.asarray(space.point_mask, dtype=np.int64),
                  np.asarray(space.shift, dtype=np.int64), np.arange(space.size, dtype=np.int64),
                  np.clip(q, 0, None))


@dataclass(frozen=True)
class _Compiled:
    control: tuple
    mask: np.ndarray
    move: np.ndarray
    sign: np.ndarray


def _compile(model: _Model, circuit: Circuit) -> list[_Compiled]:
    if not circuit.gate_free:
        raise ValidationError("samplers run preprocessed (gate-free) circuits")
    out = []
    for st in circuit.steps:
        pts, signs = [], []
        for obs in st.table:
            p = parse_pauli(obs, model.gamma)
            if not p.is_hermitian():
                raise ValidationError(f"{obs} is not Hermitian")
            pts.append(p.point.index)
            signs.append(p.sign_bit)
        pts = np.array(pts)
        out.append(_Compiled(st.control, model.mask[pts], model.move[pts], np.array(signs, dtype=np.uint8)))
    return out


def _outcome(x: np.ndarray, mask) -> np.ndarray:
    return (np.bitwise_count(x & mask) & 1).astype(np.uint8)


def _sample(model: _Model, prog: list[_Compiled], shots: int, seed: int, coins: str) -> np.ndarray:
    if coins not in ("live", "predrawn"):
        raise ValidationError("coins must be 'live' or 'predrawn'")
    if shots < 1:
        raise ValidationError("shots must be positive")
    m = len(prog)
    out = np.empty((shots, m), dtype=np.uint8)
    cdf = np.cumsum(model.weights)
    cdf /= cdf[-1]
    last = len(cdf) - 1
    for b, start in enumerate(range(0, shots, BLOCK)):
        size = min(BLOCK, shots - start)
        rng = _block_rng(seed, b)
        drawn = rng.integers(0, 2, size=(size, m), dtype=np.uint8) if coins == "predrawn" else None
        pick = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), last)
        x = model.states[pick]
        bits = out[start:start + size]
        for t, st in enumerate(prog):
            i = np.zeros(size, dtype=np.int64)
            for j, c in enumerate(st.control):
                i |= bits[:, c].astype(np.int64) << j
            bits[:, t] = _outcome(x, st.mask[i]) ^ st.sign[i]
            coin = drawn[:, t] if drawn is not None else rng.integers(0, 2, size=size, dtype=np.uint8)
            x = np.where(coin.astype(bool), x ^ st.move[i], x)
    return out


def _prepared(scheme: Scheme, circuit: Circuit) -> Circuit:
    if scheme.frame is not None:
        raise ValidationError("samplers need a Pauli-convention scheme without a unitary frame")
    return preprocess(scheme, circuit)


def run_wigner_sampler(scheme: Scheme, circuit: Circuit, state, shots: int, seed: int = 0,
                       coins: str = "live") -> OutcomeRecord:
    """Sampling from a non-negative Wigner function (dense map built once)."""
    W = state if isinstance(state, WignerMap) else wigner_of(scheme.gamma, _input_matrix(circuit.n, state))
    model = wigner_model(scheme.gamma, W)
    samples = _sample(model, _compile(model, _prepared(scheme, circuit)), shots, seed, coins)
    return OutcomeRecord("wigner", shots, seed, _histogram(samples), samples=samples, meta={"coins": coins})


def run_hvm_sampler(space: HvmStateSpace, q: np.ndarray, circuit: Circuit, shots: int, seed: int = 0,
                    coins: str = "live") -> OutcomeRecord:
    """Sampling from a non-contextual hidden-variable model."""
    model = hvm_model(space, q)
    samples = _sample(model, _compile(model, _prepared(space.scheme, circuit)), shots, seed, coins)
    return OutcomeRecord("hvm", shots, seed, _histogram(samples), samples=samples, meta={"coins": coins})


# -- ensemble-level views of the sampler steps -------------------------------


def ensemble_step(model: _Model, weights: np.ndarray, point: PhasePoint, s: int) -> tuple[float, np.ndarray]:
    """Average the sampler's per-sample step over ``weights``: P(outcome s) and the post-coin weights.

    Uses the same outcome and move primitives as the samplers.
    """
    a = point.index
    keep = _outcome(model.states, model.mask[a]) == (s & 1)
    w = np.where(keep, weights, 0.0)
    p = float(w.sum())
    if p <= PROB_TOL:
        return 0.0, np.zeros_like(weights)
    moved = np.zeros_like(w)
    moved[model.states ^ model.move[a]] = w
    return p, 0.5 * (w + moved) / p


def engine_distribution(model: _Model, circuit: Circuit, prune: float = PROB_TOL) -> dict[str, float]:
    """Exact outcome distribution of a sampler, by branching over ``ensemble_step``."""
    prog = _compile(model, circuit)
    result: dict[str, float] = {}

    def walk(t, w, bits, p):
        if t == len(prog):
            result["".join(map(str, bits))] = result.get("".join(map(str, bits)), 0.0) + p
            return
        st = prog[t]
        i = _pattern(bits, st.control)
        a = PhasePoint.from_index(int(parse_pauli(circuit.steps[t].table[i], model.gamma).point.index), circuit.n)
        for s in (0, 1):
            ps, post = ensemble_step(model, w, a, s ^ int(st.sign[i]))
            if ps > prune:
                walk(t + 1, post, bits + [s], p * ps)

    walk(0, model.weights / model.weights.sum(), [], 1.0)
    return dict(sorted(result.items()))


# -- comparison --------------------------------------------------------------


def _as_distribution(x) -> dict[str, float]:
    if isinstance(x, OutcomeRecord):
        return x.distribution()
    items = dict(x)
    total = float(sum(items.values()))
    if total <= 0:
        raise ValidationError("empty distribution")
    return {k: v / total for k, v in items.items()}


def compare_distributions(a, b) -> dict:
    """Total-variation distance and per-outcome deviations between two records or distributions."""
    pa, pb = _as_distribution(a), _as_distribution(b)
    lengths = {len(k) for k in itertools.chain(pa, pb)}
    if len(lengths) > 1:
        raise ValidationError("outcome alphabets differ")
    keys = sorted(set(pa) | set(pb))
    dev = {k: pa.get(k, 0.0) - pb.get(k, 0.0) for k in keys}
    worst = max(keys, key=lambda k: abs(dev[k])) if keys else None
    return {
        "tv_distance": 0.5 * sum(abs(d) for d in dev.values()),
        "max_deviation": abs(dev[worst]) if keys else 0.0,
        "worst_outcome": worst,
        "only_in_first": [k for k in keys if k not in pb or pb[k] == 0],
        "only_in_second": [k for k in keys if k not in pa or pa[k] == 0],
        "per_outcome": dev,
    }


def two_sample_tv(a: OutcomeRecord, b: OutcomeRecord) -> float:
    return compare_distributions(a, b)["tv_distance"]


# -- random circuits ---------------------------------------------------------

_ONE_QUBIT = ("H", "S", "SDG", "X", "Y", "Z")
_TWO_QUBIT = ("CZ", "CNOT", "SWAP")


def candidate_gates(scheme: Scheme) -> list[CliffordGate]:
    """Named one- and two-qubit gates that are free in ``scheme``."""
    n = scheme.n
    out = []
    for name in _ONE_QUBIT:
        for q in range(n):
            out.append(CliffordGate.named(name, [q], n))
    for name in _TWO_QUBIT:
        for q, r in itertools.permutations(range(n), 2):
            if name != "CNOT" and q > r:
                continue
            out.append(CliffordGate.named(name, [q, r], n))
    return [g for g in out if is_free_gate(scheme, g)]


def random_circuit(scheme: Scheme, depth: int, rng: np.random.Generator, max_measurements: int = 4,
                   adaptive: float = 0.3, gate_fraction: float = 0.5) -> Circuit:
    """Random adaptive circuit of ``depth`` steps using free gates and measurable observables."""
    if depth < 1 or max_measurements < 1:
        raise ValidationError("need at least one step and one measurement")
    gates = candidate_gates(scheme)
    obs = [p.label() for p in scheme.V_O if p]
    if not obs:
        raise ValidationError("scheme has no non-trivial measurable observable")

    def observable():
        return ("-" if rng.random() < 0.5 else "+") + obs[rng.integers(len(obs))]

    def control(m):
        if m == 0 or rng.random() >= adaptive:
            return ()
        k = int(rng.integers(1, min(m, 2) + 1))
        return tuple(sorted(rng.choice(m, size=k, replace=False).tolist()))

    # place measurements so the circuit ends with one
    n_meas = int(min(max_measurements, max(1, rng.integers(1, depth + 1))))
    slots = set(rng.choice(depth - 1, size=n_meas - 1, replace=False).tolist()) if n_meas > 1 else set()
    slots.add(depth - 1)
    steps, m = [], 0
    for k in range(depth):
        if k in slots or not gates:
            c = control(m)
            steps.append(Measure.xor(observable(), c, observable() if c else None))
            m += 1
        else:
            c = control(m)
            g = gates[rng.integers(len(gates))]
            alt = gates[rng.integers(len(gates))] if c and rng.random() < 0.5 else None
            steps.append(Gate.xor(g, c, alt))
    return Circuit(scheme.n, steps)


def named_gate(token: str, n: int) -> CliffordGate:
    """Parse ``"H1"``, ``"SDG3"``, ``"CZ12"``, ``"CNOT21"`` (1-based qubits)."""
    t = token.strip().upper()
    for name in sorted(_ONE_QUBIT + _TWO_QUBIT + ("CX",), key=len, reverse=True):
        if t.startswith(name):
            digits = t[len(name):]
            if not digits.isdigit():
                break
            qubits = [int(d) - 1 for d in digits]
            want = 1 if name in _ONE_QUBIT else 2
            if len(qubits) != want or any(q < 0 or q >= n for q in qubits):
                raise ValidationError(f"bad qubit list in gate {token!r}")
            return CliffordGate.named(name, qubits, n)
    raise ValidationError(f"unknown gate {token!r}")
