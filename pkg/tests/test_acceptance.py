"""Acceptance suite.

Each test records one PASS/FAIL line through the ``criterion`` fixture; the
lines are repeated in a summary section at the end of the pytest run.
"""

import itertools
import json

import numpy as np
import pytest

from qcsi.cli import main
from qcsi.gamma_zero import (
    HEXAGON,
    T_ROT,
    ClusterSpec,
    build_cluster_magic_state,
    gamma0,
    mbqc_demo,
    mermin_witness,
    stabilizer_residuals,
)
from qcsi.hvm import (
    decide_contextuality,
    ensemble_decompose,
    enumerate_assignments,
    expectations,
    hvm_update,
    rephased_O,
    state_expectations,
)
from qcsi.pauli import CliffordGate, PhaseConvention, PhasePoint, dense_matrix, named_matrix
from qcsi.scheme import build_scheme, conjugate_scheme, search_gammas
from qcsi.simulate import (
    compare_distributions,
    exact_distribution,
    preprocess,
    random_circuit,
    run_hvm_sampler,
    run_wigner_sampler,
    two_sample_tv,
)
from qcsi.states import (
    bloch_state,
    enumerate_stabilizer_states,
    ghz,
    label_matrix,
    magic_A,
    maximally_mixed,
    random_density,
    random_hermitian,
)
from qcsi.wigner import (
    distance_to_phase_points,
    find_positivity_breaking,
    measure_update_oracle,
    operator_from_wigner,
    phase_point_operator,
    sum_negativity,
    trace_inner_product,
    wigner_of,
)

from helpers import positive_state, random_gamma, rejection_positive_state

SHOTS = 100_000
TV_LIMIT = 0.02


def cli_json(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def is_local(label):
    return sum(ch != "I" for ch in label.lstrip("+-")) <= 1


def test_criterion_01_gamma0_scheme(criterion, capsys):
    with criterion(1, "gamma0 schemes are the local Paulis", limit=10) as c:
        sizes = []
        for n, size in ((1, 4), (2, 7), (3, 10)):
            code, out, _ = cli_json(capsys, "scheme", "build", "--n", n)
            assert code == 0
            labels = out["V_O"]
            # every local Pauli, identity included, and nothing else
            expected = {"I" * n} | {"I" * k + L + "I" * (n - k - 1) for k in range(n) for L in "XYZ"}
            assert {lab.lstrip("+-") for lab in labels} == expected
            assert all(is_local(lab) for lab in labels) and len(labels) == size
            assert out["P2"] is True
            sizes.append(len(labels))
        c.detail = f"|V_O| = {sizes}, P2 true"
        c.ok = True


def test_criterion_02_no_convention_measures_everything(criterion):
    with criterion(2, "no n=2 convention measures every point", limit=60) as c:
        res = search_gammas(2, "exhaustive")
        assert res["scanned"] == 2**15
        c.detail = f"scanned {res['scanned']}, all-measurable {res['all_points_measurable']}"
        assert res["all_points_measurable"] == 0
        c.ok = True


def test_criterion_03_hadamard_not_covariant(criterion):
    with criterion(3, "H A_0 H^dag is no phase point for any n=1 convention", limit=1) as c:
        H = named_matrix("H")
        dists = []
        # points I, X, Z, Y; only Y has odd parity
        for b in itertools.product((0, 1), repeat=3):
            g = PhaseConvention.from_table([0, 2 * b[0], 2 * b[1], 1 + 2 * b[2]], 1)
            A0 = phase_point_operator(g, PhasePoint.zero(1))
            dists.append(distance_to_phase_points(g, H @ A0 @ H.conj().T))
        c.detail = f"{len(dists)} conventions, min distance {min(dists):.4f}"
        assert len(dists) == 8 and min(dists) > 0.1
        c.ok = True


def test_criterion_04_hadamard_breaks_positivity(criterion, capsys, tmp_path):
    with criterion(4, "H1 breaks positivity yet simulation matches", limit=5) as c:
        g = PhaseConvention.gamma0(2)
        H1 = np.kron(named_matrix("H"), np.eye(2))
        found = find_positivity_breaking(g, H1, enumerate_stabilizer_states(2), threshold=0.05)
        assert found is not None
        rho, W, W2 = found
        neg = sum_negativity(W2)
        assert W.is_nonnegative() and neg > 0.05
        circ = tmp_path / "h1.json"
        circ.write_text(json.dumps({
            "n": 2, "state": {"dense": {"real": rho.real.tolist(), "imag": rho.imag.tolist()}},
            "steps": [{"gate": "H1"}, {"measure": "+ZI"}, {"measure": "+IX"},
                      {"gate": "S1", "if": [0]}, {"measure": "+XI"}]}))
        code, out, _ = cli_json(capsys, "simulate", "compare", "--engine", "wigner", "--circuit", circ,
                                "--shots", SHOTS, "--seed", 0)
        assert code == 0
        c.detail = f"sum_negativity after H1 {neg:.4f}, TV vs oracle {out['tv_vs_oracle']:.4f}"
        assert out["tv_vs_oracle"] <= TV_LIMIT
        c.ok = True


def test_criterion_05_wigner_identities(criterion):
    with criterion(5, "trace and reconstruction identities") as c:
        rng = np.random.default_rng(5)
        trip = recon = 0.0
        for k in range(100):
            n = 1 + k % 3
            g = random_gamma(n, rng)
            rho = random_density(n, rng)
            sig = random_hermitian(n, rng)
            Wr, Ws = wigner_of(g, rho), wigner_of(g, sig)
            trip = max(trip, abs(trace_inner_product(Wr, Ws) - np.trace(rho @ sig).real))
            recon = max(recon, np.max(np.abs(operator_from_wigner(g, Wr) - rho)))
            if n <= 2:
                direct = sum(Wr.values[i] * phase_point_operator(g, PhasePoint.from_index(i, n))
                             for i in range(4**n))
                recon = max(recon, np.max(np.abs(direct - rho)))
        c.detail = f"100 states, trace dev {trip:.1e}, reconstruction dev {recon:.1e}"
        assert trip <= 1e-12 and recon <= 1e-10
        c.ok = True


def _suite(rng, count, state_for, run, max_measurements=4):
    """Random adaptive circuits; returns (worst TV, worst preprocessing deviation)."""
    worst_tv = worst_pre = 0.0
    for k in range(count):
        n = 1 + k % 3
        sch = build_scheme(PhaseConvention.gamma0(n))
        circ = random_circuit(sch, int(rng.integers(1, 11)), rng, max_measurements=max_measurements,
                              adaptive=0.5)
        rho = state_for(n, k)
        exact = exact_distribution(circ, rho)
        pre = exact_distribution(preprocess(sch, circ), rho)
        assert set(pre) == set(exact)
        worst_pre = max(worst_pre, max(abs(pre[o] - exact[o]) for o in exact))
        rec = run(sch, circ, rho, k)
        worst_tv = max(worst_tv, compare_distributions(rec, exact)["tv_distance"])
    return worst_tv, worst_pre


def test_criterion_06_wigner_sampler(criterion):
    with criterion(6, "Wigner sampler matches oracle on random circuits", limit=120) as c:
        rng = np.random.default_rng(6)
        tv, pre = _suite(rng, 20, lambda n, k: positive_state(n, rng),
                         lambda sch, circ, rho, k: run_wigner_sampler(sch, circ, rho, SHOTS, seed=k))
        c.detail = f"20 circuits, max TV {tv:.4f}, preprocessing dev {pre:.1e}"
        assert tv <= TV_LIMIT and pre <= 1e-12
        c.ok = True


def test_criterion_07_hvm_sampler(criterion):
    with criterion(7, "HVM sampler matches oracle; coin modes agree", limit=120) as c:
        rng = np.random.default_rng(7)
        spaces = {n: enumerate_assignments(build_scheme(PhaseConvention.gamma0(n))) for n in (1, 2, 3)}

        def state_for(n, k):
            if k == 0:
                return magic_A()
            if k % 4 == 1:
                # contextuality-free mixtures that are W-negative at n = 1
                return 0.5 * magic_A() + 0.5 * positive_state(1, rng) if n == 1 else positive_state(n, rng)
            return positive_state(n, rng)

        def run(sch, circ, rho, k):
            res = decide_contextuality(spaces[sch.n], rho)
            assert res.feasible
            return run_hvm_sampler(spaces[sch.n], res.q, circ, SHOTS, seed=k)

        tv, pre = _suite(rng, 20, state_for, run)
        coin_tv = 0.0
        for k in range(5):
            n = 1 + k % 3
            sch = build_scheme(PhaseConvention.gamma0(n))
            circ = random_circuit(sch, 6, rng, max_measurements=3, adaptive=0.5)
            rho = magic_A() if n == 1 else positive_state(n, rng)
            q = decide_contextuality(spaces[n], rho).q
            live = run_hvm_sampler(spaces[n], q, circ, SHOTS, seed=100 + k, coins="live")
            pred = run_hvm_sampler(spaces[n], q, circ, SHOTS, seed=200 + k, coins="predrawn")
            coin_tv = max(coin_tv, two_sample_tv(live, pred))
        c.detail = f"20 circuits, max TV {tv:.4f}, preprocessing dev {pre:.1e}, live vs predrawn {coin_tv:.4f}"
        assert tv <= TV_LIMIT and pre <= 1e-12 and coin_tv <= 0.01
        c.ok = True


def test_criterion_08_positive_states_feasible(criterion):
    with criterion(8, "W >= 0 implies a model; strict inclusion at n=1") as c:
        rng = np.random.default_rng(8)
        ok = 0
        for n in (1, 2):
            sp = enumerate_assignments(build_scheme(PhaseConvention.gamma0(n)))
            for _ in range(100):
                rho = rejection_positive_state(n, rng)
                ok += bool(decide_contextuality(sp, rho).feasible)
        sp = enumerate_assignments(build_scheme(PhaseConvention.gamma0(1)))
        frames = [sp.rephased_gamma(o) for o in range(sp.orbit_count)]
        witness = None
        grid = np.linspace(-1, 1, 9)
        for r in itertools.product(grid, repeat=3):
            if np.linalg.norm(r) > 1 + 1e-12:
                continue
            rho = bloch_state(r)
            if all(not wigner_of(f, rho).is_nonnegative() for f in frames) and decide_contextuality(sp, rho).feasible:
                witness = [float(x) for x in r]
                break
        c.detail = f"{ok}/200 feasible; doubly negative feasible Bloch vector {witness}"
        assert ok == 200 and witness is not None
        c.ok = True


def test_criterion_09_mermin(criterion):
    with criterion(9, "Mermin witness", limit=30) as c:
        oracle = mermin_witness("oracle", ghz(3), shots=0)
        assert oracle.value == pytest.approx(4, abs=1e-12)
        sp = enumerate_assignments(build_scheme(gamma0(3)))
        res = decide_contextuality(sp, ghz(3))
        assert not res.feasible and res.certificate is not None
        assert res.certificate.hvm_bound == 2
        rng = np.random.default_rng(9)
        qs = [decide_contextuality(sp, 0.5 * ghz(3) + 0.5 * maximally_mixed(3)).q]
        for _ in range(3):
            q = rng.random(sp.size) ** 8
            qs.append(q / q.sum())
        worst = -np.inf
        for k, q in enumerate(qs):
            r = mermin_witness("hvm", space=sp, q=q, shots=SHOTS, seed=k)
            worst = max(worst, (r.value - 2) / r.std_error if r.std_error > 0 else r.value - 2)
        c.detail = (f"oracle {oracle.value:.12g}, LP infeasible with bound {res.certificate.hvm_bound}, "
                    f"max (estimate - 2)/sigma {worst:.2f}")
        assert worst <= 5
        c.ok = True


def test_criterion_10_update_chain(criterion):
    with criterion(10, "HVM updates track the oracle") as c:
        worst = 0.0
        steps = 0
        for n in (1, 2, 3):
            sp = enumerate_assignments(build_scheme(PhaseConvention.gamma0(n)))
            g = sp.scheme.gamma
            rng = np.random.default_rng(10 + n)
            O = sp.scheme.V_O[1:]
            for trial in range(4):
                rho = magic_A() if n == 1 and trial == 0 else positive_state(n, rng)
                q = decide_contextuality(sp, rho).q
                for _ in range(10):
                    a = O[rng.integers(len(O))]
                    T = dense_matrix(g, a)
                    p_or = [np.trace((np.eye(1 << n) + (-1) ** s * T) @ rho).real / 2 for s in (0, 1)]
                    s = int(rng.random() < p_or[1])
                    p_h, q = hvm_update(sp, q, a, s)
                    _, rho = measure_update_oracle(g, rho, a, s)
                    worst = max(worst, abs(p_h - p_or[s]),
                                np.max(np.abs(expectations(sp, q) - state_expectations(sp, rho))))
                    steps += 1
        c.detail = f"{steps} steps, max deviation {worst:.1e}"
        assert worst <= 1e-9
        c.ok = True


def test_criterion_11_orbit_ensembles(criterion):
    with criterion(11, "orbit ensembles reconstruct the state; O is orbit independent") as c:
        rng = np.random.default_rng(11)
        worst = 0.0
        for k in range(20):
            n = 1 + k % 2
            sp = enumerate_assignments(build_scheme(PhaseConvention.gamma0(n)))
            rho = magic_A() if k == 0 else positive_state(n, rng)
            res = decide_contextuality(sp, rho)
            assert res.feasible
            parts = ensemble_decompose(sp, res.q)
            worst = max(worst, np.max(np.abs(sum(p.weight * p.operator() for p in parts) - rho)))
        orbits = 0
        for n in (1, 2, 3):
            sp = enumerate_assignments(build_scheme(PhaseConvention.gamma0(n)))
            chosen = range(sp.orbit_count) if n <= 2 else rng.choice(sp.orbit_count, size=8, replace=False)
            for o in chosen:
                assert rephased_O(sp, int(o)) == sp.scheme.V_O_indices
                orbits += 1
        c.detail = f"20 states, reconstruction dev {worst:.1e}; {orbits} orbits share O"
        assert worst <= 1e-10
        c.ok = True


def test_criterion_12_cluster_demos(criterion):
    with criterion(12, "cluster states, MBQC rotation, Ising scheme") as c:
        specs = [ClusterSpec.chain(2, [1]), ClusterSpec.chain(4, [1, 3]), ClusterSpec.chain(5, [2]),
                 ClusterSpec.cycle([0, 1, 2, 3], [0]), ClusterSpec(4, ((0, 1), (0, 2), (0, 3)), frozenset({1, 3})),
                 HEXAGON, ClusterSpec.chain(6, [1, 4])]
        resid = max(max(stabilizer_residuals(s, build_cluster_magic_state(s))) for s in specs)
        assert resid <= 1e-10
        demo = mbqc_demo("b", target=T_ROT)
        assert demo["min_fidelity"] >= 1 - 1e-10
        n = 3
        edges = [(0, 1), (1, 2)]
        U = CliffordGate.identity(n)
        for a, b in edges:
            U = U.then(CliffordGate.named("CZ", [a, b], n))
        s1 = conjugate_scheme(build_scheme(PhaseConvention.gamma0(n)), U)
        expected = {"III"}
        for v in range(n):
            nb = [b for e in edges for b in e if v in e and b != v]
            for L in "XYZ":
                lab = ["I"] * n
                lab[v] = L
                if L != "Z":
                    for b in nb:
                        lab[b] = "Z"
                expected.add("".join(lab))
        got = {p.label() for p in s1.V_O}
        assert got == expected
        for p in s1.V_O:
            T = dense_matrix(s1.gamma, p)
            assert min(np.max(np.abs(T - s * label_matrix(p.label()))) for s in (1, -1)) <= 1e-12
        c.detail = (f"{len(specs)} graphs, residual {resid:.1e}; MBQC min fidelity {demo['min_fidelity']:.12g}; "
                    f"Ising scheme has {len(got)} points")
        c.ok = True


def test_criterion_13_search_classes(criterion, capsys):
    with criterion(13, "exhaustive convention search", limit=600) as c:
        code, out, _ = cli_json(capsys, "scheme", "search", "--n", 2, "--exhaustive")
        assert code == 0
        assert out["count"] > 0 and out["gamma0_class"] is not None
        c.detail = f"{out['count']} solutions in {out['class_count']} classes, gamma0 in class {out['gamma0_class']}"
        if out["class_count"] >= 2:
            c.ok = True
        else:
            c.advisory = True
            c.detail += " (fewer than 2 classes)"
