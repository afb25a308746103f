"""Command line interface.

Exit codes: 0 success, 1 a ``--strict`` tolerance check failed, 2 invalid
input, 3 capacity exceeded, 4 a requested feasibility assertion is false.
Errors print one JSON line ``{"error": kind, "reason": text}`` on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import CapacityError, InfeasibleError, SolverError, ValidationError
from .gamma_zero import ClusterSpec, build_cluster_magic_state, mbqc_demo, mermin_witness, stabilizer_residuals
from .hvm import decide_contextuality, enumerate_assignments
from .io import (
    circuit_from_json,
    circuit_to_json,
    dumps,
    gamma_from_arg,
    load_json,
    load_scheme,
    load_state,
    state_to_json,
    wigner_to_csv,
    wigner_to_json,
    write_text,
)
from .pauli import CliffordGate, PhasePoint
from .scheme import build_scheme, check_P2, conjugate_scheme, search_gammas
from .simulate import (
    compare_distributions,
    named_gate,
    preprocess,
    run_hvm_sampler,
    run_oracle,
    run_wigner_sampler,
)
from .states import ghz
from .wigner import sum_negativity, wigner_of

EXIT_OK, EXIT_STRICT, EXIT_VALIDATION, EXIT_CAPACITY, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code: int, payload):
        self.code, self.payload = code, payload


# -- helpers -----------------------------------------------------------------


def _scheme_arg(args):
    if getattr(args, "scheme", None):
        return load_scheme(args.scheme)
    return build_scheme(gamma_from_arg(args.gamma, args.n))


def _certificate_json(cert, n):
    if cert is None:
        return None
    return {
        "weights": {PhasePoint.from_index(k, n).label(): str(v) for k, v in sorted(cert.weights.items())},
        "hvm_bound": str(cert.hvm_bound),
        "quantum_value": cert.quantum_value,
    }


def _decide(space, rho, tol):
    r = decide_contextuality(space, rho, tol=tol)
    out = {
        "feasible": r.feasible,
        "verified_exact": r.verified_exact,
        "residual": r.residual,
        "orbits": space.orbit_count,
        "assignments": space.size,
    }
    if r.feasible:
        out["support"] = {str(k): v for k, v in sorted(r.support().items())}
    else:
        out["certificate"] = _certificate_json(r.certificate, space.n)
    return r, out


def _circuit_and_state(args):
    circuit, state = circuit_from_json(load_json(args.circuit))
    if args.state:
        state = load_state(args.state)
    if state is None:
        raise ValidationError("no input state: pass --state or embed \"state\" in the circuit file")
    return circuit, state


def _run_engine(args, circuit, state):
    if args.engine == "oracle":
        return run_oracle(circuit, state, args.shots, args.seed)
    sch = build_scheme(gamma_from_arg(args.gamma, circuit.n))
    if args.engine == "wigner":
        return run_wigner_sampler(sch, circuit, state, args.shots, args.seed, coins=args.coins)
    space = enumerate_assignments(sch)
    res = decide_contextuality(space, state, tol=args.lp_tol)
    if not res.feasible:
        raise _Exit(EXIT_INFEASIBLE, {"error": "InfeasibleError",
                                      "reason": "input state admits no non-contextual model",
                                      "certificate": _certificate_json(res.certificate, space.n)})
    return run_hvm_sampler(space, res.q, circuit, args.shots, args.seed, coins=args.coins)


# -- handlers ----------------------------------------------------------------


def cmd_scheme_build(args):
    return _scheme_arg(args).to_json()


def cmd_scheme_check(args):
    sch = _scheme_arg(args)
    fresh = build_scheme(sch.gamma)
    V_O = [p.label() for p in sch.V_O]
    out = {
        "n": sch.n,
        "V_O_size": len(V_O),
        "V_O": V_O,
        "local_only": all(len(p.support()) <= 1 for p in sch.V_O),
        "V_M_size": len(sch.V_M_indices),
        "P1": True,
        "P2": check_P2(sch),
        "matches_definition": fresh.V_O_indices == sch.V_O_indices,
    }
    if args.strict and not (out["P2"] and out["matches_definition"]):
        raise _Exit(EXIT_STRICT, out)
    return out


def cmd_scheme_conjugate(args):
    sch = _scheme_arg(args)
    n = sch.n
    U = CliffordGate.identity(n)
    if args.ising:
        for k in range(n - 1):
            U = U.then(CliffordGate.named("CZ", [k, k + 1], n))
    for tok in (args.gates or "").replace(",", " ").split():
        U = U.then(named_gate(tok, n))
    if args.tableau:
        U = U.then(CliffordGate.from_json(load_json(args.tableau)))
    return conjugate_scheme(sch, U).to_json()


def cmd_scheme_search(args):
    mode = "random" if args.random else "exhaustive"
    res = search_gammas(args.n, mode=mode, trials=args.trials, seed=args.seed)
    out = {k: res[k] for k in ("n", "mode", "scanned", "count", "all_points_measurable")}
    if "classes" in res:
        out["classes"] = [{"id": c["id"], "size": c["size"], "V_O_size": c["V_O_size"],
                           "representative": [int(v) for v in c["representative"]]} for c in res["classes"]]
        out["class_count"] = len(res["classes"])
        out["gamma0_class"] = res["gamma0_class"]
    if args.strict and mode == "exhaustive" and out.get("class_count", 0) < 2:
        raise _Exit(EXIT_STRICT, out)
    return out


def cmd_wigner_eval(args):
    rho = load_state(args.state)
    n = int(rho.shape[0]).bit_length() - 1
    W = wigner_of(gamma_from_arg(args.gamma, n), rho)
    if args.format == "csv":
        return wigner_to_csv(W)
    out = wigner_to_json(W)
    out.update({"min": W.min(), "sum_negativity": sum_negativity(W), "nonnegative": W.is_nonnegative()})
    return out


def cmd_contextuality_decide(args):
    rho = load_state(args.state)
    n = int(rho.shape[0]).bit_length() - 1
    space = enumerate_assignments(build_scheme(gamma_from_arg(args.gamma, n)))
    r, out = _decide(space, rho, args.lp_tol)
    if args.assert_feasible and not r.feasible:
        raise _Exit(EXIT_INFEASIBLE, out)
    if args.assert_contextual and r.feasible:
        raise _Exit(EXIT_INFEASIBLE, out)
    return out


def cmd_simulate_run(args):
    circuit, state = _circuit_and_state(args)
    rec = _run_engine(args, circuit, state)
    return rec.to_json()


def cmd_simulate_compare(args):
    circuit, state = _circuit_and_state(args)
    rec = _run_engine(args, circuit, state)
    from .simulate import exact_distribution

    cmp = compare_distributions(rec, exact_distribution(circuit, state))
    out = rec.to_json()
    out.update({"tv_vs_oracle": cmp["tv_distance"], "max_deviation": cmp["max_deviation"],
                "tv_threshold": args.tv_threshold, "within_threshold": cmp["tv_distance"] <= args.tv_threshold})
    if args.strict and not out["within_threshold"]:
        raise _Exit(EXIT_STRICT, out)
    return out


def cmd_simulate_preprocess(args):
    circuit, state = circuit_from_json(load_json(args.circuit))
    sch = build_scheme(gamma_from_arg(args.gamma, circuit.n))
    return circuit_to_json(preprocess(sch, circuit), state)


def cmd_mermin_demo(args):
    rho = load_state(args.state) if args.state else ghz(3)
    oracle = mermin_witness("oracle", rho, shots=0)
    space = enumerate_assignments(build_scheme(gamma_from_arg(args.gamma, 3)))
    r, lp = _decide(space, rho, args.lp_tol)
    out = {"oracle": oracle.to_json(), "lp": lp}
    if args.shots:
        if r.feasible:
            q = r.q
            source = "input state"
        else:
            # the contextual input has no model; sample the best mixture with I/8 that has one
            q, source = _feasible_mixture(space, rho, args.lp_tol)
        rep = mermin_witness("hvm", space=space, q=q, shots=args.shots, seed=args.seed)
        out["hvm"] = rep.to_json() | {"q_source": source,
                                      "within_bound": rep.value <= rep.hvm_bound + 5 * rep.std_error}
    return out


def _feasible_mixture(space, rho, tol):
    lo, hi = 0.0, 1.0
    mixed = np.eye(rho.shape[0]) / rho.shape[0]
    best = decide_contextuality(space, mixed, tol=tol).q
    for _ in range(20):
        mid = (lo + hi) / 2
        r = decide_contextuality(space, mid * rho + (1 - mid) * mixed, tol=tol)
        if r.feasible:
            lo, best = mid, r.q
        else:
            hi = mid
    return best, f"mixture with weight {lo:.6f} on the input"


def cmd_mbqc_demo(args):
    spec = ClusterSpec.from_text(open(args.graph).read()) if args.graph else None
    r = mbqc_demo(args.pattern) if spec is None else mbqc_demo(args.pattern, spec)
    r["target"] = {"real": np.real(r["target"]).tolist(), "imag": np.imag(r["target"]).tolist()}
    if args.strict and args.pattern in "ab" and r["min_fidelity"] < 1 - 1e-10:
        raise _Exit(EXIT_STRICT, r)
    return r


def cmd_cluster_build(args):
    try:
        text = open(args.graph).read()
    except FileNotFoundError:
        raise ValidationError(f"{args.graph}: no such file") from None
    spec = ClusterSpec.from_text(text)
    rho = build_cluster_magic_state(spec)
    res = stabilizer_residuals(spec, rho)
    out = {"n": spec.n, "edges": [[u + 1, v + 1] for u, v in spec.edges], "R": sorted(r + 1 for r in spec.R),
           "sparse": spec.is_sparse(), "max_residual": max(res), "state": state_to_json(rho)}
    return out


# -- parser ------------------------------------------------------------------


def _add_gamma(p, n_required=False):
    p.add_argument("--gamma", default="gamma0", help="'gamma0' or a JSON file holding a convention or scheme")
    p.add_argument("--n", type=int, required=n_required, help="number of qubits")


def _add_out(p):
    p.add_argument("--out", help="write the primary output here instead of stdout")
    p.add_argument("--strict", action="store_true", help="exit 1 when a tolerance check fails")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcsi", description="Qubit schemes from phase conventions.")
    ap.add_argument("--version", action="version", version=f"qcsi {__version__}")
    top = ap.add_subparsers(dest="group", required=True)

    sch = top.add_parser("scheme", help="build, check, conjugate or search schemes").add_subparsers(
        dest="action", required=True)
    p = sch.add_parser("build", help="directly measurable set and closure for a convention")
    _add_gamma(p)
    _add_out(p)
    p.set_defaults(func=cmd_scheme_build)
    p = sch.add_parser("check", help="summarize a scheme and verify tomographic completeness")
    _add_gamma(p)
    p.add_argument("--scheme", help="scheme JSON produced by 'scheme build'")
    _add_out(p)
    p.set_defaults(func=cmd_scheme_check)
    p = sch.add_parser("conjugate", help="scheme seen through a Clifford unitary")
    _add_gamma(p)
    p.add_argument("--scheme", help="scheme JSON")
    p.add_argument("--gates", help="comma separated gate tokens such as H1,CZ12")
    p.add_argument("--tableau", help="JSON file with a Clifford tableau")
    p.add_argument("--ising", action="store_true", help="CZ on every neighbouring pair")
    _add_out(p)
    p.set_defaults(func=cmd_scheme_conjugate)
    p = sch.add_parser("search", help="search conventions with tomographically complete schemes")
    p.add_argument("--n", type=int, default=2)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true", default=True)
    g.add_argument("--random", action="store_true")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)
    p.set_defaults(func=cmd_scheme_search)

    w = top.add_parser("wigner", help="Wigner functions").add_subparsers(dest="action", required=True)
    p = w.add_parser("eval", help="Wigner function of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--gamma", default="gamma0")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_out(p)
    p.set_defaults(func=cmd_wigner_eval)

    c = top.add_parser("contextuality", help="non-contextual models").add_subparsers(dest="action", required=True)
    p = c.add_parser("decide", help="decide whether a state has a non-contextual model")
    p.add_argument("--state", required=True)
    p.add_argument("--gamma", default="gamma0")
    p.add_argument("--lp-tol", type=float, default=1e-9)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--assert-feasible", action="store_true", help="exit 4 if no model exists")
    g.add_argument("--assert-contextual", action="store_true", help="exit 4 if a model exists")
    _add_out(p)
    p.set_defaults(func=cmd_contextuality_decide)

    s = top.add_parser("simulate", help="run circuits").add_subparsers(dest="action", required=True)
    for name, func, hlp in (("run", cmd_simulate_run, "sample outcome strings"),
                            ("compare", cmd_simulate_compare, "sample and compare with the exact oracle")):
        p = s.add_parser(name, help=hlp)
        p.add_argument("--engine", choices=("oracle", "wigner", "hvm"), default="oracle")
        p.add_argument("--circuit", required=True)
        p.add_argument("--state", help="state JSON (overrides one embedded in the circuit)")
        p.add_argument("--gamma", default="gamma0")
        p.add_argument("--shots", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--coins", choices=("live", "predrawn"), default="live")
        p.add_argument("--lp-tol", type=float, default=1e-9)
        if name == "compare":
            p.add_argument("--tv-threshold", type=float, default=0.02)
        _add_out(p)
        p.set_defaults(func=func)
    p = s.add_parser("preprocess", help="eliminate gates from a circuit")
    p.add_argument("--circuit", required=True)
    p.add_argument("--gamma", default="gamma0")
    _add_out(p)
    p.set_defaults(func=cmd_simulate_preprocess)

    m = top.add_parser("mermin", help="Mermin-star witness").add_subparsers(dest="action", required=True)
    p = m.add_parser("demo", help="oracle value, LP certificate and sampled model value")
    p.add_argument("--state", help="three-qubit state JSON (default GHZ)")
    p.add_argument("--gamma", default="gamma0")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lp-tol", type=float, default=1e-9)
    _add_out(p)
    p.set_defaults(func=cmd_mermin_demo)

    b = top.add_parser("mbqc", help="measurement-based gate demo").add_subparsers(dest="action", required=True)
    p = b.add_parser("demo", help="run pattern a (identity), b (pi/4 rotation) or z (all Z)")
    p.add_argument("--pattern", choices=("a", "b", "z"), default="b")
    p.add_argument("--graph", help="six-vertex graph file (default: the built-in hexagon)")
    _add_out(p)
    p.set_defaults(func=cmd_mbqc_demo)

    cl = top.add_parser("cluster", help="cluster magic states").add_subparsers(dest="action", required=True)
    p = cl.add_parser("build", help="dense cluster magic state from a graph file")
    p.add_argument("--graph", required=True)
    _add_out(p)
    p.set_defaults(func=cmd_cluster_build)
    return ap


def _emit(payload, out_path):
    text = payload if isinstance(payload, str) else dumps(payload)
    if out_path:
        write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _error(kind: str, reason: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "reason": reason}) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload = args.func(args)
    except _Exit as e:
        _emit(e.payload, getattr(args, "out", None))
        return e.code
    except CapacityError as e:
        _error(type(e).__name__, str(e))
        return EXIT_CAPACITY
    except InfeasibleError as e:
        _error(type(e).__name__, str(e))
        return EXIT_INFEASIBLE
    except (ValidationError, ValueError, KeyError, OSError) as e:
        _error(type(e).__name__, str(e).strip("'\""))
        return EXIT_VALIDATION
    except SolverError as e:
        _error(type(e).__name__, str(e))
        return EXIT_CAPACITY
    _emit(payload, getattr(args, "out", None))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
