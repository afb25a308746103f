"""File formats shared by the command line and the library.

State JSON (one of):
    {"bloch": [x, y, z]}
    {"stabilizers": ["+XX", "+ZZ"]}
    {"pauli_expansion": {"II": 0.25, "ZZ": 0.25}}
    {"dense": {"real": [[...]], "imag": [[...]]}}
    {"named": "ghz" | "magic_A" | "mixed" | "zero", "n": 3}

Circuit JSON: ``{"n": 3, "state": {...}, "steps": [...]}`` or a bare list of
steps.  Steps are ``{"gate": "H1" | tableau, "if": [...], "else_gate": ...}``,
``{"measure": "+ZII", "if": [...], "else_measure": "..."}`` or, for tables
that are not XOR-shaped, ``{"measure_table": [...], "control": [...]}``.

Wigner CSV: header ``u_Z,u_X,value`` with bit strings for the two halves.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionError, ValidationError
from .pauli import CliffordGate, PhaseConvention, PhasePoint
from .scheme import Scheme, build_scheme, scheme_from_O
from .simulate import Circuit, Gate, Measure, _pauli_text, named_gate
from .states import (
    bloch_state,
    check_hermitian,
    from_pauli_expansion,
    ghz,
    magic_A,
    maximally_mixed,
    stabilizer_state,
)
from .wigner import WignerMap

SIG_DIGITS = 12


# -- generic -----------------------------------------------------------------


def round_floats(obj: Any, digits: int = SIG_DIGITS) -> Any:
    """Round every float to ``digits`` significant digits (recursively)."""
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x) or x == 0:
            return 0.0 if x == 0 else x
        return float(f"{x:.{digits}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, indent=2) + "\n"


def write_text(path: str | os.PathLike, text: str) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str | os.PathLike) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such file") from None


# -- states ------------------------------------------------------------------


def state_from_json(data: dict) -> np.ndarray:
    if not isinstance(data, dict):
        raise ValidationError("state must be a JSON object")
    keys = {"bloch", "stabilizers", "pauli_expansion", "dense", "named"} & set(data)
    if len(keys) != 1:
        raise ValidationError("state needs exactly one of bloch, stabilizers, pauli_expansion, dense, named")
    (key,) = keys
    if key == "bloch":
        return bloch_state(data["bloch"])
    if key == "stabilizers":
        return stabilizer_state(list(data["stabilizers"]))
    if key == "pauli_expansion":
        rho = from_pauli_expansion({k: float(v) for k, v in data["pauli_expansion"].items()})
        return check_hermitian(rho)
    if key == "dense":
        d = data["dense"]
        re = np.asarray(d["real"], dtype=float)
        im = np.asarray(d.get("imag", np.zeros_like(re)), dtype=float)
        return check_hermitian(re + 1j * im)
    name, n = data["named"], int(data.get("n", 1))
    makers = {"ghz": lambda: ghz(n), "magic_A": magic_A, "mixed": lambda: maximally_mixed(n),
              "zero": lambda: stabilizer_state(["+" + "I" * k + "Z" + "I" * (n - k - 1) for k in range(n)])}
    if name not in makers:
        raise ValidationError(f"unknown named state {name!r}")
    return makers[name]()


def state_to_json(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"dense": {"real": rho.real.tolist(), "imag": rho.imag.tolist()}}


def load_state(path) -> np.ndarray:
    return state_from_json(load_json(path))


# -- conventions and schemes -------------------------------------------------


def gamma_from_arg(spec: str | None, n: int | None) -> PhaseConvention:
    """``gamma0`` (needs ``n``), or a JSON file with a convention or a scheme."""
    if spec is None or spec == "gamma0":
        if n is None:
            raise ValidationError("--n is required with the built-in gamma0")
        if n < 1:
            raise ValidationError("n must be positive")
        return PhaseConvention.gamma0(n)
    data = load_json(spec)
    if "gamma" in data:
        data = data["gamma"]
    try:
        g = PhaseConvention.from_json(data)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{spec}: not a phase convention ({exc})") from None
    if n is not None and g.n != n:
        raise DimensionError(f"{spec} has n = {g.n}, expected {n}")
    return g


def scheme_from_json(data: dict) -> Scheme:
    g = PhaseConvention.from_json(data["gamma"])
    if "V_O_points" not in data:
        return build_scheme(g)
    pts = [PhasePoint(int(z), int(x), g.n) for z, x in data["V_O_points"]]
    return scheme_from_O(g, pts)


def load_scheme(path) -> Scheme:
    return scheme_from_json(load_json(path))


# -- circuits ----------------------------------------------------------------


def _gate_from_json(obj, n: int) -> CliffordGate:
    if isinstance(obj, str):
        return named_gate(obj, n)
    if isinstance(obj, dict):
        g = CliffordGate.from_json(obj)
        if g.n != n:
            raise DimensionError("tableau gate has the wrong number of qubits")
        return g
    raise ValidationError(f"bad gate {obj!r}")


def _infer_n(steps: list) -> int:
    for st in steps:
        for key in ("measure", "else_measure"):
            if key in st:
                return len(_pauli_text(st[key])) - 1
        if "measure_table" in st:
            return len(_pauli_text(st["measure_table"][0])) - 1
        if isinstance(st.get("gate"), dict):
            return int(st["gate"]["n"])
    raise ValidationError("cannot infer n from the circuit; add an \"n\" field")


def circuit_from_json(data) -> tuple[Circuit, np.ndarray | None]:
    """Circuit and optional embedded input state."""
    state = None
    if isinstance(data, dict):
        steps = data.get("steps")
        if steps is None:
            raise ValidationError("circuit object needs a \"steps\" list")
        n = int(data["n"]) if "n" in data else _infer_n(steps)
        if "state" in data:
            state = state_from_json(data["state"])
    elif isinstance(data, list):
        steps, n = data, _infer_n(data)
    else:
        raise ValidationError("circuit must be a list of steps or an object")
    out = []
    for k, st in enumerate(steps):
        if not isinstance(st, dict):
            raise ValidationError(f"step {k} is not an object")
        ctrl = [int(c) for c in st.get("if", st.get("control", []))]
        if "gate" in st:
            alt = _gate_from_json(st["else_gate"], n) if st.get("else_gate") is not None else None
            out.append(Gate.xor(_gate_from_json(st["gate"], n), ctrl, alt))
        elif "measure" in st:
            out.append(Measure.xor(st["measure"], ctrl, st.get("else_measure")))
        elif "measure_table" in st:
            out.append(Measure(tuple(_pauli_text(t) for t in st["measure_table"]), tuple(ctrl)))
        else:
            raise ValidationError(f"step {k} has neither gate nor measure")
    return Circuit(n, out), state


def _xor_shape(table: tuple) -> tuple | None:
    """``(primary, alternative)`` if the table is selected by control parity."""
    prim = [t for i, t in enumerate(table) if bin(i).count("1") & 1]
    alt = [t for i, t in enumerate(table) if not bin(i).count("1") & 1]
    if all(t == prim[0] for t in prim) and all(t == alt[0] for t in alt):
        return prim[0], alt[0]
    return None


def circuit_to_json(circuit: Circuit, state: np.ndarray | None = None) -> dict:
    steps = []
    for st in circuit.steps:
        if isinstance(st, Gate):
            if not st.control:
                steps.append({"gate": st.table[0].to_json()})
                continue
            shape = _xor_shape(st.table)
            if shape is None:
                raise ValidationError("gate tables must be XOR-shaped to be written")
            d = {"gate": shape[0].to_json(), "if": list(st.control)}
            if shape[1] is not None:
                d["else_gate"] = shape[1].to_json()
            steps.append(d)
        else:
            if not st.control:
                steps.append({"measure": st.table[0]})
                continue
            shape = _xor_shape(st.table)
            if shape is None:
                steps.append({"measure_table": list(st.table), "control": list(st.control)})
            else:
                steps.append({"measure": shape[0], "if": list(st.control), "else_measure": shape[1]})
    out = {"n": circuit.n, "steps": steps}
    if state is not None:
        out["state"] = state_to_json(state)
    return out


# -- Wigner maps -------------------------------------------------------------


def wigner_to_csv(W: WignerMap) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u_Z", "u_X", "value"])
    n = W.n
    for i, v in enumerate(W.values):
        z, x = i >> n, i & ((1 << n) - 1)
        w.writerow([format(z, f"0{n}b"), format(x, f"0{n}b"), f"{float(v):.12g}"])
    return buf.getvalue()


def wigner_from_csv(text: str) -> WignerMap:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["u_Z", "u_X", "value"]:
        raise ValidationError("Wigner CSV needs the header u_Z,u_X,value")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ValidationError("empty Wigner CSV")
    n = len(body[0][0].strip())
    vals = np.full(1 << 2 * n, np.nan)
    for r in body:
        z, x = int(r[0], 2), int(r[1], 2)
        vals[(z << n) | x] = float(r[2])
    if np.isnan(vals).any():
        raise ValidationError("Wigner CSV is missing points")
    return WignerMap(n, vals)


def wigner_to_json(W: WignerMap) -> dict:
    n = W.n
    return {"n": n, "values": {PhasePoint.from_index(i, n).label(): float(v) for i, v in enumerate(W.values)}}
