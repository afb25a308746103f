"""Mermin star on GHZ: the exact quantum value, the LP certificate, and what a model can reach."""

import numpy as np

from qcsi.gamma_zero import gamma0, mermin_witness
from qcsi.hvm import decide_contextuality, enumerate_assignments
from qcsi.pauli import PhasePoint
from qcsi.scheme import build_scheme
from qcsi.states import ghz, maximally_mixed


space = enumerate_assignments(build_scheme(gamma0(3)))

exact = mermin_witness("oracle", ghz(3), shots=0)
print(f"GHZ witness value: {exact.value:.12g} (models reach at most {exact.hvm_bound})")

res = decide_contextuality(space, ghz(3))
print("GHZ has a model:", res.feasible)
weights = {PhasePoint.from_index(i, 3).label(): str(w) for i, w in res.certificate.weights.items()}
print("certificate weights:", weights, "bound", res.certificate.hvm_bound)

# noisy GHZ: find roughly where the model stops existing
for t in np.linspace(0, 1, 11):
    rho = t * ghz(3) + (1 - t) * maximally_mixed(3)
    r = decide_contextuality(space, rho)
    line = f"t={t:.1f}  model={'yes' if r.feasible else 'no '}"
    if r.feasible:
        w = mermin_witness("hvm", space=space, q=r.q, shots=50_000, seed=int(10 * t))
        line += f"  sampled witness {w.value:.3f} +- {w.std_error:.3f}"
    print(line)
