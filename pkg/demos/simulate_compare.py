"""Run one random adaptive circuit through the oracle and both samplers."""

import numpy as np

from qcsi.gamma_zero import gamma0
from qcsi.hvm import decide_contextuality, enumerate_assignments
from qcsi.scheme import build_scheme
from qcsi.simulate import (
    compare_distributions,
    exact_distribution,
    preprocess,
    random_circuit,
    run_hvm_sampler,
    run_wigner_sampler,
)
from qcsi.states import magic_A, maximally_mixed, stabilizer_state

n = 2
rng = np.random.default_rng(3)
scheme = build_scheme(gamma0(n))
circuit = random_circuit(scheme, 8, rng, max_measurements=4, adaptive=0.5)
print(f"{len(circuit.steps)} steps, {circuit.measurement_count} measurements")
print(f"after preprocessing: {len(preprocess(scheme, circuit).steps)} steps, all gates gone")

# W >= 0 input for the Wigner sampler
rho = 0.7 * stabilizer_state(["+ZI", "+IX"]) + 0.3 * maximally_mixed(n)
exact = exact_distribution(circuit, rho)
rec = run_wigner_sampler(scheme, circuit, rho, 100_000, seed=1)
print("wigner TV:", round(compare_distributions(rec, exact)["tv_distance"], 4))

# |A> on the first qubit is W-negative but has a model
sigma = np.kron(magic_A(), maximally_mixed(1))
space = enumerate_assignments(scheme)
q = decide_contextuality(space, sigma).q
exact = exact_distribution(circuit, sigma)
rec = run_hvm_sampler(space, q, circuit, 100_000, seed=2)
print("hvm TV:", round(compare_distributions(rec, exact)["tv_distance"], 4))
for k in sorted(exact):
    print(f"  {k}  exact {exact[k]:.4f}  sampled {rec.counts.get(k, 0) / rec.shots:.4f}")
