"""Gate teleportation on the hexagon cluster with one magic site.

Pattern a teleports the identity, pattern b the pi/4 Z rotation (with one
adaptive basis choice), and pattern z cuts the input from the output.
"""

from qcsi.gamma_zero import HEXAGON, build_cluster_magic_state, mbqc_demo, stabilizer_residuals

rho = build_cluster_magic_state(HEXAGON)
print("cluster residual:", max(stabilizer_residuals(HEXAGON, rho)))
print(HEXAGON.to_text())

for pattern in "abz":
    r = mbqc_demo(pattern)
    steps = ["/".join(alts) for alts in r["observables"]]  # a/b: outcome-dependent choice
    print(f"pattern {pattern}: {' '.join(steps)}")
    print(f"  branches {len(r['branches'])}, min fidelity {r['min_fidelity']:.12g}, connected {r['connected']}")
