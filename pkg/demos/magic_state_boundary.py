"""Where Wigner positivity and non-contextual models part ways for one qubit.

Walks the equator of the Bloch sphere, printing the smallest Wigner value in
each of the two frames next to the LP verdict.  Near the magic direction both
frames go negative while a non-contextual model still exists.
"""

import numpy as np

from qcsi.gamma_zero import gamma0
from qcsi.hvm import decide_contextuality, enumerate_assignments
from qcsi.scheme import build_scheme
from qcsi.states import bloch_state
from qcsi.wigner import wigner_of


def main(steps=16):
    space = enumerate_assignments(build_scheme(gamma0(1)))
    frames = [space.rephased_gamma(o) for o in range(space.orbit_count)]
    print(f"{'angle':>7} {'min W':>8} {'min W2':>8}  model")
    for k in range(steps + 1):
        phi = np.pi / 2 * k / steps
        rho = bloch_state([np.cos(phi), np.sin(phi), 0.0])
        mins = [wigner_of(f, rho).min() for f in frames]
        res = decide_contextuality(space, rho)
        tag = "yes" if res.feasible else "no"
        if res.feasible and all(m < -1e-12 for m in mins):
            tag += "  (negative in both frames)"
        print(f"{np.degrees(phi):7.2f} {mins[0]:8.4f} {mins[1]:8.4f}  {tag}")


if __name__ == "__main__":
    main()
