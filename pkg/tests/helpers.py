import numpy as np

from qcsi.pauli import PhaseConvention


def random_gamma(n, rng):
    """Uniformly random Hermitian convention."""
    z = np.arange(1 << 2 * n) >> n
    x = np.arange(1 << 2 * n) & ((1 << n) - 1)
    t = (np.bitwise_count(z & x) & 1) + 2 * rng.integers(0, 2, size=z.size)
    t[0] = 0
    return PhaseConvention.from_table(t, n)


def positive_state(n, rng):
    """Random pure state mixed with I/2**n, at a random level that keeps W under gamma0 non-negative."""
    from qcsi.states import maximally_mixed, random_density
    from qcsi.wigner import wigner_of

    g = PhaseConvention.gamma0(n)
    sigma = random_density(n, rng, rank=1)
    m = wigner_of(g, sigma).min()
    t = 1.0 if m >= 0 else 4.0**-n / (4.0**-n - m)
    t *= rng.uniform(0.5, 1.0)
    return (1 - t) * maximally_mixed(n) + t * sigma


def rejection_positive_state(n, rng, tries=100_000):
    """Full-rank random state conditioned on W under gamma0 being non-negative."""
    from qcsi.states import random_density
    from qcsi.wigner import wigner_of

    g = PhaseConvention.gamma0(n)
    for _ in range(tries):
        rho = random_density(n, rng)
        if wigner_of(g, rho).is_nonnegative():
            return rho
    raise RuntimeError("rejection sampling did not accept a state")
