"""Random parameter generators shared by the test modules."""

import numpy as np

from smexpfam.families import ExponentialSource, GaussianSource, PoissonSource, to_natural


def random_spd(rng, d, scale=1.0):
    a = rng.normal(size=(d, d))
    return scale * (a @ a.T / d + 0.5 * np.eye(d))


def random_gaussian(rng, d, mu_scale=2.0, scale=1.0):
    return GaussianSource.from_arrays(rng.uniform(-mu_scale, mu_scale, d), random_spd(rng, d, scale))


def random_source(rng, family, d=1):
    if family == "gaussian":
        return random_gaussian(rng, d)
    if family == "exponential":
        return ExponentialSource(float(rng.uniform(0.5, 3.0)))
    return PoissonSource(float(rng.uniform(0.5, 8.0)))


def random_theta(rng, family, d=1):
    return to_natural(random_source(rng, family, d))


FAMILY_CASES = [("gaussian", 1), ("gaussian", 2), ("gaussian", 4), ("exponential", 1), ("poisson", 1)]


def moderate_gaussian(rng, d):
    """Draws whose entropies and KL stay O(1); used where a 1e-8 order offset
    must move the value by less than 1e-6."""
    a = rng.normal(size=(d, d))
    return GaussianSource.from_arrays(rng.uniform(-1, 1, d), 0.5 * (a @ a.T / d) + 0.5 * np.eye(d))
