import numpy as np

from ess_toolkit import DiscreteDistribution


def random_simplex_distribution(rng: np.random.Generator, max_n: int = 50) -> DiscreteDistribution:
    """Random distribution with n <= max_n and probabilities drawn uniformly
    from the simplex (Dirichlet with all-ones concentration)."""
    n = int(rng.integers(1, max_n + 1))
    return DiscreteDistribution.from_probs(rng.dirichlet(np.ones(n)))
