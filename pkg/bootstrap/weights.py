import numpy as np

from helper.random_streams import RandomSource, as_generator

ROOT5 = np.sqrt(5.0)
# two-point law with mean 0 and unit second and third moments
MAMMEN_ATOMS = np.array([(1 - ROOT5) / 2, (1 + ROOT5) / 2])
MAMMEN_PROBABILITIES = np.array([(5 + ROOT5) / 10, (5 - ROOT5) / 10])


def wild_weights(n: int, rng: RandomSource = None) -> np.ndarray:
    if n < 1:
        raise ValueError(f"need at least one weight, got n={n}")
    return as_generator(rng).choice(MAMMEN_ATOMS, size=n, p=MAMMEN_PROBABILITIES)
