import numpy as np

RandomSource = np.random.Generator | int | None


def as_generator(rng: RandomSource) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def spawn_generators(rng: RandomSource, count: int) -> list[np.random.Generator]:
    """Independent child streams, fixed by the parent state and not by scheduling."""
    return as_generator(rng).spawn(count)


def cell_generator(seed: int, cell: int, replication: int) -> np.random.Generator:
    # stream keyed on (seed, cell, replication)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(cell, replication)))
