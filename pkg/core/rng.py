import numpy as np


class RngStream:
    """Seeded random stream owned by a single chain.

    Wraps a numpy ``Generator``. Streams for parallel chains come from
    ``derive(base_seed, chain_index)``, which feeds both integers through
    ``SeedSequence`` hashing so neighbouring indices give unrelated streams.
    """

    def __init__(self, seed: int | np.random.SeedSequence | None = None):
        if isinstance(seed, np.random.SeedSequence):
            self._gen = np.random.Generator(np.random.PCG64(seed))
        else:
            self._gen = np.random.default_rng(seed)

    @classmethod
    def derive(cls, base_seed: int, chain_index: int) -> "RngStream":
        return cls(np.random.SeedSequence(entropy=base_seed, spawn_key=(chain_index,)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def uniform(self) -> float:
        return float(self._gen.random())

    def standard_normal(self, size: int) -> np.ndarray:
        return self._gen.standard_normal(size)
