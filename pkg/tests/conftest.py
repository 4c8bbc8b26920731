import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qoneway.sampling import make_rng, random_density_matrix

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.sampled_from([2, 3, 4, 8])


@st.composite
def states(draw, d=None, full_rank=False):
    dim = draw(dims) if d is None else d
    rank = dim if full_rank else draw(st.integers(1, dim))
    return random_density_matrix(dim, make_rng(draw(seeds)), rank=rank)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2
