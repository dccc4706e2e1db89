import numpy as np
import pytest

from blockdmrg.qn import IN, OUT, QNIndex


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_index(rng, max_sectors=3, max_dim=4, charge_span=2, n_components=1,
                 direction=None):
    """A small random QNIndex with distinct charges."""
    n_sec = int(rng.integers(1, max_sectors + 1))
    pool = [tuple(int(c) for c in comb)
            for comb in _charge_pool(charge_span, n_components)]
    picks = rng.choice(len(pool), size=n_sec, replace=False)
    sectors = [(pool[i], int(rng.integers(1, max_dim + 1))) for i in sorted(picks)]
    if direction is None:
        direction = IN if rng.integers(2) else OUT
    return QNIndex(sectors, direction)


def _charge_pool(span, n_components):
    import itertools
    rng_ = range(-span, span + 1)
    return list(itertools.product(rng_, repeat=n_components))
