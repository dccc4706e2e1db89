"""On-disk tensor snapshots survive a round trip exactly."""

import numpy as np
import pytest

from blockdmrg.btensor import FORMATS, random_tensor
from blockdmrg.btensor.snapshot import load_tensor, save_tensor
from blockdmrg.oracle import densify

from conftest import random_index


@pytest.mark.parametrize("fmt", FORMATS)
def test_roundtrip_exact(tmp_path, rng, fmt):
    while True:
        ix = tuple(random_index(rng) for _ in range(3))
        t = random_tensor(ix, (0,), rng, fmt)
        if t.n_blocks:
            break
    path = tmp_path / "t.bdt"
    save_tensor(path, t)
    back = load_tensor(path)
    assert back.format == fmt
    assert back.total_charge == t.total_charge
    assert back.indices == t.indices
    assert sorted(back.keys()) == sorted(t.keys())
    for key in t.keys():
        assert np.array_equal(back.block(key), t.block(key))


def test_roundtrip_two_component(tmp_path, rng):
    while True:
        ix = tuple(random_index(rng, n_components=2) for _ in range(2))
        t = random_tensor(ix, (0, 0), rng)
        if t.n_blocks:
            break
    path = tmp_path / "t.bdt"
    save_tensor(path, t)
    back = load_tensor(path)
    assert np.array_equal(densify(back), densify(t))


def test_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bdt"
    path.write_bytes(b"not a snapshot")
    with pytest.raises(ValueError):
        load_tensor(path)
