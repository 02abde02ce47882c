"""The frozen oracle values must be reproducible from the brute-force oracles."""
from oracles import compute_all


def test_frozen_values_are_reproducible(frozen):
    assert compute_all() == frozen
