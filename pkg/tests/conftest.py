import pytest

from kummerflow.orbifold import LatticeGroupPair

GAUSSIAN = [["1", "0"], ["i", "0"], ["0", "1"], ["0", "i"]]


def gaussian_pair(*generators):
    return LatticeGroupPair.from_strings(GAUSSIAN, list(generators))


@pytest.fixture(scope="session")
def z2_pair():
    return gaussian_pair([["-1", "0"], ["0", "-1"]])


@pytest.fixture(scope="session")
def z4_pair():
    return gaussian_pair([["i", "0"], ["0", "-i"]])


@pytest.fixture(scope="session")
def bd8_pair():
    return gaussian_pair([["i", "0"], ["0", "-i"]], [["0", "-1"], ["1", "0"]])
