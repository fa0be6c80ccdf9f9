from __future__ import annotations

import numpy as np
import pytest

from hypereta import cli_io


def have(name: str, item: str = "domain.txt") -> bool:
    return cli_io.has_fixture(name, item)


def needs(name: str, item: str = "spectrum.tsv"):
    return pytest.mark.skipif(not have(name, item), reason=f"fixture {name}/{item} not shipped")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_sl2(rng, n: int, spread: float = 1.0) -> np.ndarray:
    """Random SL2(C) matrices: det-normalized complex Gaussians."""
    a = rng.normal(scale=spread, size=(n, 2, 2)) + 1j * rng.normal(scale=spread, size=(n, 2, 2))
    d = np.linalg.det(a)
    return a / np.sqrt(d)[:, None, None]


@pytest.fixture(scope="session")
def sw():
    if not have("sw", "spectrum.tsv"):
        pytest.skip("SW fixture not shipped")
    from hypereta.pipeline import load_fixture
    return load_fixture("sw")


@pytest.fixture(scope="session")
def weeks():
    if not have("weeks", "spectrum.tsv"):
        pytest.skip("Weeks fixture not shipped")
    from hypereta.pipeline import load_fixture
    return load_fixture("weeks")
