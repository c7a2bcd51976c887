from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# Published per-fold F1 pairs (baseline, SVM) for the RT and EOD labels.
PUBLISHED_RT = (
    [0.728, 0.728, 0.752, 0.752, 0.752, 0.752, 0.747, 0.747, 0.747, 0.747],
    [0.728, 0.728, 0.741, 0.731, 0.752, 0.752, 0.747, 0.747, 0.780, 0.795],
)
PUBLISHED_EOD = (
    [0.769, 0.769, 0.769, 0.769, 0.757, 0.757, 0.757, 0.757, 0.757, 0.827],
    [0.743, 0.769, 0.769, 0.769, 0.757, 0.757, 0.757, 0.757, 0.729, 0.827],
)


@pytest.fixture
def data_dir():
    return DATA


def two_group_docs(seed, n_docs=40, length=30):
    """Even docs use only a0..a9, odd docs only b0..b9."""
    import numpy as np

    rng = np.random.default_rng(seed)
    return [[f"{'ab'[d % 2]}{k}" for k in rng.integers(0, 10, size=length)]
            for d in range(n_docs)]


@pytest.fixture
def two_groups():
    return two_group_docs(0)
