import numpy as np
import pytest

from hamcredit.experiment.config import default_config
from hamcredit.pipeline import Dataset


def fast_config(**overrides):
    """Small, quick protocol configuration for tests."""
    base = {
        "data.synthetic.n_rows": 3000,
        "data.synthetic.n_features": 4,
        "data.synthetic.base_default_rate": 0.2,
        "model.hidden_dims": [8],
        "training.max_epochs": 4,
        "training.batch_size": 128,
        "training.patience": 2,
        "cv.k": 3,
    }
    base.update(overrides)
    return default_config().with_overrides(base)


@pytest.fixture
def cfg():
    return fast_config()


def random_dataset(rng, n=40, d=3, periods=6, rate=0.3):
    x = rng.normal(size=(n, d))
    y = (rng.random(n) < rate).astype(int)
    y[:2] = 1  # at least two defaults
    t = rng.integers(0, periods, size=n)
    return Dataset(x, y, t, tuple(f"f{i}" for i in range(d)))


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
