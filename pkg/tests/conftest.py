import numpy as np
import pytest

from r2attr.dataset import Dataset, standardize


@pytest.fixture
def four_row():
    """y = x1 + x2 exactly; standardized correlation between channels is 1/sqrt(2)."""
    X = np.array([[1, 1], [1, 0], [-1, 0], [-1, -1]], dtype=float)
    return Dataset(np.array([2.0, 1.0, -1.0, -2.0]), X, ("x1", "x2"))


@pytest.fixture
def four_row_std(four_row):
    return standardize(four_row)


def random_dataset(rng, n, p, noise=1.0, corr=0.3):
    C = np.full((p, p), corr)
    np.fill_diagonal(C, 1.0)
    X = rng.standard_normal((n, p)) @ np.linalg.cholesky(C).T
    beta = rng.normal(size=p)
    y = X @ beta + noise * rng.standard_normal(n)
    return Dataset(y, X, tuple(f"c{j}" for j in range(p)))


def orthogonal_dataset(n=8, p=3, seed=0):
    """Exactly orthogonal, centered columns built from a Hadamard-like sign matrix."""
    H = np.array([[1]])
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    X = H[:, 1:p + 1].astype(float)
    rng = np.random.default_rng(seed)
    y = X @ rng.normal(size=p) + 0.5 * H[:, p + 1]
    return Dataset(y, X, tuple(f"o{j}" for j in range(p)))


ACCEPTANCE_LINES: list[str] = []


def acceptance_line(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
