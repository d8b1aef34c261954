import pytest

from flatpencil.pipeline import run_pipeline

N_RANGE = range(2, 9)
BRANCHES = ("plus", "minus")


@pytest.fixture(scope="session")
def all_reports():
    """One pipeline run per (n, branch), shared by the acceptance criteria."""
    return {(n, b): run_pipeline(n, b) for n in N_RANGE for b in BRANCHES}
