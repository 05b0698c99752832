import pytest

from linbasis.rewrite import RuleSet
from linbasis.search import SearchConfig, run_search


@pytest.fixture(scope="session")
def n7_report():
    """The full n=7 pipeline against {s, m}; shared by several tests."""
    return run_search(SearchConfig(n=7, rules=RuleSet.builtin_sm()))


@pytest.fixture(scope="session")
def catalogue_fixtures():
    from linbasis.fixtures import catalogue

    return catalogue()
