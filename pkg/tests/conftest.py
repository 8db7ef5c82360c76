import pytest

from semlearn.concepts import Compare, Concept, ConceptSet
from semlearn.datasets import hair10, hair100, hair_concepts
from semlearn.encoding import build_index

_criteria = {}


@pytest.fixture(scope="session")
def h10():
    model = hair10().freeze()
    return model, hair_concepts(model)


@pytest.fixture(scope="session")
def h10_index(h10):
    return build_index(*h10)


@pytest.fixture(scope="session")
def h100():
    model = hair100().freeze()
    return model, hair_concepts(model)


@pytest.fixture(scope="session")
def h100_index(h100):
    return build_index(*h100)


@pytest.fixture
def age_concepts():
    return ConceptSet([Concept("Young", (Compare("Age", "<", 16),))])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = (mark.args[0], mark.args[1])
    if report.failed:
        _criteria[key] = "FAIL"
    elif report.when == "call":
        _criteria.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_criteria.items()):
        terminalreporter.write_line(f"{status}  criterion {number:>2}: {title}")
