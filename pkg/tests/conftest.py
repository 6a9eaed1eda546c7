import pytest

from maxprob import moment_constraints, uniform_pmf, validate_pmf

REFERENCE_Q = (0.13, 0.09, 0.42, 0.36)

_criteria: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def reference_constraints():
    return moment_constraints([1, 2, 3, 4], "16/5")


@pytest.fixture
def reference_q():
    return validate_pmf(REFERENCE_Q)


@pytest.fixture
def uniform_q():
    return uniform_pmf(4)


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary."""
    state = {}

    def register(number, title):
        state["key"] = (number, title)

    yield register
    if "key" in state:
        number, title = state["key"]
        report = getattr(request.node, "rep_call", None)
        passed = report is not None and report.passed
        # a criterion split over several items passes only if all of them do
        previous = _criteria.get(number, (title, True))[1]
        _criteria[number] = (title, previous and passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}")
