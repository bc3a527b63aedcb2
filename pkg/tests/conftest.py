import pytest

from labeltopics import synthetic

from helpers import planted

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def four_topics():
    return planted(synthetic.SyntheticSpec(topics=4, docs_per_topic=250, vocab_per_topic=50, seed=0))


@pytest.fixture
def acceptance():
    """Record a criterion's outcome for the end-of-run summary."""
    def record(number, description, passed, detail=""):
        ACCEPTANCE[number] = (description, bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        description, passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {description}" + (f"  ({detail})" if detail else ""))
