import pytest

from robustrag.benchmark import resolve_inputs, run_benchmark
from robustrag.bm25 import Bm25Index
from robustrag.config import load_config
from robustrag.corpus import Corpus, Document

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    crit = getattr(report, "_criterion", None)
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        n, title = crit
        prev = _CRITERIA.get(n, (title, "PASS"))[1]
        status = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _CRITERIA[n] = (title, status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2} [{status}] {title}")


@pytest.fixture(scope="session")
def toy_inputs():
    return resolve_inputs(load_config())


@pytest.fixture(scope="session")
def toy_index(toy_inputs):
    return Bm25Index.build(toy_inputs[0])


@pytest.fixture(scope="session")
def toy_run(toy_inputs, toy_index):
    corpus, examples = toy_inputs
    return run_benchmark(load_config(), None, corpus, examples, toy_index)


@pytest.fixture
def mona_corpus():
    return Corpus([
        Document("gold", "Leonardo da Vinci", "Leonardo da Vinci painted the Mona Lisa in Florence."),
        Document("echo", "Popular belief", "Michelangelo painted the Mona Lisa, according to a story."),
        Document("ocean", "Marine biology", "Coral reefs shelter a quarter of all ocean fish."),
        Document("sistine", "Michelangelo", "Michelangelo painted the ceiling of the Sistine Chapel."),
    ])
