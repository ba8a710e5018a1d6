import random
from pathlib import Path

import pytest

from webcensus.capture.har import read_har_file
from webcensus.census import build_record
from webcensus.fixtures import write_corpus
from webcensus.uri import default_ruleset

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """The 10,050-page synthetic corpus, written once per session."""
    return write_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.fixture(scope="session")
def corpus_results(corpus):
    results = []
    for path in corpus.har_files:
        results.extend(read_har_file(path))
    return results


@pytest.fixture(scope="session")
def corpus_records(corpus_results):
    ruleset = default_ruleset()
    return [build_record(r, ruleset) for r in corpus_results]


@pytest.fixture(scope="session")
def record_subsample(corpus_records):
    """A few hundred records, enough variety for property tests without the full corpus cost."""
    return random.Random(7).sample(corpus_records, 400)


# --- one summary line per acceptance criterion ------------------------------

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): test belongs to an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or (rep.when == "setup" and not rep.passed)):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "results": [], "notes": []})
    status = "skipped" if rep.skipped else "passed" if rep.passed else "failed"
    entry["results"].append(status)
    if rep.skipped and isinstance(rep.longrepr, tuple):
        entry["notes"].append(rep.longrepr[2].removeprefix("Skipped: "))
    entry["notes"] += [str(v) for k, v in item.user_properties if k == "note"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        results = entry["results"]
        if "failed" in results:
            status = "FAIL"
        elif all(r == "skipped" for r in results):
            status = "SKIP"
        else:
            status = "PASS"
        notes = "; ".join(dict.fromkeys(entry["notes"]))
        line = f"criterion {number} {status}: {entry['title']} ({len(results)} checks)"
        terminalreporter.write_line(line + (f" [{notes}]" if notes else ""))
