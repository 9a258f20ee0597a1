import pytest

from hsoscan.apimap import default_catalog
from hsoscan.graphs import build_callgraph
from hsoscan.screen import default_whitelist
from support import load


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def rules():
    return default_whitelist()


@pytest.fixture(scope="session")
def listing1():
    return load("listing1")


@pytest.fixture(scope="session")
def listing1_cg(listing1):
    return build_callgraph(listing1)


# -- acceptance bookkeeping -------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.fixture
def record(request):
    """Collects a one-line detail for the acceptance summary."""
    marker = request.node.get_closest_marker("acceptance")
    notes = []
    yield notes.append
    if marker is not None:
        _ACCEPTANCE.setdefault(marker.args[0], {})["detail"] = "; ".join(notes)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    entry = _ACCEPTANCE.setdefault(marker.args[0], {})
    entry["title"] = marker.args[1]
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        entry["passed"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[n]
        status = "PASS" if e.get("passed") else "FAIL"
        detail = f" ({e['detail']})" if e.get("detail") else ""
        terminalreporter.write_line(f"criterion {n} {status}: {e.get('title', '')}{detail}")
