import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion covered by the test")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    number, title = marker.args
    entry = item.config._acceptance.setdefault(number, {"title": title, "ok": True, "detail": []})
    if rep.failed:
        entry["ok"] = False
        entry["detail"].append(item.name)
    extra = getattr(item, "_acceptance_note", None)
    if extra and rep.when == "call":
        entry["detail"].append(extra)


@pytest.fixture
def note(request):
    """Attach a short measurement string to the acceptance summary line."""

    def add(text):
        request.node._acceptance_note = text

    return add


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        r = results[number]
        status = "PASS" if r["ok"] else "FAIL"
        detail = "; ".join(r["detail"])
        terminalreporter.write_line(f"{status}  [{number:2d}] {r['title']}" + (f"  ({detail})" if detail else ""))
