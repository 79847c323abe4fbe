import pytest


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    status = "PASS" if report.passed else "FAIL"
    line = f"{status} criterion {props['criterion']}: {props.get('title', '')}"
    if "detail" in props:
        line += f" [{props['detail']}]"
    _lines.append((props["criterion"], line))


_lines: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not _lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_lines):
        terminalreporter.write_line(line)


@pytest.fixture
def criterion(record_property):
    """Tag the running test as acceptance criterion ``number`` and attach a result detail."""

    class _Criterion:
        def __call__(self, number: int, title: str):
            record_property("criterion", number)
            record_property("title", title)
            return self

        def detail(self, text: str):
            record_property("detail", text)

    return _Criterion()
