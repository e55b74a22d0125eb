"""Collects one verdict line per acceptance criterion and prints them at the
end of the session."""

_VERDICTS: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or report.when != "call":
        return
    props = dict(report.user_properties)
    label = props.get("criterion")
    if label is None:
        return
    _VERDICTS[label] = ("PASS" if report.passed else "FAIL", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_VERDICTS, key=lambda s: int(s[1:].split()[0])):
        status, detail = _VERDICTS[label]
        terminalreporter.write_line(f"{status}  {label}: {detail}")
