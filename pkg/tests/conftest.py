import pytest

_VERDICTS: dict[str, tuple[bool, str]] = {}


class Verdict:
    """Collects the outcome of one acceptance criterion for the terminal summary."""

    def __init__(self, name: str):
        self.name = name
        self.details: list[str] = []
        self.failures: list[str] = []
        self.done = False

    def check(self, ok: bool, text: str) -> bool:
        self.details.append(("ok   " if ok else "FAIL ") + text)
        if not ok:
            self.failures.append(text)
        return ok

    def note(self, text: str) -> None:
        self.details.append("     " + text)

    def conclude(self) -> None:
        self.done = True
        assert not self.failures, "; ".join(self.failures)


@pytest.fixture
def verdict(request):
    v = Verdict(request.node.name)
    yield v
    label = request.node.get_closest_marker("criterion").args[0]
    if not v.done:
        v.details.append("FAIL did not run to completion")
    _VERDICTS[label] = (v.done and not v.failures, "\n".join(v.details))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def _criterion_order(label: str):
    head = label.split()[0]
    digits = head.rstrip("abcdefghijklmnopqrstuvwxyz")
    return int(digits), head[len(digits):]


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_VERDICTS, key=_criterion_order):
        ok, details = _VERDICTS[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
        for line in details.splitlines():
            terminalreporter.write_line(f"        {line}")
