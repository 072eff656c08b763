import numpy as np
import pytest

from webintel.suffixes import PublicSuffixList

from . import _acceptance_log


@pytest.fixture(scope="session")
def suffix_table() -> PublicSuffixList:
    return PublicSuffixList(
        ["com", "net", "org", "uk", "co.uk", "xyz", "top", "info", "biz", "club", "online", "io"]
    )


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = _acceptance_log.ENTRIES
    if not entries:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, seconds in entries:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {name} ({seconds:.2f}s)")
