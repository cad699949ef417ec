import warnings

import pytest

from pefetsim.errors import OutOfCalibrationRange, ReadDisturbWarning


@pytest.fixture(autouse=True)
def _quiet_calibration_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfCalibrationRange)
        warnings.simplefilter("ignore", ReadDisturbWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
