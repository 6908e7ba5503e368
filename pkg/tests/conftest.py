import pytest

from diurnal_tda.synth import SynthParams, generate, write_synth

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        marker = report.user_properties and dict(report.user_properties).get("criterion")
        if marker:
            _acceptance.append((marker, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance, key=lambda x: int(x[0].split(".")[0])):
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def synth_stack():
    return generate(SynthParams())


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    return write_synth(tmp_path_factory.mktemp("synth"), SynthParams())
