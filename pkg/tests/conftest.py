import pytest

from levy_ergodicity import Drift, KernelSpec, LevyTypeModel


def make_model(A=1.0, kappa=1.0, **kernel):
    return LevyTypeModel(drift=Drift(kind="power", A=A, kappa=kappa), kernel=KernelSpec(**kernel))


@pytest.fixture
def ou_stable():
    return make_model(alpha=1.5)


@pytest.fixture
def zero_kernel_ou():
    return make_model(c=0.0, alpha=1.5)


ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, text = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = ACCEPTANCE.get(n, (text, True))
        ACCEPTANCE[n] = (text, prev[1] and report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        text, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
