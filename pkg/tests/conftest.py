import pytest

from cmapcache.model import derive_params, params_from_factors


def brute_subsets(n, k):
    """Independent k-subset oracle: filter all 2^n bitmasks by popcount, then sort."""
    return sorted(tuple(i + 1 for i in range(n) if m >> i & 1) for m in range(1 << n) if bin(m).count("1") == k)


@pytest.fixture
def ex1():
    return derive_params(5, 3, 2, 2, 10)


@pytest.fixture
def fig2():
    return derive_params(10, 8, "9/2", 1, 45)


@pytest.fixture
def fig3():
    return derive_params(10, 7, 12, 1, 120)


# small in-class systems covering t_a = 0, 1, 2 and uniform / non-uniform profiles
SMALL = [(5, 3, 1, 2), (5, 2, 2, 1), (6, 3, 1, 1), (5, 3, 0, 1), (6, 4, 1, 2), (7, 3, 2, 1), (6, 5, 0, 3)]


@pytest.fixture(params=SMALL, ids=lambda f: "lam{}-r{}-ta{}-tp{}".format(*f))
def small(request):
    return params_from_factors(*request.param)


# ---------- acceptance summary ----------

_acceptance: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::test_", 1)[1]
    outcome, total = _acceptance.get(name, ("passed", 0.0))
    if report.failed:
        outcome = "failed"
    _acceptance[name] = (outcome, total + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, (outcome, seconds) in sorted(_acceptance.items(), key=lambda kv: int(kv[0].split("_")[1])):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark} {name} ({seconds:.1f}s)")
