import numpy as np
import pytest

from gmol.core import GmolParams

# parameter points used throughout: the three simulation scenarios plus a
# Marshall-Olkin point (lam = 1)
SCENARIOS = [
    GmolParams(0.2, 0.6, 0.5, 0.8),
    GmolParams(0.1, 0.3, 1.5, 3.0),
    GmolParams(0.5, 0.9, 9.0, 7.0),
]
MOL_POINT = GmolParams(0.754, 1.0, 2.512, 1.0)


@pytest.fixture(params=SCENARIOS, ids=lambda t: f"a{t.alpha}-l{t.lam}-t{t.tau}-b{t.beta}")
def scenario(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL verdict, then assert it."""

    def record(label: str, ok: bool | None, detail: str = "") -> None:
        status = "DECLARED" if ok is None else "PASS" if ok else "FAIL"
        line = f"{status}  {label}" + (f"  [{detail}]" if detail else "")
        _VERDICTS.append(line)
        print(line)
        if ok is None:
            pytest.skip(detail)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
