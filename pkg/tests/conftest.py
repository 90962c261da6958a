import warnings

import pytest

from budgreed.core import CoverageOracle, Instance, ModularOracle


@pytest.fixture
def modular3():
    # values (3,2,1), unit costs, B=2
    return Instance(ModularOracle([3, 2, 1]), [1, 1, 1], 2)


@pytest.fixture
def two_elem():
    # the classic failure of pure density greedy
    return Instance(ModularOracle([0.02, 1.0]), [0.01, 1.0], 1.0)


@pytest.fixture
def cov_oracle():
    # universe {a: 1, b: 2}; e0 covers {a}, e1 covers {a, b}
    return CoverageOracle([1, 2], [[0], [0, 1]])


@pytest.fixture(autouse=True)
def _quiet_drop_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="dropping")
        yield


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not mod.ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(mod.TITLES):
        parts = mod.ACCEPTANCE.get(c)
        if not parts:
            tr.write_line(f"[SKIP] {c}. {mod.TITLES[c]}")
            continue
        ok = all(p[1] for p in parts)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {c}. {mod.TITLES[c]}")
        for name, pok, detail in parts:
            tr.write_line(f"         {'ok ' if pok else 'BAD'} {name}: {detail}")
