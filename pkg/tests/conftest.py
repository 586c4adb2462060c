"""Shared fixtures and the per-criterion summary for the acceptance suite."""

from __future__ import annotations

import pytest

from l2cert import oracle_finite, oracle_free, oracle_free_abelian, oracle_lamplighter
from l2cert.quotients import FiniteQuotient
from l2cert.words import Alphabet

CRITERIA = {
    1: "characteristic sequence exactness (Z, 1 - t)",
    2: "finite-group consistency (Z/2, 1 + s)",
    3: "upper stream dominates lower terms on the corpus",
    4: "determinant-class bracket for the F2 augmentation column",
    5: "quantitative Lueck bound (Z, 1 - t, k <= 20)",
    6: "Fuglede-Kadison determinant of 2 - t",
    7: "L2-torsion of the circle",
    8: "image-dimension formula over small finite groups",
    9: "Fox complexes and first L2-Betti estimates",
    10: "reals toolkit",
}

_results: dict[int, bool] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and short title")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    _results[marker] = report.passed and _results.get(marker, True)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _results[n] else 'FAIL'}  {CRITERIA.get(n, '')}")


@pytest.fixture(scope="session")
def Z():
    return oracle_free_abelian(1)


@pytest.fixture(scope="session")
def Z2():
    return oracle_free_abelian(2)


@pytest.fixture(scope="session")
def F2():
    return oracle_free(["a", "b"])


@pytest.fixture(scope="session")
def C2():
    return oracle_finite(FiniteQuotient.cyclic_product(Alphabet(("s",)), [2]))


@pytest.fixture(scope="session")
def S3():
    # generated by the transposition (0 1) and the 3-cycle (0 1 2)
    q = FiniteQuotient.from_permutations(Alphabet(("x", "y")), [(1, 0, 2), (1, 2, 0)], label="S3")
    return oracle_finite(q)


@pytest.fixture(scope="session")
def L():
    return oracle_lamplighter()
