"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import numpy as np
import pytest

ACCEPTANCE = {}  # criterion number -> [title, passed, ran]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = ACCEPTANCE.setdefault(number, [title, True, False])
    if rep.when == "call" or rep.failed:
        entry[2] = entry[2] or not rep.skipped
        if rep.failed:
            entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, ran = ACCEPTANCE[number]
        status = "PASS" if passed and ran else ("FAIL" if not passed else "SKIP")
        terminalreporter.write_line(f"{status} criterion {number}: {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_skew(rng, n, traceless=True):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    W = 0.5 * (X - X.conj().T)
    if traceless:
        W -= np.trace(W) / n * np.eye(n)
    return W
