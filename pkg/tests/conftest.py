import time

import numpy as np
import pytest

from mudam.channel import GeometryConfig, synthesize_channel
from mudam.cli import load_config, run_scenario


def random_channel(seed, Mt=8, K=2, L=2, delay_range=(0, 12), noise=1.0, **kw):
    paths = (L,) * K if np.isscalar(L) else tuple(L)
    cfg = GeometryConfig(Mt, K, paths, delay_range=delay_range, rng_seed=seed, **kw)
    return synthesize_channel(cfg, noise)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- bundled scenario runs, shared by the scenario and acceptance tests -----

_RUNS = {}


@pytest.fixture(scope="session")
def bundled(tmp_path_factory):
    """Run a bundled scenario once per session; returns (csv path, seconds)."""

    def get(name):
        if name not in _RUNS:
            out = tmp_path_factory.mktemp(name)
            t0 = time.perf_counter()
            path = run_scenario(load_config(name), out)
            _RUNS[name] = (path, time.perf_counter() - t0)
        return _RUNS[name]

    return get


# --- one summary line per acceptance criterion ------------------------------

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _CRITERIA[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        num = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {num:>2} {label}: {_CRITERIA[name]}")
