import numpy as np
import pytest

from isac_beamopt.model import SystemConfig, build_scene, complex_normal, generate_channels
from isac_beamopt.sgpi import project_power


@pytest.fixture
def cfg():
    return SystemConfig()


@pytest.fixture
def scene(cfg):
    return build_scene(cfg)


@pytest.fixture
def channels(cfg):
    return generate_channels(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_feasible(rng, shape, p_tx):
    return project_power(complex_normal(rng, shape), p_tx)


def random_hermitian(rng, n):
    x = complex_normal(rng, (n, n))
    return 0.5 * (x + x.conj().T)


# -- acceptance summary -------------------------------------------------------------
# Tests tagged @pytest.mark.acceptance("C<n>", "title") are grouped per criterion
# and reported as one PASS/FAIL line at the end of the run.

_CRITERIA = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None and marker.args:
            item.user_properties.append(("criterion", marker.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    cid, title = props["criterion"]
    entry = _CRITERIA.setdefault(cid, {"title": title, "failed": False, "seen": False})
    if report.when == "call" or report.failed:
        entry["seen"] = True
        entry["failed"] |= report.failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        entry = _CRITERIA[cid]
        status = "FAIL" if entry["failed"] else ("PASS" if entry["seen"] else "SKIP")
        terminalreporter.write_line(f"{cid:<4} {status}  {entry['title']}")
