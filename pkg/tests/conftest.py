import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from aerofuse.image import ChannelDescriptor, ChannelRole, Modality
from aerofuse.fusion import Channel
from aerofuse.samples import load_scene
from aerofuse.vgg import load_weights

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(REPO_ROOT, "data")
SCENE_DIRS = tuple(
    os.path.join(DATA_DIR, "scenes", f"scene{i:02d}") for i in (1, 2, 3)
)
WEIGHTS_PATH = os.path.join(DATA_DIR, "weights", "fixture.vggw")


@pytest.fixture(scope="session")
def weights_path():
    assert os.path.exists(WEIGHTS_PATH), "committed weight fixture missing"
    return WEIGHTS_PATH


@pytest.fixture(scope="session")
def weights(weights_path):
    return load_weights(weights_path)


@pytest.fixture(scope="session")
def scenes():
    return tuple(load_scene(d) for d in SCENE_DIRS)


def scene_channels(scene):
    """Standard fusion inputs for a bundled scene: basis plus two features."""
    basis = Channel(scene.basis, ChannelDescriptor(ChannelRole.BASIS, Modality.RGB))
    features = [
        Channel(scene.thermal, ChannelDescriptor(ChannelRole.FEATURE, Modality.THERMAL)),
        Channel(scene.irgb, ChannelDescriptor(ChannelRole.FEATURE, Modality.RGB)),
    ]
    sources = [scene.basis, scene.thermal, scene.irgb]
    return basis, features, sources


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)


# -- acceptance summary -------------------------------------------------------

_acceptance_reports: list = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance_reports.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for report in _acceptance_reports:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")
