import os
from pathlib import Path

import numpy as np
import pytest

from zeroday.cli.config import RunConfig
from zeroday.dataset import LabeledDataset, SyntheticSpec, generate_synthetic

BENIGN = "benign"


def gaussian_rows(n, d, seed=0, scale=1.0):
    return np.random.default_rng(seed).normal(0.0, scale, size=(n, d))


def labelled(features, labels):
    return LabeledDataset(np.asarray(features, dtype=float), labels, (), BENIGN)


@pytest.fixture
def data_dir():
    path = Path(__file__).parent / "data"
    return path.resolve()


@pytest.fixture
def run_config(request, data_dir):
    filename = request.node.get_closest_marker("config_file").args[0]
    return RunConfig.load(data_dir / filename)


@pytest.fixture
def in_tmp(tmp_path):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    yield tmp_path
    os.chdir(cwd)


# far: 6 units off every feature; zero: the benign distribution itself
DESK_SPEC = SyntheticSpec(
    n_benign=4000,
    n_attack_classes=2,
    n_features=10,
    benign_covariance_rank=3,
    attack_offsets=[6.0, 0.0],
    noise_sigma=0.2,
    seed=11,
    n_attack=2000,
    class_names=("far", "zero"),
)


@pytest.fixture(scope="session")
def desk_data():
    return generate_synthetic(DESK_SPEC)
