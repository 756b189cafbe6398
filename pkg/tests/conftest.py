import numpy as np
import pytest

from gaitphase import evaluation
from gaitphase.config import RunConfig
from gaitphase.dataset import IngestConfig, ingest_dataset, screen_subjects
from gaitphase.synthetic import generate_dataset


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    generate_dataset(root, seed=12345)
    return root


@pytest.fixture(scope="session")
def recordings(dataset_dir):
    return ingest_dataset(dataset_dir, IngestConfig())


@pytest.fixture(scope="session")
def screening(recordings):
    return screen_subjects(recordings)


@pytest.fixture(scope="session")
def quick_config(dataset_dir):
    return RunConfig(root=str(dataset_dir), seed=0).quick()


@pytest.fixture(scope="session")
def prepared(recordings, screening, quick_config):
    retained = [r for r in recordings if r.subject_id not in screening.excluded_subjects]
    return evaluation.prepare_recordings(retained, quick_config)


@pytest.fixture(scope="session")
def folds(prepared):
    return evaluation.make_folds([p.subject_id for p in prepared])


@pytest.fixture(scope="session")
def small_fm(prepared, quick_config):
    """Feature rows for three subjects at one cell; fast to train on."""
    from gaitphase.windowing import WindowSpec

    subset = prepared[:3]
    spec = WindowSpec(300.0, 0.0, quick_config.stride_ms)
    return evaluation.features_for(subset, spec)


@pytest.fixture(scope="session")
def small_folds(small_fm):
    return evaluation.make_folds(np.unique(small_fm.subject))
