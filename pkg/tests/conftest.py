from pathlib import Path
from typing import Iterable, Tuple

import numpy as np
import pytest

from kracl.core.config import settings

Row = Tuple[str, str, str]


def write_split(path: Path, rows: Iterable[Row]) -> None:
    path.write_text("".join(f"{s}\t{r}\t{o}\n" for s, r, o in rows), encoding="utf-8")


def write_dataset_files(directory: Path, train: Iterable[Row], valid: Iterable[Row] = (), test: Iterable[Row] = ()) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    write_split(directory / "train.txt", train)
    write_split(directory / "valid.txt", valid)
    write_split(directory / "test.txt", test)
    return directory


# Eight people in two families with parent/sibling/spouse facts
TOY_TRAIN = [
    ("ann", "parent_of", "carl"),
    ("ann", "parent_of", "dora"),
    ("bob", "parent_of", "carl"),
    ("bob", "parent_of", "dora"),
    ("ann", "spouse_of", "bob"),
    ("bob", "spouse_of", "ann"),
    ("carl", "sibling_of", "dora"),
    ("dora", "sibling_of", "carl"),
    ("eve", "parent_of", "gus"),
    ("eve", "parent_of", "hal"),
    ("fred", "parent_of", "gus"),
    ("eve", "spouse_of", "fred"),
    ("fred", "spouse_of", "eve"),
    ("gus", "sibling_of", "hal"),
]
TOY_VALID = [("fred", "parent_of", "hal"), ("hal", "sibling_of", "gus")]
TOY_TEST = [("carl", "sibling_of", "ann"), ("eve", "parent_of", "dora")]


@pytest.fixture
def toy_dir(tmp_path) -> Path:
    return write_dataset_files(tmp_path / "toy", TOY_TRAIN, TOY_VALID, TOY_TEST)


@pytest.fixture
def make_dataset_dir(tmp_path):
    """Writes benchmark-layout split files for the given name-triples under tmp_path."""
    def make(name: str, train: Iterable[Row], valid: Iterable[Row] = (), test: Iterable[Row] = ()) -> Path:
        return write_dataset_files(tmp_path / name, train, valid, test)

    return make


@pytest.fixture
def toy_dataset(toy_dir):
    from kracl.services.data import load_dataset

    return load_dataset(toy_dir)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def benchmark_dir(name: str) -> Path:
    path = Path(settings.DATA_ROOT) / name
    if not (path / "train.txt").is_file():
        pytest.skip(f"{name} benchmark files not found under {settings.DATA_ROOT}")
    return path


@pytest.fixture
def kinship_dir() -> Path:
    return benchmark_dir("kinship")


@pytest.fixture
def umls_dir() -> Path:
    return benchmark_dir("umls")


# Small enough that a full train() call finishes in well under a second
TOY_HYPERPARAMETERS = dict(
    dim=8,
    batch_size=8,
    learning_rate=0.01,
    epochs=2,
    gnn_layers=1,
    encoder_dropout=0.0,
    head_kind="DistMult",
    eval_every=1,
    precision="float64",
)


@pytest.fixture
def toy_train_config(toy_dir):
    from kracl.models.training import TrainConfig

    return TrainConfig(dataset=str(toy_dir), **TOY_HYPERPARAMETERS)


@pytest.fixture
def toy_checkpoint(toy_train_config, toy_dataset):
    from kracl.services.training import train

    return train(toy_train_config, toy_dataset)


@pytest.fixture
def toy_hyperparameters():
    return dict(TOY_HYPERPARAMETERS)
