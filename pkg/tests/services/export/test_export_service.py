import numpy as np
import pytest

from kracl.core.errors import DatasetParseError
from kracl.services.export import export_embeddings, parse_embeddings, write_embeddings
from kracl.services.model import KraclModel


def test_export_round_trip(toy_checkpoint, toy_dataset, tmp_path):
    path = export_embeddings(toy_checkpoint, tmp_path / "toy.emb", toy_dataset)
    entities, relations = parse_embeddings(path)
    expected_entities, expected_relations = KraclModel.from_checkpoint(toy_checkpoint, toy_dataset).encode()

    assert entities.names == toy_dataset.entity_names
    assert relations.names == toy_dataset.relation_names + [f"{name}_inv" for name in toy_dataset.relation_names]
    np.testing.assert_array_equal(entities.vectors, expected_entities.values)
    np.testing.assert_array_equal(relations.vectors, expected_relations.values)


def test_export_loads_dataset_from_config(toy_checkpoint, tmp_path):
    entities, _ = parse_embeddings(export_embeddings(toy_checkpoint, tmp_path / "toy.emb"))
    assert entities.vectors.shape == (8, 8)


def test_file_layout(tmp_path):
    path = write_embeddings(tmp_path / "tiny.emb", ["a", "b"], np.array([[0.5, -1.0], [0.1, 2.0]]), ["r"], np.array([[3.0, 4.0]]))
    assert path.read_text().splitlines() == [
        "#kracl-embeddings 1",
        "[entities] 2 2",
        "0\ta\t0.5 -1.0",
        "1\tb\t0.1 2.0",
        "[relations] 1 2",
        "0\tr\t3.0 4.0",
    ]


def test_empty_relation_section(tmp_path):
    path = write_embeddings(tmp_path / "norel.emb", ["a"], np.ones((1, 3)), [], np.zeros((0, 3)))
    entities, relations = parse_embeddings(path)
    assert entities.vectors.shape == (1, 3)
    assert relations.names == []
    assert relations.vectors.shape == (0, 3)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "#other 1\n",
        "#kracl-embeddings 1\n[entities] 2 2\n0\ta\t1.0 2.0\n",
        "#kracl-embeddings 1\n[entities] 1 2\n1\ta\t1.0 2.0\n[relations] 0 2\n",
        "#kracl-embeddings 1\n[entities] 1 2\n0\ta\t1.0\n[relations] 0 2\n",
        "#kracl-embeddings 1\n[entities] 1 2\n0\ta\t1.0 2.0\n",
    ],
)
def test_malformed_files(tmp_path, text):
    path = tmp_path / "bad.emb"
    path.write_text(text)
    with pytest.raises(DatasetParseError):
        parse_embeddings(path)


def test_unwritable_path(toy_checkpoint, toy_dataset, tmp_path):
    with pytest.raises(OSError):
        export_embeddings(toy_checkpoint, tmp_path / "missing" / "toy.emb", toy_dataset)
