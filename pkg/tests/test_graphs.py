import pytest
import torch

from bench.graphs import (
    GraphDataset,
    concat_datasets,
    load_edge_list,
    load_fixture18,
    load_graph_dataset,
    load_node_features,
    perturb_graph_features,
    write_edge_list,
    write_node_features,
)
from sagvae.autodiff import DTYPE, seeded_generator
from sagvae.errors import DatasetFileMissingError, DimensionError, ParameterError


def _triangle_dataset(m: int = 4) -> GraphDataset:
    adjacency = torch.tensor([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=DTYPE)
    features = torch.rand(m, 3, 2, generator=seeded_generator(0), dtype=DTYPE)
    return GraphDataset(features=features, adjacency=adjacency, name="tiny")


def test_fixture18_graph():
    ds = load_fixture18()
    assert (ds.m, ds.n, ds.d) == (1, 18, 6)
    assert ds.edge_count == 27
    assert ds.training_tensor().shape == (1, 108)


def test_edge_list_round_trip(tmp_path):
    ds = _triangle_dataset()
    path = write_edge_list(ds.adjacency, tmp_path / "edges.csv")
    assert path.read_text().splitlines()[0] == "src,dst"
    assert torch.equal(load_edge_list(path, n=3), ds.adjacency)


def test_edge_list_validation(tmp_path):
    path = tmp_path / "loops.csv"
    path.write_text("src,dst\n0,1\n2,2\n")
    with pytest.raises(ParameterError):
        load_edge_list(path)
    with pytest.raises(ParameterError):
        load_edge_list(tmp_path / "loops.csv", n=2)
    with pytest.raises(DatasetFileMissingError):
        load_edge_list(tmp_path / "absent.csv")


def test_node_features_npy_and_csv(tmp_path):
    ds = _triangle_dataset()
    write_node_features(ds.features, tmp_path / "x.npy")
    assert torch.equal(load_node_features(tmp_path / "x.npy"), ds.features)

    write_node_features(ds.features[:1], tmp_path / "one.csv")
    assert torch.equal(load_node_features(tmp_path / "one.csv"), ds.features[:1])
    with pytest.raises(ParameterError):
        write_node_features(ds.features, tmp_path / "many.csv")


def test_load_graph_dataset(tmp_path):
    ds = _triangle_dataset()
    write_edge_list(ds.adjacency, tmp_path / "edges.csv")
    write_node_features(ds.features, tmp_path / "x.npy")
    loaded = load_graph_dataset(tmp_path / "edges.csv", tmp_path / "x.npy")
    assert loaded.name == "edges"
    assert torch.equal(loaded.adjacency, ds.adjacency)


def test_dataset_validation():
    features = torch.zeros(2, 3, 1, dtype=DTYPE)
    with pytest.raises(DimensionError):
        GraphDataset(features=features, adjacency=torch.zeros(2, 2, dtype=DTYPE))
    asymmetric = torch.zeros(3, 3, dtype=DTYPE)
    asymmetric[0, 1] = 1
    with pytest.raises(ParameterError):
        GraphDataset(features=features, adjacency=asymmetric)
    with pytest.raises(ParameterError):
        GraphDataset(features=features, adjacency=torch.eye(3, dtype=DTYPE))


def test_concat_requires_shared_graph():
    ds = _triangle_dataset()
    assert concat_datasets([ds, ds]).m == 8
    other = GraphDataset(features=ds.features, adjacency=torch.zeros(3, 3, dtype=DTYPE))
    with pytest.raises(ParameterError):
        concat_datasets([ds, other])


def test_zero_perturbation_is_identity():
    ds = _triangle_dataset()
    out = perturb_graph_features(ds, dropout_rate=0.0, noise_std=0.0, seed=1)
    assert torch.equal(out.features, ds.features)
    assert torch.equal(out.adjacency, ds.adjacency)


def test_dropout_rate_is_respected():
    ds = GraphDataset(
        features=torch.ones(1, 10, 3, dtype=DTYPE),
        adjacency=torch.zeros(10, 10, dtype=DTYPE),
    )
    out = perturb_graph_features(ds, dropout_rate=0.3, noise_std=0.0, copies=1000, seed=2)
    assert out.m == 1000
    dropped = (out.features.abs().sum(dim=-1) == 0).double().mean().item()
    assert abs(dropped - 0.3) < 0.02


def test_perturbation_is_seeded():
    ds = _triangle_dataset()
    a = perturb_graph_features(ds, 0.2, 0.1, copies=3, seed=5)
    b = perturb_graph_features(ds, 0.2, 0.1, copies=3, seed=5)
    assert torch.equal(a.features, b.features)


@pytest.mark.parametrize("kwargs", [
    {"dropout_rate": 1.0, "noise_std": 0.0},
    {"dropout_rate": -0.1, "noise_std": 0.0},
    {"dropout_rate": 0.0, "noise_std": -1.0},
    {"dropout_rate": 0.0, "noise_std": 0.0, "copies": 0},
])
def test_invalid_perturbation_arguments(kwargs):
    with pytest.raises(ParameterError):
        perturb_graph_features(_triangle_dataset(), **kwargs)
