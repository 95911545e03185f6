import numpy as np
import pytest

from neurochannel.data import (
    BoundaryGrid,
    Dataset,
    boundary_scan,
    load_csv,
    make_majority,
    make_xor,
    resolve_dataset,
    write_boundary_csv,
)
from neurochannel.errors import ConfigError, DatasetFormatError, ShapeError
from neurochannel.layer import LayerParams
from neurochannel.network import Network


def test_xor_truth_table():
    ds = make_xor()
    table = {tuple(x): t for x, t in zip(ds.inputs.tolist(), ds.targets.tolist())}
    assert table == {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}
    assert (ds.input_dim, ds.num_classes, len(ds)) == (2, 2, 4)
    assert np.sum(ds.targets) == 2  # balanced


def test_majority3_truth_table():
    ds = make_majority(3)
    expected = {
        (0, 0, 0): 0,
        (0, 0, 1): 0,
        (0, 1, 0): 0,
        (0, 1, 1): 1,
        (1, 0, 0): 0,
        (1, 0, 1): 1,
        (1, 1, 0): 1,
        (1, 1, 1): 1,
    }
    table = {tuple(x): t for x, t in zip(ds.inputs.tolist(), ds.targets.tolist())}
    assert table == expected
    assert len(ds) == 8 and np.sum(ds.targets) == 4


def test_majority_general_popcount_oracle():
    for k in (3, 5):
        ds = make_majority(k)
        assert len(ds) == 2**k
        for x, t in zip(ds.inputs, ds.targets):
            assert t == (1 if int(np.sum(x)) > k // 2 else 0)
    row = make_majority(5)
    idx = int("11010", 2)
    assert row.targets[idx] == 1  # popcount 3 of 5


def test_majority_rejects_even_or_small():
    for k in (2, 4, 1, 0, -3):
        with pytest.raises(ConfigError):
            make_majority(k)


def test_resolve_dataset_selectors(tmp_path):
    assert len(resolve_dataset("xor")) == 4
    assert len(resolve_dataset("majority3")) == 8
    assert len(resolve_dataset("majority5")) == 32
    csv = tmp_path / "d.csv"
    csv.write_text("0,0,0\n1,1,1\n")
    assert len(resolve_dataset(f"csv:{csv}")) == 2
    with pytest.raises(ConfigError):
        resolve_dataset("parity")
    with pytest.raises(ConfigError):
        resolve_dataset("majority4")


def test_load_csv_round_trips_xor(tmp_path):
    path = tmp_path / "xor.csv"
    xor = make_xor()
    with open(path, "w") as fh:
        fh.write("a,b,label\n")
        for x, t in zip(xor.inputs, xor.targets):
            fh.write(f"{x[0]:g},{x[1]:g},{t}\n")
    loaded = load_csv(path)
    assert np.array_equal(loaded.inputs, xor.inputs)
    assert np.array_equal(loaded.targets, xor.targets)
    assert (loaded.input_dim, loaded.num_classes) == (2, 2)


def test_load_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0,0\n0,1,1,9\n")
    with pytest.raises(DatasetFormatError) as err:
        load_csv(path)
    assert err.value.line == 2 and "2" in str(err.value)

    path.write_text("0,x,1\n")
    with pytest.raises(DatasetFormatError):
        load_csv(path)

    path.write_text("")
    with pytest.raises(DatasetFormatError):
        load_csv(path)

    path.write_text("0,0,1e999\n")
    with pytest.raises(DatasetFormatError):
        load_csv(path)

    path.write_text("0,0,1.5\n")
    with pytest.raises(DatasetFormatError):
        load_csv(path)


def test_load_csv_sparse_labels(tmp_path):
    path = tmp_path / "sparse.csv"
    path.write_text("0.5,0\n0.25,2\n")
    ds = load_csv(path)
    assert ds.num_classes == 3  # highest label + 1
    assert ds.input_dim == 1


def test_dataset_invariants():
    with pytest.raises(ShapeError):
        Dataset(np.zeros((0, 2)), np.zeros(0), input_dim=2, num_classes=2)
    with pytest.raises(ShapeError):
        Dataset(np.zeros((2, 2)), np.array([0, 2]), input_dim=2, num_classes=2)
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 0.0]]), np.array([0]), input_dim=2, num_classes=2)


def test_boundary_grid_axis_hits_endpoints():
    grid = BoundaryGrid(grid_min=-0.5, grid_max=1.5, resolution=41)
    axis = grid.axis()
    assert axis[0] == -0.5 and axis[-1] == 1.5
    assert len(axis) == 41
    with pytest.raises(ConfigError):
        BoundaryGrid(resolution=1)
    with pytest.raises(ConfigError):
        BoundaryGrid(grid_min=1.0, grid_max=1.0)


def zero_network():
    layers = [
        LayerParams(np.zeros((3, 2)), np.zeros((3, 2)), np.zeros(3)),
        LayerParams(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros(2)),
    ]
    return Network(layers, [2, 3, 2])


def test_boundary_scan_corners_and_order():
    grid = BoundaryGrid(grid_min=0.0, grid_max=1.0, resolution=2)
    rows = boundary_scan(zero_network(), grid)
    assert [(r[0], r[1]) for r in rows] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_boundary_scan_zero_network_is_uniform():
    grid = BoundaryGrid(grid_min=-0.5, grid_max=1.5, resolution=5)
    rows = boundary_scan(zero_network(), grid)
    assert len(rows) == 25
    for _, _, cls, p1 in rows:
        assert cls == 0  # argmax tie resolves to the lowest class
        assert p1 == pytest.approx(0.5, abs=1e-15)


def test_boundary_scan_probabilities_in_range():
    net = Network(
        [
            LayerParams(
                np.array([[0.8, -0.4], [0.1, 0.9]]),
                np.full((2, 2), 0.3),
                np.array([0.2, -0.1]),
            )
        ],
        [2, 2],
    )
    rows = boundary_scan(net, BoundaryGrid(resolution=4))
    assert len(rows) == 16
    assert all(0.0 <= r[3] <= 1.0 for r in rows)


def test_boundary_scan_rejects_wrong_input_dim():
    net = Network([LayerParams(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros(2))], [3, 2])
    with pytest.raises(ConfigError):
        boundary_scan(net, BoundaryGrid(resolution=2))


def test_write_boundary_csv(tmp_path):
    grid = BoundaryGrid(grid_min=0.0, grid_max=1.0, resolution=2)
    rows = boundary_scan(zero_network(), grid)
    path = tmp_path / "b.csv"
    write_boundary_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2,class,p1"
    assert len(lines) == 5
    assert lines[1].startswith("0,0,0,")
