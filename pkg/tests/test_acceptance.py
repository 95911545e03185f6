"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import math
import time

import numpy as np
import pytest

from neurochannel.data import BoundaryGrid, boundary_scan, make_majority, make_xor, write_boundary_csv
from neurochannel.kernel import ChannelSemantics, OpTally, bypass_transmit, channel_transmit
from neurochannel.layer import LayerParams, layer_backward, layer_forward
from neurochannel.network import TrainConfig, init_network, load_checkpoint, save_checkpoint, train
from neurochannel.oracle import (
    exhaustive_eval,
    ffnn_forward_full,
    gradcheck,
    live_op_tally,
    predict_op_budget,
)

PAIRS = 100_000


def report(name, ok, detail):
    print(f"criterion {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {name} failed: {detail}"


def run_sweep(topology, dataset_name, dataset, epochs):
    results = []
    worst_time = 0.0
    for seed in range(10):
        cfg = TrainConfig(
            topology=topology,
            learning_rate=0.001,
            momentum=0.9,
            epochs=epochs,
            seed=seed,
            dataset=dataset_name,
            channel_semantics=ChannelSemantics.ALGORITHM1,
        )
        start = time.perf_counter()
        net, _ = train(cfg)
        worst_time = max(worst_time, time.perf_counter() - start)
        results.append((seed, net, exhaustive_eval(net, dataset)))
    return results, worst_time


@pytest.fixture(scope="module")
def xor_sweep():
    return run_sweep([2, 4, 2], "xor", make_xor(), epochs=1000)


@pytest.fixture(scope="module")
def majority_sweep():
    return run_sweep([3, 8, 2], "majority3", make_majority(3), epochs=200)


def test_criterion_1_xor_reproduction(xor_sweep):
    results, worst_time = xor_sweep
    wins = sum(acc == 1.0 for _, _, acc in results)
    report(
        "1 xor-reproduction",
        wins >= 5 and worst_time < 5.0,
        f"{wins}/10 seeds at 100%, slowest seed {worst_time:.2f}s",
    )


def test_criterion_2_majority_reproduction(majority_sweep):
    results, worst_time = majority_sweep
    wins = sum(acc == 1.0 for _, _, acc in results)
    report(
        "2 majority-reproduction",
        wins >= 5 and worst_time < 5.0,
        f"{wins}/10 seeds at 100%, slowest seed {worst_time:.2f}s",
    )


def test_criterion_3_op_audit_exact():
    mismatches = []
    for topology in ([1, 1], [2, 4, 2], [3, 8, 2], [1024, 1]):
        net = init_network(topology, seed=0)
        tally = live_op_tally(net)
        predicted = predict_op_budget(topology, "ncn").as_view()
        if tally.budget_view() != predicted or tally.fmul != 0:
            mismatches.append(("ncn", topology))
        ffnn_tally = OpTally()
        ffnn_forward_full(topology, np.zeros(topology[0]), ffnn_tally)
        ffnn_predicted = predict_op_budget(topology, "ffnn").as_view()
        expected_fmul = sum(d * m for d, m in zip(topology[:-1], topology[1:]))
        if ffnn_tally.budget_view() != ffnn_predicted or ffnn_tally.fmul != expected_fmul:
            mismatches.append(("ffnn", topology))
    report(
        "3 op-audit",
        not mismatches,
        "live == predicted for [1,1], [2,4,2], [3,8,2], [1024,1], zero tolerance"
        if not mismatches
        else f"mismatches: {mismatches}",
    )


def test_criterion_4_gradient_oracle():
    total = 0
    worst = 0.0
    for topology in ([2, 4, 2], [3, 8, 2]):
        result = gradcheck(topology, seed=0, min_coords=600, h=1e-5, zone_radius=1e-3)
        total += result.checked
        worst = max(worst, result.max_rel_error)
    report(
        "4 gradient-oracle",
        total >= 1000 and worst < 1e-4,
        f"{total} coordinates, max relative error {worst:.3g}",
    )


def test_criterion_5_dead_gradient_escape():
    deviations = []
    for d in (1, 4):
        widths = np.full((1, d), 1e-6)
        neuro = np.full((1, d), 2.0)
        params = LayerParams(widths, neuro, np.zeros(1))
        x = np.ones(d)
        _, trace = layer_forward(params, x, OpTally())
        grads = layer_backward(params, trace, [1.0])
        expected = 1.0 / math.sqrt(d)
        if grads.d_x[0] == 0.0:
            deviations.append((d, "dx is zero"))
        elif abs(grads.d_x[0] - expected) > 1e-9:
            deviations.append((d, abs(grads.d_x[0] - expected)))
    report(
        "5 dead-gradient-escape",
        not deviations,
        "bypass keeps dx = 1/sqrt(d) with the channel shut (within 1e-9)"
        if not deviations
        else f"deviations: {deviations}",
    )


def _random_pairs(seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(PAIRS, 2)) * rng.choice(
        [0.01, 0.1, 1.0, 10.0], size=(PAIRS, 2)
    )
    values[:10] = [[0.0, 1.0], [1.0, 0.0], [0.0, 0.0], [0.5, 0.5], [-0.5, 0.5],
                   [0.5, -0.5], [-0.5, -0.5], [1e-12, 1.0], [-2.0, 2.0], [3.0, -3.0]]
    return values


def test_criterion_6_kernel_property_suite():
    failures = []

    tally = OpTally()
    for x, w in _random_pairs(1):
        channel_transmit(x, w, tally)
        bypass_transmit(x, w, tally)
    if tally.fmul != 0:
        failures.append("ZERO-MUL")

    t = OpTally()
    for x, w in _random_pairs(2):
        if abs(channel_transmit(x, w, t)) != min(abs(x), abs(w)):
            failures.append("CLAMP channel")
            break
        if abs(bypass_transmit(x, w, t)) != min(abs(x), abs(w)):
            failures.append("CLAMP bypass")
            break

    for x, n in _random_pairs(3):
        out = bypass_transmit(x, n, t)
        if min(abs(x), abs(n)) > 0 and np.sign(out) != np.sign(x):
            failures.append("SIGN-PRESERVATION")
            break

    for x, n in _random_pairs(4):
        if bypass_transmit(x, n, t) != bypass_transmit(x, -n, t):
            failures.append("W-SIGN-INVARIANCE")
            break

    for x, w in _random_pairs(5):
        if (channel_transmit(x, w, t) > 0) != (x > 0 and w > 0):
            failures.append("EXCITATORY-ONLY-WHEN-ALIGNED")
            break

    report(
        "6 kernel-properties",
        not failures,
        f"5 properties over {PAIRS} random pairs each"
        if not failures
        else f"failed: {failures}",
    )


def test_criterion_7_determinism(tmp_path):
    cfg = dict(topology=[2, 4, 2], epochs=150, seed=0, dataset="xor")
    paths = []
    for name in ("first.ckpt", "second.ckpt"):
        net, _ = train(TrainConfig(**cfg))
        path = tmp_path / name
        save_checkpoint(net, path)
        paths.append(path)
    identical = paths[0].read_bytes() == paths[1].read_bytes()

    loaded = load_checkpoint(paths[0])
    resaved = tmp_path / "resaved.ckpt"
    save_checkpoint(loaded, resaved)
    round_trip = paths[0].read_bytes() == resaved.read_bytes()

    report(
        "7 determinism",
        identical and round_trip,
        f"identical training runs bit-equal: {identical}, save/load round-trip bit-exact: {round_trip}",
    )


def test_criterion_8_boundary_artifact(xor_sweep, tmp_path):
    results, _ = xor_sweep
    converged = [net for _, net, acc in results if acc == 1.0]
    assert converged, "no converged model available for the boundary artifact"
    net = converged[0]

    # 41 points over [-0.5, 1.5] step 0.05: the truth-table corners are
    # exact lattice points
    grid = BoundaryGrid(grid_min=-0.5, grid_max=1.5, resolution=41)
    rows = boundary_scan(net, grid)
    path = tmp_path / "boundary.csv"
    write_boundary_csv(rows, path)
    lines = path.read_text().splitlines()

    corner_classes = {}
    for line in lines[1:]:
        x1, x2, cls, _ = line.split(",")
        key = (float(x1), float(x2))
        if key in {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}:
            corner_classes[key] = int(cls)
    expected = {(0.0, 0.0): 0, (0.0, 1.0): 1, (1.0, 0.0): 1, (1.0, 1.0): 0}
    report(
        "8 boundary-artifact",
        len(lines) == 1 + grid.resolution**2 and corner_classes == expected,
        f"{len(lines) - 1} rows == {grid.resolution}^2, corners {corner_classes}",
    )
