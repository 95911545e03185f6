"""Command-line front door: train, eval, count-ops, boundary, gradcheck.

Commands read a flat ``key = value`` config file when ``--config`` is given
and let individual flags override file values. Lines documented as machine
output (``accuracy=...``, the CSV tables) go to stdout; prose goes to
stderr. Exit codes: 0 success, 1 config, 2 IO, 3 shape/dimension,
4 divergence, 5 audit or gradcheck failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .data import BoundaryGrid, boundary_scan, make_xor, resolve_dataset, write_boundary_csv
from .errors import (
    AuditError,
    CheckpointError,
    ConfigError,
    DatasetFormatError,
    DivergedError,
    ShapeError,
)
from .kernel import ChannelSemantics, OpTally
from .network import (
    TrainConfig,
    forward_full,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .oracle import (
    ffnn_forward_full,
    gradcheck,
    live_op_tally,
    predict_op_budget,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_SHAPE = 3
EXIT_DIVERGED = 4
EXIT_AUDIT = 5

# every key a config file may carry, with its default
CONFIG_DEFAULTS = {
    "topology": None,
    "learning_rate": 0.001,
    "momentum": 0.9,
    "epochs": 1000,
    "seed": 0,
    "dataset": "xor",
    "channel_semantics": "algorithm1",
    "out": "model.ckpt",
    "grid_min": -0.5,
    "grid_max": 1.5,
    "resolution": 200,
}


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` comments and blank lines allowed."""
    settings = {}
    with open(path, "r", encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{no}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_DEFAULTS:
                raise ConfigError(f"{path}:{no}: unknown config key {key!r}")
            settings[key] = value
    return settings


def _parse_topology(text) -> list[int]:
    if isinstance(text, list):
        return text
    try:
        return [int(part) for part in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"topology must be comma-separated integers, got {text!r}") from None


def _parse_semantics(text) -> ChannelSemantics:
    if isinstance(text, ChannelSemantics):
        return text
    try:
        return ChannelSemantics(text)
    except ValueError:
        choices = ", ".join(s.value for s in ChannelSemantics)
        raise ConfigError(f"channel_semantics must be one of {choices}, got {text!r}") from None


def _coerce(key: str, value):
    """Convert a raw config-file string to the key's native type."""
    if value is None or not isinstance(value, str):
        return value
    try:
        if key == "topology":
            return _parse_topology(value)
        if key in ("learning_rate", "momentum", "grid_min", "grid_max"):
            return float(value)
        if key in ("epochs", "seed", "resolution"):
            return int(value)
    except ValueError:
        raise ConfigError(f"bad value {value!r} for config key {key!r}") from None
    if key == "channel_semantics":
        _parse_semantics(value)
    return value


def resolve_settings(config_path, overrides: dict) -> dict:
    """defaults < config file < command-line flags."""
    settings = dict(CONFIG_DEFAULTS)
    if config_path is not None:
        for key, value in parse_config_file(config_path).items():
            settings[key] = _coerce(key, value)
    for key, value in overrides.items():
        if value is not None:
            settings[key] = _coerce(key, value)
    return settings


def cmd_train(args) -> int:
    settings = resolve_settings(
        args.config,
        {
            "topology": args.topology,
            "learning_rate": args.learning_rate,
            "momentum": args.momentum,
            "epochs": args.epochs,
            "seed": args.seed,
            "dataset": args.dataset,
            "channel_semantics": args.channel_semantics,
            "out": args.out,
        },
    )
    if settings["topology"] is None:
        raise ConfigError("topology is required (config file or --topology)")
    config = TrainConfig(
        topology=_parse_topology(settings["topology"]),
        learning_rate=settings["learning_rate"],
        momentum=settings["momentum"],
        epochs=settings["epochs"],
        seed=settings["seed"],
        dataset=settings["dataset"],
        channel_semantics=_parse_semantics(settings["channel_semantics"]),
    ).validate()

    net, history = train(config)
    out = settings["out"]
    save_checkpoint(net, out)
    history_path = args.history if args.history else f"{out}.history.csv"
    with open(history_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss,accuracy\n")
        for stats in history:
            fh.write(f"{stats.epoch},{stats.loss:.17g},{stats.accuracy:.17g}\n")
    if args.plot:
        from .report import save_history_figure

        save_history_figure(history, args.plot)
        print(f"wrote training curves to {args.plot}", file=sys.stderr)
    print(f"wrote checkpoint to {out} and history to {history_path}", file=sys.stderr)
    print(f"accuracy={history[-1].accuracy:.4f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    net = load_checkpoint(args.model)
    dataset = resolve_dataset(args.dataset)
    if net.in_dim != dataset.input_dim:
        raise ShapeError(
            f"model expects {net.in_dim} inputs but dataset rows have {dataset.input_dim}"
        )
    tally = OpTally()
    header = ",".join(f"x{i + 1}" for i in range(dataset.input_dim))
    print(f"{header},target,predicted")
    correct = 0
    for x, target in zip(dataset.inputs, dataset.targets):
        logits, _ = forward_full(net, x, tally)
        pred = int(np.argmax(logits))
        correct += pred == int(target)
        cells = ",".join(f"{v:g}" for v in x)
        print(f"{cells},{int(target)},{pred}")
    print(f"accuracy={correct / len(dataset):.4f}")
    return EXIT_OK


def cmd_count_ops(args) -> int:
    if (args.topology is None) == (args.model is None):
        raise ConfigError("give exactly one of --topology or --model")
    if args.model is not None:
        net = load_checkpoint(args.model)
        topology = net.topology
    else:
        topology = _parse_topology(args.topology)
        from .network import init_network

        net = init_network(topology, seed=0)

    ncn_budget = predict_op_budget(topology, "ncn").as_view()
    ncn_live = live_op_tally(net).budget_view()
    ffnn_budget = predict_op_budget(topology, "ffnn").as_view()
    ffnn_tally = OpTally()
    ffnn_forward_full(topology, np.zeros(topology[0]), ffnn_tally)
    ffnn_live = ffnn_tally.budget_view()

    print("op,ncn_predicted,ncn_live,ffnn_predicted,ffnn_live")
    for op in ("fmul", "fadd", "compare", "mux", "bias_add", "scaling"):
        print(f"{op},{ncn_budget[op]},{ncn_live[op]},{ffnn_budget[op]},{ffnn_live[op]}")
    if ncn_live != ncn_budget or ffnn_live != ffnn_budget:
        print("audit=fail")
        raise AuditError("live operation tally does not match the predicted budget")
    print("audit=pass")
    return EXIT_OK


def cmd_boundary(args) -> int:
    settings = resolve_settings(
        args.config,
        {"grid_min": args.grid_min, "grid_max": args.grid_max, "resolution": args.resolution},
    )
    net = load_checkpoint(args.model)
    grid = BoundaryGrid(
        grid_min=settings["grid_min"],
        grid_max=settings["grid_max"],
        resolution=settings["resolution"],
    )
    rows = boundary_scan(net, grid)
    write_boundary_csv(rows, args.out)
    print(f"wrote {len(rows)} lattice rows to {args.out}", file=sys.stderr)
    if args.svg:
        from .report import save_boundary_figure

        xor = make_xor()
        save_boundary_figure(rows, grid, args.svg, points=xor.inputs, labels=xor.targets)
        print(f"wrote boundary figure to {args.svg}", file=sys.stderr)
    print(f"rows={len(rows)}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    if not (args.tolerance > 0):
        raise ConfigError(f"tolerance must be positive, got {args.tolerance}")
    topology = _parse_topology(args.topology)
    result = gradcheck(topology, seed=args.seed, min_coords=args.trials)
    print(f"coordinates={result.checked}")
    print(f"max_rel_error={result.max_rel_error:.6g}")
    if result.max_rel_error >= args.tolerance:
        coordinate, analytic, numeric = result.worst
        print(
            f"gradcheck failed at {coordinate}: analytic {analytic:.6g} vs "
            f"finite difference {numeric:.6g}",
            file=sys.stderr,
        )
        return EXIT_AUDIT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncn",
        description="Train and audit multiplication-free channel/bypass networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network and write checkpoint + history CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--topology", help="layer sizes, e.g. 2,4,2")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--momentum", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dataset", help="xor, majority<k>, or csv:<path>")
    p.add_argument(
        "--channel-semantics",
        dest="channel_semantics",
        choices=[s.value for s in ChannelSemantics],
    )
    p.add_argument("--out", help="checkpoint path (default model.ckpt)")
    p.add_argument("--history", help="history CSV path (default <out>.history.csv)")
    p.add_argument("--plot", help="also render loss/accuracy curves to this file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="print per-row predictions and accuracy")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--dataset", required=True, help="xor, majority<k>, or csv:<path>")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("count-ops", help="audit live op tallies against the predicted budget")
    p.add_argument("--topology", help="layer sizes, e.g. 2,4,2")
    p.add_argument("--model", help="checkpoint path")
    p.set_defaults(func=cmd_count_ops)

    p = sub.add_parser("boundary", help="classify a 2-d lattice and write CSV (and a figure)")
    p.add_argument("--model", required=True, help="checkpoint path (2-input model)")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--grid-min", type=float, dest="grid_min")
    p.add_argument("--grid-max", type=float, dest="grid_max")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", default="boundary.csv", help="output CSV path")
    p.add_argument("--svg", help="also render the class raster to this file")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("gradcheck", help="compare analytic gradients to finite differences")
    p.add_argument("--topology", required=True, help="layer sizes, e.g. 2,4,2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--trials", type=int, default=1000, help="minimum coordinates to check")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage problems; fold the
        # latter into the config exit code
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ncn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DatasetFormatError, CheckpointError) as exc:
        print(f"ncn: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ShapeError as exc:
        print(f"ncn: shape error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except DivergedError as exc:
        print(f"ncn: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except AuditError as exc:
        print(f"ncn: audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
