"""Command-line front end.

Every command loads defaults, an optional ``--config`` file and flag
overrides, validates the merged configuration, and only then touches the
file system.  Outputs go to ``--out`` (default ``out``).

Exit status is 0 on success, 1 on a failed check or a runtime error and 2
on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .bayesnet import BayesNet, GraphError, SideInfoRoles, classify_side_info
from .channel import sample_path_arrays, sample_velocity_dataset, synthesize_batch
from .clustering import ClusterOptions, run_velocity_experiment, velocity_table_csv
from .config import ConfigError, ExperimentConfig, load_config
from .estimation import run_estimation_experiment
from .io import DatasetError, write_dataset
from .moments import verify_theorem1
from .rng import Streams

log = logging.getLogger("chanstat")

SHIPPED_GRAPHS = ("fig1b", "fig1c")


class CommandError(RuntimeError):
    pass


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _override(text: str) -> tuple[str, str, str]:
    key, sep, value = text.partition("=")
    sec, dot, name = key.rpartition(".")
    if not sep or not dot:
        raise argparse.ArgumentTypeError(f"expected section.key=value, got {text!r}")
    return sec.strip(), name.strip(), value


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="INI config file")
    p.add_argument("--seed", type=_u64, help="global seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--set", dest="overrides", action="append", type=_override, default=[],
                   metavar="SECTION.KEY=VALUE", help="override one config value (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chanstat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a channel dataset")
    _common(p)
    p.add_argument("--kind", choices=("paths", "velocity"))
    p.add_argument("-n", type=int, help="number of channels")

    p = sub.add_parser("verify-theorem", help="Monte Carlo check of the conditional moments")
    _common(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--negative-control", action="store_true",
                   help="fix all phases at zero; the check is expected to fail")

    p = sub.add_parser("cluster", help="velocity clustering experiment (CSV)")
    _common(p)

    p = sub.add_parser("estimate", help="channel estimation SNR sweep (CSV)")
    _common(p)

    p = sub.add_parser("dsep", help="classify side information in a graph")
    p.add_argument("graph", help=f"graph file, or one of the shipped graphs {', '.join(SHIPPED_GRAPHS)}")
    p.add_argument("--beta", default="beta")
    p.add_argument("--xi", default="Xi")
    p.add_argument("--h", default="H")
    p.add_argument("--z", default="z")
    p.add_argument("--observed", default="", help="comma-separated extra observed nodes")
    p.add_argument("--out", type=Path, help="also write the result to DIR/dsep.txt")
    return parser


def _load(args) -> ExperimentConfig:
    overrides: dict[str, dict[str, str]] = {}
    for sec, key, value in args.overrides:
        overrides.setdefault(sec, {})[key] = value
    run = overrides.setdefault("run", {})
    if args.seed is not None:
        run["seed"] = str(args.seed)
    if args.out is not None:
        run["out"] = str(args.out)
    extra = {
        "gen-data": (("kind", "kind"), ("n", "n")),
        "verify-theorem": (("tol", "tol"),),
    }.get(args.command, ())
    for attr, key in extra:
        value = getattr(args, attr, None)
        if value is not None:
            overrides.setdefault(args.command, {})[key] = repr(value) if isinstance(value, float) else str(value)
    return load_config(args.config, overrides)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_gen_data(conf: ExperimentConfig) -> int:
    sec = conf["gen-data"]
    n, kind = sec["n"], sec["kind"]
    if n < 1:
        raise CommandError("empty dataset: n must be >= 1")
    if kind not in ("paths", "velocity"):
        raise CommandError(f"unknown dataset kind {kind!r}")
    streams = Streams(conf.seed)
    if kind == "velocity":
        sc = conf.velocity()
        cfg = sc.cfg
        h, labels, _ = sample_velocity_dataset(sc, n, streams)
    else:
        cfg, prior = conf.channel(), conf.prior()
        h = synthesize_batch(cfg, sample_path_arrays(prior, conf["prior"]["n_paths"], n, streams))
        labels = None
    path = conf.out / sec["file"]
    path.parent.mkdir(parents=True, exist_ok=True)
    digest = write_dataset(path, cfg, h, labels)
    summary = {"N": n, "M": cfg.size, "dims": list(cfg.dims), "kind": kind, "seed": conf.seed,
               "checksum": f"sha256:{digest}", "file": str(path)}
    if labels is not None:
        summary["label_counts"] = np.bincount(labels, minlength=len(sc.masses) + 1)[1:].tolist()
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_verify_theorem(conf: ExperimentConfig, negative_control: bool = False) -> int:
    sec = conf["verify-theorem"]
    if not sec["tol"] > 0:
        raise CommandError("tolerance unsatisfiable: tol must be positive")
    check = verify_theorem1(conf.channel(), conf.prior(), conf["prior"]["n_paths"], sec["n_xi"],
                            sec["n_beta"], Streams(conf.seed), tol=sec["tol"],
                            beta="spike" if negative_control else "uniform")
    text = check.to_json(conf.seed) + "\n"
    name = "verify_theorem_negative.json" if negative_control else "verify_theorem.json"
    _write(conf.out / name, text)
    print(text, end="")
    return 0 if check.passed else 1


def cmd_cluster(conf: ExperimentConfig) -> int:
    sec = conf["cluster"]
    if sec["on_collapse"] not in ("error", "prune"):
        raise CommandError(f"on_collapse must be 'error' or 'prune', got {sec['on_collapse']!r}")
    if not sec["k_grid"] or min(sec["k_grid"]) < 1:
        raise CommandError("k_grid must list positive integers")
    opts = ClusterOptions(max_iter=sec["max_iter"], rel_tol=sec["rel_tol"], floor=sec["floor"],
                          restarts=sec["restarts"], kmeans_restarts=sec["kmeans_restarts"],
                          on_collapse=sec["on_collapse"], seed=conf.seed)
    sc = conf.velocity()
    rows = run_velocity_experiment(sc, sec["n_train"], sec["n_test"], sec["k_grid"], opts)
    text = velocity_table_csv(rows, conf.seed)
    _write(conf.out / sec["file"], text)
    print(text, end="")
    return 0


def cmd_estimate(conf: ExperimentConfig) -> int:
    sec = conf["estimate"]
    if not sec["snr_grid"]:
        raise CommandError("snr_grid is empty")
    cfg, prior = conf.channel(), conf.prior()
    report = run_estimation_experiment(cfg, prior, sec["snr_grid"], sec["n_test"], Streams(conf.seed),
                                       n_paths=conf["prior"]["n_paths"], n_train=sec["n_train"])
    text = report.to_csv()
    _write(conf.out / sec["file"], text)
    print(text, end="")
    return 0


def load_graph(source: str) -> BayesNet:
    """Read a graph file; bare names of shipped graphs resolve to package data."""
    if source in SHIPPED_GRAPHS:
        text = resources.files("chanstat").joinpath("data", f"{source}.graph").read_text()
        return BayesNet.from_text(text)
    try:
        return BayesNet.read(source)
    except OSError as exc:
        raise CommandError(f"cannot read graph {source}: {exc}") from None


def cmd_dsep(args) -> int:
    bn = load_graph(args.graph)
    observed = frozenset(v.strip() for v in args.observed.split(",") if v.strip())
    roles = SideInfoRoles(beta=args.beta, xi=args.xi, h=args.h, z=args.z, observed=observed)
    text = str(classify_side_info(bn, roles)) + "\n"
    if args.out is not None:
        _write(args.out / "dsep.txt", text)
    print(text, end="")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "dsep":
            return cmd_dsep(args)
        conf = _load(args)
        if args.command == "gen-data":
            return cmd_gen_data(conf)
        if args.command == "verify-theorem":
            return cmd_verify_theorem(conf, args.negative_control)
        if args.command == "cluster":
            return cmd_cluster(conf)
        if args.command == "estimate":
            return cmd_estimate(conf)
    except (CommandError, ConfigError, DatasetError, GraphError, ValueError) as exc:
        print(f"chanstat {args.command}: error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command}")
    return 2
