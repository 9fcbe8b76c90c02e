"""Command-line front end: ``assign``, ``spectrum``, ``distort``, ``train``, ``verify``.

Every flag can also come from a JSON file given with ``--config``; flags on
the command line win. Exit codes: 0 ok, 2 configuration error, 3 aggregator
applicability error, 4 divergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import List, Optional

from . import __version__
from ._backend import BACKEND
from .aggregation import AggregatorKind, AggregatorSpec
from .assignment import build_assignment
from .attacks import AttackKind, AttackSpec, choose_byzantines
from .distortion import DEFAULT_BUDGET, distortion_table
from .errors import ConfigError, Diverged, GuardError
from .spectral import compute_spectrum
from .trainer import Simulation, TrainConfig

EXIT_CONFIG, EXIT_GUARD, EXIT_DIVERGED = 2, 3, 4


def fmt(x, round2: bool = False) -> str:
    """Locale-independent number formatting; ``round2`` mimics the 2-decimal tables."""
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if round2:
        s = f"{x:.2f}".rstrip("0").rstrip(".")
        return "0" if s in ("-0", "") else s
    return repr(float(x))


def _graph_flags(p):
    p.add_argument("--scheme", choices=["mols", "ramanujan", "ramanujan1", "ramanujan2", "frc", "baseline"])
    p.add_argument("--l", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--K", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="byzshield", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default flag values")
    common.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("assign", parents=[common], help="build an assignment graph")
    _graph_flags(p)
    p.add_argument("--out-dir", help="write assignment.json and assignment.txt here")

    p = sub.add_parser("spectrum", parents=[common], help="spectrum of the normalized biadjacency")
    _graph_flags(p)

    p = sub.add_parser("distort", parents=[common], help="worst-case distortion table")
    _graph_flags(p)
    p.add_argument("--qmin", type=int, default=1)
    p.add_argument("--qmax", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--round2", action="store_true", help="round reals to 2 decimals")
    p.add_argument("--backend", choices=["cython", "python"])
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("train", parents=[common], help="simulate Byzantine-robust SGD")
    _graph_flags(p)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--attack", choices=[k.value for k in AttackKind], default="reversed")
    p.add_argument("--constant-value", type=float, default=-100.0)
    p.add_argument("--reverse-scale", type=float, default=1.0)
    p.add_argument("--alie-z", type=float, default=1.0)
    p.add_argument("--reselect", action="store_true", help="redraw a worst-case set every iteration")
    p.add_argument("--defense", choices=[k.value for k in AggregatorKind], default="cw_median")
    p.add_argument("--group-size", type=int, default=1)
    p.add_argument("--krum-m", type=int, default=1)
    p.add_argument("--byz-bound", type=int)
    p.add_argument("--vote-tolerance", type=float)
    p.add_argument("--model", choices=["linear", "logistic", "mlp"], default="logistic")
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--dataset", choices=["auto", "separable", "mixture", "regression"], default="auto")
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--b", type=int, default=750)
    p.add_argument("--T", type=int, default=500)
    p.add_argument("--eta", default="1.0,1.0,1", help="schedule x,y,z: start x, times y every z steps")
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--update-norm", choices=["per_file", "per_sample"], default="per_file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--manifest", help="run manifest path (default <out>.manifest.json)")

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--full", action="store_true", help="include the larger table reproductions")
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        with open(known.config, encoding="utf-8") as fh:
            defaults = {k.replace("-", "_"): v for k, v in json.load(fh).items()}
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _graph(args):
    if args.scheme is None:
        raise ConfigError("--scheme is required")
    return build_assignment(args.scheme, l=args.l, r=args.r, m=args.m, s=args.s, K=args.K)


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def cmd_assign(args) -> int:
    graph = _graph(args)
    table = graph.allocation_table()
    sys.stdout.write(table)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "assignment.json"), graph.to_json())
        _write(os.path.join(args.out_dir, "assignment.txt"), table)
    return 0


def cmd_spectrum(args) -> int:
    report = compute_spectrum(_graph(args))
    sys.stdout.write(json.dumps(report.to_dict()) + "\n")
    return 0


def cmd_distort(args) -> int:
    graph = _graph(args)
    qmax = args.qmax if args.qmax is not None else graph.K - 1
    rows = distortion_table(graph, args.qmin, qmax, args.budget, args.threads, args.backend)
    out = [["q", "c_max", "eps_byzshield", "eps_baseline", "eps_frc", "gamma"]]
    for row in rows:
        out.append(
            [fmt(row.q), fmt(row.c_max)]
            + [fmt(x, args.round2) for x in (row.eps_byzshield, row.eps_baseline, row.eps_frc, row.gamma)]
        )
        if not row.exhaustive:
            print(f"q={row.q}: over budget, c_max is a heuristic lower bound", file=sys.stderr)
    _write(args.out, _csv(out))
    return 0


def _parse_eta(text):
    parts = [p for p in str(text).split(",") if p.strip()] if not isinstance(text, (list, tuple)) else text
    if len(parts) != 3:
        raise ConfigError(f"--eta needs x,y,z, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def cmd_train(args) -> int:
    graph = _graph(args)
    cfg = TrainConfig(
        n=args.n, d=args.d, b=args.b, eta=_parse_eta(args.eta), T=args.T, seed=args.seed,
        model=args.model, hidden=args.hidden, update_norm=args.update_norm,
        momentum=args.momentum, dataset=args.dataset, margin=args.margin, threads=args.threads,
    )
    byz = choose_byzantines(graph, args.q, args.budget, args.threads)
    attack = AttackSpec(
        kind=args.attack, byzantine_set=byz, constant_value=args.constant_value,
        reverse_scale=args.reverse_scale, alie_z=args.alie_z, reselect_each_iter=args.reselect,
    )
    aggregator = AggregatorSpec(
        kind=args.defense, group_size=args.group_size, krum_m=args.krum_m,
        byz_bound=args.byz_bound, vote_tolerance=args.vote_tolerance,
    )
    sim = Simulation(graph, attack, aggregator, cfg)
    rows = [["t", "loss", "accuracy", "distorted_files", "lr", "update_norm"]]
    status = 0
    try:
        logs = sim.run()
    except Diverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        logs, status = getattr(exc, "logs", []), EXIT_DIVERGED
    for it in logs:
        rows.append([fmt(it.t), fmt(it.loss), fmt(it.accuracy), fmt(it.distorted_files), fmt(it.lr), fmt(it.update_norm)])
    _write(args.out, _csv(rows))

    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest_path:
        manifest = {
            "command": "train",
            "config": {
                "graph": {k: getattr(args, k) for k in ("scheme", "l", "r", "m", "s", "K")},
                "train": cfg.to_dict(),
                "attack": {
                    "kind": attack.kind.value, "q": attack.q, "c": attack.reverse_scale,
                    "constant_value": attack.constant_value, "alie_z": attack.alie_z,
                    "reselect_each_iter": attack.reselect_each_iter,
                },
                "aggregator": {
                    "kind": sim.aggregator.kind.value, "group_size": sim.aggregator.group_size,
                    "krum_m": sim.aggregator.krum_m, "byz_bound": sim.aggregator.byz_bound,
                    "vote_tolerance": sim.aggregator.vote_tolerance,
                },
            },
            "seed": cfg.seed,
            "tool_version": __version__,
            "backend": BACKEND,
            "assignment_hash": graph.content_hash(),
            "byzantine_set": list(byz),
            "outputs": [p for p in (args.out,) if p],
            "exit_status": status,
        }
        _write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return status


def cmd_verify(args) -> int:
    from .verify import run_checks

    failures = 0
    for name, ok, detail in run_checks(full=args.full, threads=args.threads):
        print(f"{'PASS' if ok else 'FAIL'} {name}" + ("" if ok else f": {detail}"))
        failures += not ok
    print(f"{failures} failure(s)")
    return 1 if failures else 0


COMMANDS = {
    "assign": cmd_assign,
    "spectrum": cmd_spectrum,
    "distort": cmd_distort,
    "train": cmd_train,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except Diverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
