"""Command-line entry point: run episodes, serve the protocol, validate outage."""
from __future__ import annotations

import argparse
import socket
import sys

from . import metrics, outage, protocol
from .baselines import OpportunisticConfig
from .config import load_config_path


def _add_config_arg(parser):
    parser.add_argument("--config", required=True, help="scenario TOML file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfuav",
                                     description="cell-free UAV downlink simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an episode loop and write metric CSVs")
    _add_config_arg(run_p)
    run_p.add_argument("--algo", required=True,
                       choices=["closest", "opportunistic", "external"])
    run_p.add_argument("--steps", type=int, default=1000)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", required=True, help="output directory for CSVs")
    run_p.add_argument("--margin-db", type=float, default=10.0,
                       help="opportunistic inclusion margin")
    run_p.add_argument("--listen", metavar="HOST:PORT",
                       help="external: accept the driving agent on this address")
    run_p.add_argument("--connect", metavar="HOST:PORT",
                       help="external: dial the driving agent at this address")

    serve_p = sub.add_parser("serve", help="serve the environment protocol")
    _add_config_arg(serve_p)
    serve_p.add_argument("--listen", metavar="HOST:PORT",
                         help="TCP address (default: stdio)")

    val_p = sub.add_parser("validate-outage",
                           help="closed-form vs Monte-Carlo outage agreement")
    val_p.add_argument("--cases", type=int, default=100)
    val_p.add_argument("--samples", type=int, default=1_000_000)
    val_p.add_argument("--seed", type=int, default=2024)
    return parser


def _split_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def _external_transport(args):
    if args.listen:
        host, port = _split_address(args.listen)
        with socket.create_server((host, port)) as server:
            print(f"waiting for agent on {host}:{port}", file=sys.stderr)
            conn, _ = server.accept()
        return conn.makefile("rb"), conn.makefile("wb")
    if args.connect:
        host, port = _split_address(args.connect)
        conn = socket.create_connection((host, port))
        return conn.makefile("rb"), conn.makefile("wb")
    return None  # stdio


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "run":
        config = load_config_path(args.config)
        transport = _external_transport(args) if args.algo == "external" else None
        log = metrics.run(config, args.algo, args.steps, args.seed, args.out,
                          opportunistic=OpportunisticConfig(args.margin_db),
                          transport=transport)
        print(f"logged {log.n_steps} steps -> {args.out}", file=sys.stderr)
        return 0

    if args.command == "serve":
        config = load_config_path(args.config)
        if args.listen:
            host, port = _split_address(args.listen)
            protocol.serve_tcp(config, host, port)
        else:
            protocol.serve_stdio(config)
        return 0

    if args.command == "validate-outage":
        max_excess, rows = outage.validate_closed_form(args.cases, args.samples,
                                                       seed=args.seed)
        worst = max(rows, key=lambda r: r[5])
        print(f"cases={args.cases} samples={args.samples} "
              f"max|closed-mc|-4se = {max_excess:.3e} "
              f"(worst case: size={worst[0]} closed={worst[2]:.6f} mc={worst[3]:.6f})")
        passed = max_excess <= 1e-4
        print("PASS" if passed else "FAIL")
        return 0 if passed else 1

    return 2


if __name__ == "__main__":
    sys.exit(main())
