"""Operator command line: simulate whole elections, verify transcripts
offline, or run the HTTP service.

Exit codes: 0 success / verification passed, 1 verification failed,
2 usage, configuration or parse errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .board import Board
from .errors import IncompleteElectionError, ReceiptFormatError, ZkvoteError
from .service import ElectionConfig, ElectionService, build_app
from .sim import ADVERSARIES, SimulationSpec, simulate
from .verify import verify_election

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _parse_tier(value: str) -> tuple[str, int | None]:
    if value in ("test", "standard"):
        return value, None
    if value.startswith("custom:"):
        return "test", int(value.split(":", 1)[1])
    raise argparse.ArgumentTypeError(f"tier must be test, standard or custom:<qbits>, got {value!r}")


def cmd_simulate(args) -> int:
    try:
        tier, custom_bits = _parse_tier(args.tier)
        spec = SimulationSpec(
            voters=args.voters,
            candidates=args.candidates,
            voter_bound=args.voter_bound,
            audit_probability=args.audit_prob,
            seed=args.seed,
            adversary=args.adversary,
            tier=tier,
            custom_q_bits=custom_bits,
            out_dir=args.out_dir,
        )
        summary = simulate(spec)
    except (ZkvoteError, argparse.ArgumentTypeError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        board = Board.load(args.board)
        tally_text = None
        if args.tally:
            tally_text = Path(args.tally).read_text(encoding="utf-8").strip()
        report = verify_election(board, tally_text)
    except (OSError, ReceiptFormatError, IncompleteElectionError) as exc:
        print(f"cannot verify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(report.summary())
    if args.json:
        print(report.to_json())
    return EXIT_OK if report.overall and report.chain_ok else EXIT_VERIFY_FAILED


def cmd_serve(args) -> int:
    try:
        config = ElectionConfig.from_file(args.config)
        bind = os.environ.get("ZKVOTE_BIND", config.bind)
        host, _, port = bind.rpartition(":")
        service = ElectionService(config)
    except (OSError, ValueError, ZkvoteError) as exc:
        print(f"cannot start service: {exc}", file=sys.stderr)
        return EXIT_USAGE
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    uvicorn.run(build_app(service), host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zkvote", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a seeded end-to-end election simulation")
    sim.add_argument("--voters", type=int, default=100)
    sim.add_argument("--candidates", type=int, default=2)
    sim.add_argument("--voter-bound", type=int, default=None, help="N; defaults to voters+1")
    sim.add_argument("--audit-prob", type=float, default=0.2)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--adversary", choices=ADVERSARIES, default="none")
    sim.add_argument("--tier", default="test", help="test, standard, or custom:<qbits>")
    sim.add_argument("--out-dir", default=None, help="directory for transcript files")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="verify a board transcript offline")
    ver.add_argument("--board", required=True, help="board file")
    ver.add_argument("--tally", default=None, help="final tally file (defaults to the board's)")
    ver.add_argument("--json", action="store_true", help="also print the machine-readable report")
    ver.set_defaults(func=cmd_verify)

    srv = sub.add_parser("serve", help="run the election HTTP service")
    srv.add_argument("--config", required=True, help="election config JSON file")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
