"""Command-line front end over the scenario harness.

Subcommands map onto scenario modes (``solve`` also runs
``asymptotic-compare`` scenarios, ``figure`` runs ``figure1``/``figure2``
per the file's ``mode``).  Exit codes: 0 success, 2 configuration error,
3 numerical failure.  ``RODBEM_*`` environment variables override scenario
values (see :mod:`rodbem.harness`).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .harness import (
    COMMAND_MODES,
    ConfigError,
    NumericalError,
    RESOLUTION_LEVELS,
    load_scenario,
    run,
)

_DESCRIPTIONS = {
    "mesh": "build the scenario geometry and export the panel list",
    "spectrum": "static mode table (eigenvalues, norms, resonance distances)",
    "solve": "one transmission solve with field slice and energies "
    "(also runs asymptotic-compare scenarios)",
    "scan": "parameter sweep: one solve per value, one CSV row each",
    "scaling": "resonance-pinned frequency sweep against the blowup prediction",
    "figure": "field slices for both incident directions of a rod scenario",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rodbem",
        description="Boundary-integral plasmon resonance toolkit for thin rods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMAND_MODES:
        p = sub.add_parser(name, help=_DESCRIPTIONS[name])
        p.add_argument("--config", required=True, help="scenario file (YAML)")
        p.add_argument("--out", default=None, help="output directory (default: scenario's outputs.dir)")
        p.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
        p.add_argument(
            "--resolution",
            choices=sorted(RESOLUTION_LEVELS),
            default=None,
            help="mesh/grid defaults for values the scenario leaves unset",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(
            args.config, command=args.command, resolution=args.resolution
        )
        result = run(scenario, out_dir=args.out, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for name in result.artifacts:
        print(f"wrote {result.out_dir / name}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
