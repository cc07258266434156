"""Command line front end: ``mgmcast <scenario> [flags]``.

Settings may also come from a flat ``key = value`` file given with
``--config``; flags on the command line override the file.  Keys are the
long flag names without dashes (``snr``, ``alpha-grid``, ...).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .harness import AlgoSpec, ExperimentConfig, SOLVER_PRESETS, run, summarize, write_summary

DEFAULT_ALGOS = {
    "converge": "wmmse1-opt,wmmse2",
    "sweep-snr": "wmmse1-opt,wmmse2,zf,mrt",
    "sweep-delta": "wmmse1-opt,wmmse1-fixed=0.2,wmmse2",
    "alpha-cdf": "wmmse1-opt",
}
DEFAULT_SNR = {"converge": "15", "sweep-snr": "0:30:5", "sweep-delta": "20", "alpha-cdf": "15"}
DEFAULT_DELTA = {"sweep-delta": "0:0.6:0.1"}


class CliError(Exception):
    pass


def parse_list(text: str, cast=float) -> list:
    """Comma list (``0,5,10``) or inclusive range ``start:stop:step``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise CliError(f"bad range {part!r}; use start:stop:step")
            start, stop, step = (float(b) for b in bits)
            if step <= 0:
                raise CliError(f"range step must be positive in {part!r}")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            out.extend(cast(round(start + i * step, 10)) for i in range(max(n, 0)))
        else:
            out.append(cast(part))
    if not out:
        raise CliError(f"empty list {text!r}")
    return out


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise CliError(f"{path}:{n}: expected key = value")
        values[key.strip().replace("_", "-")] = val.strip()
    return values


FLAGS = ("m", "k", "l", "seed", "realizations", "snr", "delta", "algos", "alpha-grid",
         "weights", "out", "workers", "solver", "max-iters")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgmcast",
        description="Monte-Carlo experiments for multi-group multicast precoding "
                    "with a common message.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--m", help="transmit antennas (complexity: comma list)")
        p.add_argument("--k", help="clusters (complexity: comma list)")
        p.add_argument("--l", help="users per cluster (complexity: comma list)")
        p.add_argument("--out", help="output CSV path")

    for name in ("converge", "sweep-snr", "sweep-delta", "alpha-cdf"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--seed", help="base seed (default 1)")
        p.add_argument("--realizations", help="channel realizations (default 100)")
        p.add_argument("--snr", help="transmit SNR in dB: list or start:stop:step")
        p.add_argument("--delta", help="residual SIC factors in [0, 1]")
        p.add_argument("--algos", help="wmmse1-opt, wmmse1-fixed=<a>, wmmse2, zf, mrt")
        p.add_argument("--alpha-grid", help="alpha values searched by the *-opt designs")
        p.add_argument("--weights", help="'a,b' or 'a_1,...,a_K,b'")
        p.add_argument("--workers", help="worker processes (default 1)")
        p.add_argument("--solver", help=f"one of {', '.join(SOLVER_PRESETS)}")
        p.add_argument("--max-iters", help="iteration cap per design (default 100)")
    common(sub.add_parser("complexity"))
    p = sub.add_parser("summarize", help="mean and standard error per configuration")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", required=True)
    return parser


def _settings(args) -> dict[str, str]:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    unknown = set(values) - set(FLAGS)
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for flag in FLAGS:
        val = getattr(args, flag.replace("-", "_"), None)
        if val is not None:
            values[flag] = val
    return values


def make_config(command: str, values: dict[str, str]) -> ExperimentConfig:
    scenario = command.replace("-", "_")
    get = values.get
    if scenario == "complexity":
        ms, ks, ls = (parse_list(get(x, "2"), int) for x in ("m", "k", "l"))
        dims = tuple((m, k, l) for m in ms for k in ks for l in ls)
        return ExperimentConfig(scenario, dims=dims, output_path=get("out", "complexity.csv"))
    return ExperimentConfig(
        scenario=scenario,
        M=int(get("m", "2")), K=int(get("k", "2")), L=int(get("l", "2")),
        snr_db=tuple(parse_list(get("snr", DEFAULT_SNR[command]))),
        delta=tuple(parse_list(get("delta", DEFAULT_DELTA.get(command, "0")))),
        realizations=int(get("realizations", "100")),
        seed=int(get("seed", "1")),
        weights=tuple(parse_list(get("weights", "1,1"))),
        algorithms=tuple(AlgoSpec.parse(t) for t in get("algos", DEFAULT_ALGOS[command]).split(",")
                         if t.strip()),
        alpha_grid=tuple(parse_list(get("alpha-grid", "0.05:0.95:0.05"))),
        output_path=get("out", f"{scenario}.csv"),
        workers=int(get("workers", "1")),
        solver=get("solver", "safeguarded"),
        max_iters=int(get("max-iters", "100")),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "summarize":
            write_summary(summarize(args.csv), args.out)
            print(args.out)
            return 0
        cfg = make_config(args.command, _settings(args))
        written = run(cfg)
    except (CliError, ValueError, OSError) as exc:
        print(f"mgmcast: error: {exc}", file=sys.stderr)
        return 2
    for kind, path in written.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
