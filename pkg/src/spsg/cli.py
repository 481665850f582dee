"""Command line entry point.

    spsg run <config.json> [--key.path=value ...]
    spsg converge <config.json> --grids 21,41,81 --times 1,5,10 [--rules 2,4,6,G]
    spsg entropy <config.json>
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, parse_config, parse_override
from .output import write_csv, write_json
from .runner import RunError, convergence_study, entropy_trace, monotone_report, run, write_rates


def _csv_list(text: str, cast):
    try:
        return [cast(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spsg", description="Structure-preserving stochastic Galerkin solvers")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="single run with snapshots, time series and metadata")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: output.directory)")
    c = sub.add_parser("converge", help="observed orders of accuracy over nested grids")
    c.add_argument("config")
    c.add_argument("--grids", type=lambda s: _csv_list(s, int))
    c.add_argument("--times", type=lambda s: _csv_list(s, float))
    c.add_argument("--rules", type=lambda s: _csv_list(s, str))
    c.add_argument("--layout", choices=("cell", "node"))
    c.add_argument("--out", help="rates CSV path (default: <output.directory>/rates.csv)")
    e = sub.add_parser("entropy", help="relative entropy and its dissipation for a frozen run")
    e.add_argument("config")
    e.add_argument("--out", help="output directory (default: output.directory)")
    return p


def _split_overrides(argv: list[str]) -> tuple[list[str], list[str]]:
    """Separate ``--a.b=value`` overrides from regular options."""
    known_opts = {"--out", "--grids", "--times", "--rules", "--layout", "-h", "--help"}
    rest, over = [], []
    for a in argv:
        if a.startswith("--") and "=" in a and a.split("=", 1)[0] not in known_opts:
            over.append(a)
        else:
            rest.append(a)
    return rest, over


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    rest, over = _split_overrides(argv)
    args = build_parser().parse_args(rest)
    try:
        cfg = parse_config(args.config, [parse_override(o) for o in over])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            result = run(cfg, args.out)
            meta = result["metadata"]
            print(f"{cfg.problem}: {meta['steps']} steps of dt={meta['dt']:.6g} in {meta['wall_time_s']:.2f}s")
        elif args.command == "converge":
            rows = convergence_study(cfg, args.grids, args.times, args.rules, args.layout)
            path = Path(args.out) if args.out else Path(cfg.output.directory) / "rates.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            write_rates(rows, path)
            for r in rows:
                print(f"{r['quantity']:>8s} SP_{r['rule']:<2s} t={r['time']:<6g} order={r['order']:.4f}")
        else:
            out = Path(args.out or cfg.output.directory)
            out.mkdir(parents=True, exist_ok=True)
            summary = []
            for n in cfg.entropy.grids:
                trace = entropy_trace(cfg, n)
                keys = [k for k in trace if isinstance(trace[k], list)]
                write_csv(out / f"entropy_N{n}.csv", keys, zip(*(trace[k] for k in keys)))
                for h in cfg.entropy.rows:
                    rep = monotone_report(trace, h)
                    rep.update(n=n, dt=trace["dt"])
                    summary.append(rep)
                    print(
                        f"N={n} h={h} valid={rep['all_valid']} nonincreasing={rep['nonincreasing']} "
                        f"I>=0={rep['production_nonnegative']}"
                    )
            write_json(out / "entropy_summary.json", {"config": cfg.to_dict(), "rows": summary})
    except (RunError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
