"""Command-line front end.

Precedence for every setting, lowest to highest: package defaults, the
builtin named by ``extends`` (or by --scenario), the config file, flags.

    flag        config key
    --seed      seed
    --tol       tolerances.residual
    --grid      grid.count
    --format    output.format
    --out       output.dir
    --units     units
    --threads   threads
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

from . import scenarios
from .errors import ConfigError, StochVacError

log = logging.getLogger("stochvac")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser():
    p = _Parser(prog="stochvac", description="Run verification scenarios for the six-space oscillator model.")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a builtin scenario or a JSON scenario file")
    r.add_argument("--scenario", required=True, help="builtin name or path to a JSON config")
    r.add_argument("--out", help="output directory")
    r.add_argument("--seed", type=int, help="rng seed (nonnegative 64-bit integer)")
    r.add_argument("--tol", type=float, help="field residual tolerance")
    r.add_argument("--grid", type=int, help="points per active grid axis")
    r.add_argument("--format", choices=("json", "csv", "both"))
    r.add_argument("--units", choices=("natural",))
    r.add_argument("--threads", type=int, help="worker threads for grid evaluation")

    sub.add_parser("list", help="list builtin scenarios")
    d = sub.add_parser("describe", help="show a scenario's checks and what they verify")
    d.add_argument("--scenario", required=True)
    a = sub.add_parser("alpha", help="evaluate cos(pi/N)/N")
    a.add_argument("--n", type=int, required=True)
    return p


def load_config(spec):
    """Builtin name or JSON file path -> resolved config dict."""
    if spec in scenarios.BUILTINS:
        return scenarios.builtin_config(spec)
    if not os.path.exists(spec):
        raise ConfigError("scenario", f"unknown scenario {spec!r}")
    try:
        with open(spec, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("scenario", f"cannot read {spec!r}: {exc}") from exc
    if isinstance(raw, dict) and "name" not in raw and "extends" not in raw:
        raw["name"] = os.path.splitext(os.path.basename(spec))[0]
    return scenarios.resolve_config(raw)


def apply_overrides(cfg, args):
    """Flags override the file. Returns a new resolved config."""
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.tol is not None:
        over["tolerances"] = {"residual": args.tol}
    if args.grid is not None:
        over["grid"] = {"count": args.grid}
    if args.format is not None:
        over.setdefault("output", {})["format"] = args.format
    if args.out is not None:
        over.setdefault("output", {})["dir"] = args.out
    if args.units is not None:
        over["units"] = args.units
    if args.threads is not None:
        over["threads"] = args.threads
    return scenarios.resolve_config(scenarios._merge(cfg, over))


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def report_json(report, with_timing=True):
    d = report.to_dict()
    if not with_timing:
        d.pop("wall_clock_s")
    return json.dumps(_clean(d), sort_keys=True, indent=2) + "\n"


def grid_csv(cfg):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(scenarios.CSV_HEADER)
    for row in scenarios.grid_rows(cfg):
        w.writerow(["" if v is None else repr(float(v)) for v in row])
    return buf.getvalue()


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _summary(report):
    lines = [f"scenario {report.name}: {'PASS' if report.passed else 'FAIL'} ({report.wall_clock_s:.2f} s)"]
    for c in report.checks:
        extra = ""
        if "value" in c:
            extra = f" value={c['value']:.3e} tol={c['tol']:.1e}"
        elif "max_abs" in c:
            extra = f" max={c['max_abs']:.3e}"
            if c.get("ratio") is not None:
                extra += f" ratio={c['ratio']:.3f}"
        lines.append(f"  [{'ok' if c['passed'] else 'FAIL'}] {c['name']}{extra}")
    return "\n".join(lines)


def cmd_run(args):
    cfg = apply_overrides(load_config(args.scenario), args)
    report = scenarios.run_scenario(cfg)
    out = cfg["output"]
    fmt = out["format"]
    # render everything before touching the filesystem
    files = {}
    if fmt in ("json", "both"):
        files[os.path.join(out["dir"], f"{cfg['name']}_report.json")] = report_json(report)
    if fmt in ("csv", "both"):
        files[os.path.join(out["dir"], f"{cfg['name']}_grid.csv")] = grid_csv(cfg)
    for path, text in files.items():
        atomic_write(path, text)
        log.info("wrote %s", path)
    print(_summary(report))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_list(args):
    for name in scenarios.builtin_names():
        print(f"{name:24s} {scenarios.BUILTINS[name]['description']}")
    return EXIT_OK


def cmd_describe(args):
    print(scenarios.describe(args.scenario))
    return EXIT_OK


def cmd_alpha(args):
    v = scenarios.fine_structure(args.n)
    mant, exp = f"{v:.6e}".split("e")
    print(f"{mant}e{int(exp)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "list": cmd_list, "describe": cmd_describe, "alpha": cmd_alpha}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"stochvac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"stochvac: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StochVacError as exc:
        print(f"stochvac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
