"""
levykit command line.

Exit codes: 0 success, 2 input could not be parsed, 3 numerical failure,
4 a reproduced expectation failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import moments, reproduce, selfdecomp
from .errors import LevyKitError, SpecParseError
from .mixtures import (
    GHSpec,
    MixtureSpec,
    gh_as_mixture_spec,
    gh_sample,
    mixture_levy_density,
    mixture_sample,
)
from .levy import sample_triplet

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC, EXIT_EXPECTATION = 0, 2, 3, 4


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _dumps(obj) -> str:
    return json.dumps(obj, cls=_Encoder, indent=2)


def _read_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecParseError(str(exc)) from exc
    if not isinstance(d, dict):
        raise SpecParseError("spec file must hold a JSON object")
    return d


def _parse(fn, *args):
    """Run a parser; any construction error becomes a parse error."""
    try:
        return fn(*args)
    except SpecParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SpecParseError(f"{type(exc).__name__}: {exc}") from exc


def _mixture_or_gh(d: dict):
    if "gh" in d:
        return GHSpec.from_dict(d["gh"])
    return MixtureSpec.from_dict(d.get("mixture", d))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


# ----------------------------------------------------------------------------
# verbs
# ----------------------------------------------------------------------------

def cmd_check_sd(args) -> int:
    d = _read_spec(args.spec)
    obj = _parse(_mixture_or_gh, d)
    report = {"command": "check-sd"}
    if isinstance(obj, GHSpec):
        rep = _parse(gh_as_mixture_spec, obj)
        report["input"] = {"gh": obj.to_dict()}
        spec = rep.spec
    else:
        report["input"] = {"mixture": obj.to_dict()}
        spec = obj
    numeric = d.get("numeric", True) and not args.no_numeric
    verdict = selfdecomp.sd_numeric_check(spec) if numeric else selfdecomp.sd_criterion(spec)
    report["verdict"] = verdict.to_dict()
    report["is_sd"] = verdict.is_sd_by_criterion
    _emit(_dumps(report), args.out)
    return EXIT_OK


def cmd_moment(args) -> int:
    d = _read_spec(args.spec)
    t = _parse(reproduce.parse_triplet, d["triplet"] if "triplet" in d else {})
    q = _parse(moments.MomentQuery, tuple(d.get("q", ())))
    tau = float(d.get("tau", 1.0))
    if q.dim != t.dim:
        raise SpecParseError("q and triplet dimensions differ")
    verdict = moments.moment_exists(t, tau, q)
    report = {"command": "moment", "input": {"triplet": t.to_dict(), "tau": tau, "q": list(q.exponents)},
              "verdict": verdict.to_dict()}
    if args.mc:
        x = sample_triplet(t, args.budget, seed=args.seed)
        report["mc"] = moments.mc_moment_diag(x, q).to_dict()
        report["mc"]["n"] = args.budget
        report["mc"]["seed"] = args.seed
    _emit(_dumps(report), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    d = _read_spec(args.spec)
    obj = _parse(_mixture_or_gh, d)
    n = args.budget
    if isinstance(obj, GHSpec):
        x = gh_sample(obj, n, seed=args.seed)
        header = [f"Z{r + 1}" for r in range(obj.dim)]
        inp = {"gh": obj.to_dict()}
    else:
        x = mixture_sample(obj, n, seed=args.seed)
        header = [f"Z{r + 1}" for r in range(obj.dim)]
        inp = {"mixture": obj.to_dict()}
    if args.format == "json":
        _emit(_dumps({"columns": header, "rows": x}), args.out)
    else:
        _emit(_table(header, x), args.out)
    if args.out is not None:
        with open(args.out + ".json", "w") as fh:
            fh.write(_dumps({"command": "sample", "input": inp, "seed": args.seed, "n": n}) + "\n")
    return EXIT_OK


def _density_grid(spec: MixtureSpec, grid: dict) -> np.ndarray:
    y1 = np.asarray(grid.get("y1", np.logspace(-3, 1, 41)), dtype=float)
    trans = np.asarray(grid.get("transverse", np.linspace(-2, 2, 9)), dtype=float)
    axes = [y1] + [trans] * (spec.dim - 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def cmd_levy_density(args) -> int:
    d = _read_spec(args.spec)
    spec = _parse(lambda: MixtureSpec.from_dict(d.get("mixture", d)))
    pts = _parse(_density_grid, spec, d.get("grid", {}))
    h = mixture_levy_density(spec, pts)
    cols = ["y1"] + [f"y{r + 2}" for r in range(spec.dim - 1)] + ["h"]
    if args.format == "json":
        _emit(_dumps({"input": {"mixture": spec.to_dict()}, "columns": cols,
                      "rows": np.column_stack([pts, h])}), args.out)
    else:
        _emit(_table(cols, np.column_stack([pts, h])), args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.name not in reproduce.FIXTURE_NAMES:
        raise SpecParseError(f"unknown name {args.name!r}; choose from {', '.join(reproduce.FIXTURE_NAMES)}")
    bundle = reproduce.run_fixture(args.name, args.seed)
    _emit(_dumps(bundle), args.out)
    print(f"{args.name}: {bundle['status']}", file=sys.stderr)
    return EXIT_OK if bundle["status"] == "PASS" else EXIT_EXPECTATION


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------

def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("budget must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levykit", description=__doc__.strip().splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="sample and levy-density default to csv, reports are json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-sd", parents=[common], help="self-decomposability verdict")
    p.add_argument("--spec", required=True)
    p.add_argument("--no-numeric", action="store_true", help="closed-form criterion only")
    p.set_defaults(func=cmd_check_sd)

    p = sub.add_parser("moment", parents=[common], help="moment existence verdict")
    p.add_argument("--spec", required=True)
    p.add_argument("--mc", action="store_true", help="add Monte Carlo diagnostics")
    p.add_argument("--budget", type=_positive, default=100000, help="Monte Carlo sample size")
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("sample", parents=[common], help="draws from a mixture or GH spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--budget", type=_positive, default=1000, help="number of draws")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("levy-density", parents=[common], help="tabulate h on a grid")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_levy_density)

    p = sub.add_parser("reproduce", parents=[common], help="run a canonical fixture")
    p.add_argument("name", help=", ".join(reproduce.FIXTURE_NAMES))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (LevyKitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
