"""Command line front end.

Subcommands ``dist``, ``geodesic``, ``constants``, ``verify`` and ``chain``.
Exit status: 0 success, 1 usage or input error, 2 numerical failure
(disconnected points, grid too coarse), 3 verification failures present.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis as an
from .domain import DomainError, load_domain
from .metrics import apollonian, j_metric, j_prime, log_density_ratio
from .paths import GridError, Polyline, inner_diameter, shortest_path

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _point(text):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}; expected comma separated numbers")


def _window(text):
    v = _point(text)
    if len(v) % 2:
        raise argparse.ArgumentTypeError("window needs 2n numbers: lower corner then upper corner")
    return v[: len(v) // 2], v[len(v) // 2:]


def build_parser():
    p = _Parser(prog="domain-metrics", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q):
        q.add_argument("--domain", required=True, help="domain spec JSON file")
        q.add_argument("--h", type=float, default=None, help="grid spacing (default 0.01 x scale)")
        q.add_argument("--m", type=int, default=10_000, help="boundary atlas size")
        q.add_argument("--seed", type=int, default=42)
        q.add_argument("--window", type=_window, default=None,
                       help="grid window as lo0,lo1,...,hi0,hi1,... (write --window=-1,... for negatives)")
        q.add_argument("--stencil", type=int, default=1, help="neighbour radius in cells")
        q.add_argument("--out", default=None, help="output file (default stdout)")

    q = sub.add_parser("dist", help="all seven metrics for one pair")
    common(q)
    q.add_argument("--x", type=_point, required=True)
    q.add_argument("--y", type=_point, required=True)
    q.add_argument("--json", action="store_true", help="JSON instead of a table")

    q = sub.add_parser("geodesic", help="witness polyline as CSV")
    common(q)
    q.add_argument("--x", type=_point, required=True)
    q.add_argument("--y", type=_point, required=True)
    q.add_argument("--metric", default="quasihyperbolic",
                   choices=["quasihyperbolic", "euclidean", "apollonian", "inner_diameter"])

    for name, text in (("constants", "estimate the domain constants"),
                       ("verify", "run the inequality suite")):
        q = sub.add_parser(name, help=text)
        common(q)
        q.add_argument("--pairs", type=int, default=1000)
        q.add_argument("--policy", choices=an.POLICIES, default="uniform")
        q.add_argument("--csv", default=None, help="per-pair metric table")

    q = sub.add_parser("chain", help="dyadic chain diagnostic along a geodesic")
    common(q)
    q.add_argument("--x", type=_point, default=None)
    q.add_argument("--y", type=_point, default=None)
    q.add_argument("--path", default=None, help="polyline CSV instead of a geodesic")
    return p


def _setup(args, points=()):
    if args.h is not None and not args.h > 0:
        raise UsageError("--h must be positive")
    if args.m < 8:
        raise UsageError("--m must be at least 8")
    try:
        D = load_domain(args.domain)
    except OSError as exc:
        raise UsageError(f"cannot read domain spec: {exc}")
    for p in points:
        if p is not None and len(p) != D.n:
            raise UsageError(f"point {p.tolist()} has dimension {len(p)}, domain has {D.n}")
    atlas = D.boundary_samples(args.m)
    G = an.default_grid(D, args.h, args.window, args.stencil,
                        points=[p for p in points if p is not None])
    return D, G, atlas


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fmt(name, mv):
    if mv.exact:
        return f"{name:<11} {mv.value:.6f}  exact"
    line = f"{name:<11} {mv.value:.6f}  [{mv.lower:.6f}, {mv.upper:.6f}]"
    return line + (f"  ({mv.warning})" if mv.warning else "")


def cmd_dist(args):
    D, G, atlas = _setup(args, (args.x, args.y))
    x, y = args.x, args.y
    res = {"j": j_metric(D, x, y), "alpha": apollonian(D, x, y, atlas)}
    res["k"], _ = shortest_path(G, D, x, y, "quasihyperbolic")
    res["lambda"], _ = shortest_path(G, D, x, y, "euclidean")
    res["alphatilde"], _ = shortest_path(G, D, x, y, "apollonian", atlas)
    res["rho"], _ = inner_diameter(D, x, y, G)
    res["jprime"] = j_prime(D, x, y, res["rho"])
    order = ("j", "jprime", "alpha", "k", "lambda", "rho", "alphatilde")
    ldr = log_density_ratio(D, x, y)
    if args.json:
        out = {k: res[k].as_dict() for k in order}
        out["log_density_ratio"] = {"value": ldr, "exact": True}
        text = json.dumps(out, indent=2) + "\n"
    else:
        lines = [f"{'metric':<11} value     bracket"]
        lines += [_fmt(k, res[k]) for k in order]
        lines.append(f"{'logdensity':<11} {ldr:.6f}  exact")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _polyline_csv(poly):
    lines = [",".join(f"x{i}" for i in range(poly.vertices.shape[1]))]
    lines += [",".join(repr(float(c)) for c in v) for v in poly.vertices]
    return "\n".join(lines) + "\n"


def cmd_geodesic(args):
    D, G, atlas = _setup(args, (args.x, args.y))
    if args.metric == "inner_diameter":
        _, poly = inner_diameter(D, args.x, args.y, G)
    else:
        _, poly = shortest_path(G, D, args.x, args.y, args.metric, atlas)
    _emit(_polyline_csv(poly), args.out)
    return EXIT_OK


def _sample(args, D):
    box = None if D.bounded else D.sample_box()
    if args.pairs < 1 and args.policy != "adversarial":
        raise UsageError("--pairs must be positive")
    return an.make_sample(D, args.policy, args.pairs, args.seed, box)


def cmd_constants(args):
    D, G, atlas = _setup(args)
    S = _sample(args, D)
    evals = an.evaluate_sample(D, G, atlas, S, alphatilde=D.apollonian)
    rep = an.estimate_constants(D, G, atlas, S, evals)
    _emit(rep.to_json() + "\n", args.out)
    if args.csv:
        _emit(an.pairs_csv(evals), args.csv)
    return EXIT_OK


def cmd_verify(args):
    D, G, atlas = _setup(args)
    S = _sample(args, D)
    evals = an.evaluate_sample(D, G, atlas, S, alphatilde=D.apollonian)
    rep = an.verify_inequalities(D, G, atlas, S, evals)
    _emit(rep.to_json() + "\n", args.out)
    if args.csv:
        _emit(an.pairs_csv(evals), args.csv)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_chain(args):
    if args.path is None and (args.x is None or args.y is None):
        raise UsageError("chain needs --path or both --x and --y")
    D, G, atlas = _setup(args, (args.x, args.y))
    if args.path is not None:
        gamma = Polyline.from_csv(args.path)
    else:
        _, gamma = shortest_path(G, D, args.x, args.y, "quasihyperbolic")
    rep = an.chain_diagnostics(D, G, atlas, gamma)
    _emit(rep.to_json() + "\n", args.out)
    return EXIT_OK


COMMANDS = {"dist": cmd_dist, "geodesic": cmd_geodesic, "constants": cmd_constants,
            "verify": cmd_verify, "chain": cmd_chain}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
