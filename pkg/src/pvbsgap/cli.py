"""Command-line front end: gap | certify | bulk | sweep-theta | epsilon-verify.

All outputs carry the schema tag "pvbs-gap/1" and are byte-stable for a
fixed configuration and seed.  Exit codes: 0 ok, 1 usage/config error,
2 sector too large, 3 solver failure, 4 gapless (direction or bulk),
5 no feasible ell, 6 epsilon verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import pi

from .errors import (
    GaplessBulk,
    GaplessDirection,
    NoFeasibleEll,
    PvbsError,
    SectorTooLarge,
    SolverFailure,
)
from .geometry import (
    PARALLELOTOPE,
    ModelParams,
    RegionSpec,
    build_region,
    spec_from_json,
)
from .martingale import (
    certify_bulk,
    certify_lower_bound,
    epsilon_bruteforce,
    epsilon_exact,
    random_epsilon_instances,
)
from .spectra import spectral_gap
from .variational import theta_sweep, trial_state_energy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TOO_LARGE = 2
EXIT_SOLVER = 3
EXIT_GAPLESS = 4
EXIT_NO_ELL = 5
EXIT_MISMATCH = 6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _parse_vector(text):
    try:
        return tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError) as err:
        raise _UsageError(f"malformed vector {text!r}: {err}") from err


def _params_from(args, m_required=True):
    if args.lam is None:
        raise _UsageError("--lambda is required")
    lam = tuple(float(v) for v in _parse_vector(args.lam))
    dim = args.dim if args.dim is not None else len(lam)
    if len(lam) != dim:
        raise _UsageError(f"--lambda has {len(lam)} entries for --dim {dim}")
    if any(v <= 0 for v in lam):
        raise _UsageError("--lambda entries must be positive")
    m = getattr(args, "m", None)
    if m is None:
        if m_required:
            raise _UsageError("--m is required")
        return ModelParams.make(lam, (1,) + (0,) * (dim - 1))
    raw = _parse_vector(m)
    if len(raw) != dim:
        raise _UsageError(f"--m has {len(raw)} entries for --dim {dim}")
    norm2 = sum(float(v) ** 2 for v in raw)
    if norm2 == 0:
        raise _UsageError("--m must be nonzero")
    if abs(norm2 - 1.0) > 2e-6:
        print(f"note: --m normalized to unit length (|m| was {norm2 ** 0.5:.9f})",
              file=sys.stderr)
    return ModelParams.make(lam, raw)


def _region_from(args, params):
    if args.region_spec is not None:
        text = args.region_spec
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        return build_region(spec_from_json(json.loads(text)), params)
    if args.box is None:
        raise _UsageError("either --box or --region-spec is required")
    lengths = tuple(int(v) for v in _parse_vector(args.box))
    if len(lengths) != params.d:
        raise _UsageError(f"--box has {len(lengths)} entries for dim {params.d}")
    spec = RegionSpec(PARALLELOTOPE, base=(0,) * params.d, lengths=lengths)
    return build_region(spec, params)


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sectors_from(args, region):
    if args.sectors is None:
        return None, False
    if args.sectors == "all":
        return None, True
    return tuple(int(v) for v in _parse_vector(args.sectors)), False


def _load_config(argv):
    """Apply --config JSON as flag defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    with open(path, encoding="utf-8") as fh:
        conf = json.load(fh)
    argv = argv[:i] + argv[i + 2:]
    extra = []
    for key, value in sorted(conf.items()):
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            extra.extend([flag, str(value)])
    return argv + extra


def cmd_gap(args):
    params = _params_from(args, m_required=False)
    region = _region_from(args, params)
    sectors, exhaustive = _sectors_from(args, region)
    result = spectral_gap(region, params, sectors, exhaustive=exhaustive,
                          sector_cap=args.sector_cap,
                          dense_threshold=args.dense_threshold)
    _emit(result.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_certify(args):
    params = _params_from(args)
    cert = certify_lower_bound(params, scale=args.scale,
                               dense_threshold=args.dense_threshold)
    _emit(cert.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_bulk(args):
    params = _params_from(args, m_required=False)
    cert = certify_bulk(params, scale=args.scale,
                        dense_threshold=args.dense_threshold)
    _emit(cert.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_sweep_theta(args):
    lam = tuple(float(v) for v in _parse_vector(args.lam))
    if len(lam) != 2:
        raise _UsageError("sweep-theta is a d=2 sweep; --lambda needs 2 entries")
    if args.theta_grid is not None:
        thetas = [float(v) for v in _parse_vector(args.theta_grid)]
    else:
        n = args.grid_points
        thetas = [i * (pi / 2) / (n - 1) for i in range(n)]

    def certifier(params):
        return certify_lower_bound(params, scale=args.scale,
                                   dense_threshold=args.dense_threshold)

    lines = ["theta,closed_form_bound,trial_quotient_at_L,certificate_lower"]
    for theta, bound, quotient, lower in theta_sweep(lam, thetas, args.scale,
                                                     certifier=certifier):
        cells = [f"{theta:.12g}",
                 "NA" if bound is None else f"{bound:.12g}",
                 f"{quotient:.12g}",
                 "NA" if lower is None else f"{lower:.12g}"]
        lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_epsilon_verify(args):
    if args.instances < 1:
        raise _UsageError("--instances must be at least 1")
    worst = 0.0
    checked = 0
    skipped = 0
    lines = []
    for inst in random_epsilon_instances(args.seed, args.instances):
        if inst.get("skipped"):
            skipped += 1
            lines.append(f"SKIP  {inst['skipped']}")
            continue
        exact = epsilon_exact(inst["filtration"], inst["n"], inst["ell"],
                              inst["params"])
        brute = epsilon_bruteforce(inst["filtration"], inst["n"], inst["ell"],
                                   inst["params"])
        dev = abs(exact - brute)
        worst = max(worst, dev)
        checked += 1
        lines.append(f"ok    n={inst['n']} ell={inst['ell']} exact={exact:.12f} "
                     f"bruteforce={brute:.12f} |diff|={dev:.3e}")
    verdict = "PASS" if worst < args.tolerance else "FAIL"
    lines.append(f"{verdict}: {checked} instances (skipped {skipped}), "
                 f"max |exact - bruteforce| = {worst:.3e} "
                 f"(tolerance {args.tolerance:g})")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if verdict == "PASS" else EXIT_MISMATCH


def build_parser():
    parser = _Parser(prog="pvbs-gap",
                     description="PVBS spectral gaps and gap certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_m=True):
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--lambda", dest="lam", default=None,
                       help="comma-separated couplings lambda_1,...,lambda_d")
        if with_m:
            p.add_argument("--m", default=None,
                           help="comma-separated inward normal (auto-normalized)")
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None, help=argparse.SUPPRESS)
        p.add_argument("--dense-threshold", type=int, default=4096)
        p.add_argument("--sector-cap", type=int, default=5_000_000)
        p.add_argument("--seed", type=int, default=7)

    p_gap = sub.add_parser("gap", help="spectral gap of one finite volume")
    common(p_gap)
    p_gap.add_argument("--box", default=None, help="axis box lengths L1,...,Ld")
    p_gap.add_argument("--region-spec", default=None,
                       help="region spec as JSON (or @file)")
    p_gap.add_argument("--sectors", default=None,
                       help="comma list of particle numbers, or 'all'")
    p_gap.set_defaults(func=cmd_gap)

    p_cert = sub.add_parser("certify", help="half-space gap certificate")
    common(p_cert)
    p_cert.add_argument("--scale", type=int, default=8)
    p_cert.set_defaults(func=cmd_certify)

    p_bulk = sub.add_parser("bulk", help="bulk (Z^d) gap certificate")
    common(p_bulk, with_m=False)
    p_bulk.add_argument("--scale", type=int, default=8)
    p_bulk.set_defaults(func=cmd_bulk)

    p_sweep = sub.add_parser("sweep-theta",
                             help="gap collapse sweep as m rotates away from "
                                  "the gapless direction (d=2)")
    common(p_sweep, with_m=False)
    p_sweep.add_argument("--scale", type=int, default=16,
                         help="slab size L for the trial-state column")
    p_sweep.add_argument("--grid-points", type=int, default=9)
    p_sweep.add_argument("--theta-grid", default=None,
                         help="explicit comma list of angles in radians")
    p_sweep.set_defaults(func=cmd_sweep_theta)

    p_eps = sub.add_parser("epsilon-verify",
                           help="seeded exact-vs-bruteforce overlap check")
    common(p_eps, with_m=False)
    p_eps.add_argument("--instances", type=int, default=50)
    p_eps.add_argument("--tolerance", type=float, default=1e-9)
    p_eps.set_defaults(func=cmd_epsilon_verify)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _load_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (GaplessDirection, GaplessBulk) as err:
        print(f"gapless: {err}", file=sys.stderr)
        return EXIT_GAPLESS
    except NoFeasibleEll as err:
        print(f"no feasible ell: {err}", file=sys.stderr)
        return EXIT_NO_ELL
    except SectorTooLarge as err:
        print(f"sector too large: {err}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except SolverFailure as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, json.JSONDecodeError, PvbsError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
