"""Command-line interface: orbit statistics, region audits, and sweeps.

Every subcommand accepts ``--config FILE`` (flat ``key = value`` text, one
section per subcommand) plus command-line overrides.  Exit codes: 0 on
success, 1 on usage errors, 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

import numpy as np

from . import conditions, critical, dynamics, exclusion
from .circle import CircleInterval, RegionUnion
from .maps import GOLDEN_MEAN, build_map
from .sweep import Axis, SweepSpec, fmt, write_sweep_csv

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _family_args(sp):
    sp.add_argument("--family", default="arnold",
                    choices=("arnold", "pinched", "cocycle"))
    sp.add_argument("--tau", type=float, default=0.0,
                    help="rotation offset of the base circle map (arnold)")
    sp.add_argument("--a", type=float, default=0.0,
                    help="sine amplitude of the base map (arnold)")
    sp.add_argument("--alpha", type=float, default=100.0,
                    help="steepness rate (pinched / cocycle)")
    sp.add_argument("--p", type=float, default=2.0,
                    help="profile power (pinched)")
    sp.add_argument("--b", type=float, default=0.0,
                    help="forcing amplitude")
    sp.add_argument("--d", type=int, default=1,
                    help="forcing power (odd for cosine-power)")
    sp.add_argument("--forcing", default=None,
                    choices=(None, "cos", "cospow", "sinpow"),
                    help="forcing kind override")
    sp.add_argument("--omega", type=float, default=GOLDEN_MEAN,
                    help="driving frequency (default: golden mean)")


def _map_params(args) -> dict:
    params = {"b": args.b, "d": args.d}
    if args.forcing:
        params["forcing"] = args.forcing
    if args.family == "arnold":
        params.update(tau=args.tau, a=args.a)
    else:
        params.update(alpha=args.alpha)
        if args.family == "pinched":
            params.update(p=args.p)
    return params


def _build(args):
    return build_map(args.family, _map_params(args))


def _int(x) -> int:
    return int(float(x))


def build_parser() -> _Parser:
    ap = _Parser(prog="qpfdyn",
                 description="Quasiperiodically forced circle map toolkit")
    ap.add_argument("--config", default=None,
                    help="flat key = value config file with one section per "
                         "subcommand; command-line flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("rotnum", help="fibred rotation number estimate")
    _family_args(sp)
    sp.add_argument("--n", default="1e6", help="orbit length")
    sp.add_argument("--theta0", type=float, default=0.0)
    sp.add_argument("--x0", type=float, default=0.0)

    sp = sub.add_parser("lyap", help="forward/backward fibre exponents")
    _family_args(sp)
    sp.add_argument("--n", default="1e5", help="orbit length")
    sp.add_argument("--theta0", type=float, default=0.0)
    sp.add_argument("--x0", type=float, default=0.0)

    sp = sub.add_parser("attractor", help="sample the forward attractor")
    _family_args(sp)
    sp.add_argument("--transient", default="1e4")
    sp.add_argument("--keep", default="1e4")
    sp.add_argument("--out", default="-", help="CSV path or - for stdout")

    sp = sub.add_parser("deviations",
                        help="orbit deviations from linear winding")
    _family_args(sp)
    sp.add_argument("--n", default="1e4")
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("tongue", help="locked-plateau boundaries in tau")
    _family_args(sp)
    sp.add_argument("--rho", type=float, default=0.0,
                    help="target rotation number")
    sp.add_argument("--n", default="1e6", help="orbit length cap")
    sp.add_argument("--tol-tau", type=float, default=1e-5)
    sp.add_argument("--tol-rho", type=float, default=1e-5)
    sp.add_argument("--b-values", default=None,
                    help="comma list; scan forcing amplitudes to CSV")
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("conditions",
                        help="measure and verdict the derivative hypotheses")
    _family_args(sp)
    sp.add_argument("--eps", type=float, default=0.1,
                    help="crossing-region tolerance (pinched regions)")
    sp.add_argument("--margin", type=float, default=None,
                    help="region margin override (arnold regions)")

    sp = sub.add_parser("critical",
                        help="build nested critical regions and audit them")
    _family_args(sp)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--windows", default="2,3",
                    help="comma list of per-level window lengths")
    sp.add_argument("--samples", type=int, default=2048)

    sp = sub.add_parser("exclude", help="toy frequency exclusion run")
    sp.add_argument("--region-length", type=float, default=0.01)
    sp.add_argument("--region-center", type=float, default=0.0)
    sp.add_argument("--child-factor", type=float, default=0.16,
                    help="child region length as a fraction of the parent")
    sp.add_argument("--N", default="2,8", help="window-range starts")
    sp.add_argument("--K", default="16,8", help="return budgets")
    sp.add_argument("--eps", default="1e-4,3e-5",
                    help="distance tolerances")
    sp.add_argument("--depth", type=int, default=1)

    sp = sub.add_parser("sweep", help="grid sweep from a config file")
    sp.add_argument("--out", default=None, help="override output CSV path")

    return ap


def _apply_config(ap: _Parser, argv):
    """Merge config-file values (section = subcommand) under the flags."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    path = argv[i + 1]
    # the flag lives on the root parser; accept it after the subcommand too
    argv = ["--config", path] + argv[:i] + argv[i + 2:]
    cmd = next((a for a in argv if not a.startswith("-") and a != path), None)
    if cmd == "sweep":
        # the [sweep] section describes the grid, not CLI flags; it is
        # parsed separately by the sweep command itself
        return argv
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_string("[_root]\n" + fh.read())
    if cmd is None or not cp.has_section(cmd):
        return argv
    injected = []
    for key, value in cp.items(cmd):
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            injected.extend([flag, value])
    # insert after the subcommand token
    j = argv.index(cmd)
    return argv[:j + 1] + injected + argv[j + 1:]


def _cmd_rotnum(args) -> int:
    m = _build(args)
    rho, err = dynamics.rotation_number(m, args.omega, _int(args.n),
                                        args.theta0, args.x0,
                                        with_error=True)
    print(f"rho = {fmt(rho)}  (half-length drift {fmt(err)})")
    return 0


def _cmd_lyap(args) -> int:
    m = _build(args)
    est = dynamics.lyapunov_pointwise(m, args.omega, args.theta0, args.x0,
                                      n_max=_int(args.n))
    print(f"lambda_fwd = {fmt(est.forward)}")
    print(f"lambda_bwd = {fmt(est.backward)}")
    print(f"converged = {est.converged}")
    return 0


def _write_rows(path: str, header: str, rows):
    text = "\n".join([header] + rows) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_attractor(args) -> int:
    m = _build(args)
    th, xs = dynamics.attractor_sample(m, args.omega,
                                       n_transient=_int(args.transient),
                                       n_keep=_int(args.keep))
    _write_rows(args.out, "theta,x",
                [f"{fmt(t)},{fmt(x)}" for t, x in zip(th, xs)])
    return 0


def _cmd_deviations(args) -> int:
    m = _build(args)
    dev, sup = dynamics.deviation_profile(m, args.omega, n=_int(args.n))
    _write_rows(args.out, "n,deviation,running_sup",
                [f"{k},{fmt(d)},{fmt(s)}"
                 for k, (d, s) in enumerate(zip(dev, sup))])
    return 0


def _cmd_tongue(args) -> int:
    params = _map_params(args)

    def boundary(b):
        scan = dict(params, b=b)
        scan.pop("tau", None)

        def make(tau):
            return build_map(args.family, dict(scan, tau=tau))

        return dynamics.tongue_boundary(make, args.omega,
                                        rho_target=args.rho,
                                        tol_tau=args.tol_tau,
                                        tol_rho=args.tol_rho,
                                        n_max=_int(args.n))

    if args.b_values:
        rows = []
        for b in [float(v) for v in args.b_values.split(",")]:
            tb = boundary(b)
            rows.append(f"{fmt(b)},{fmt(tb.tau_minus)},{fmt(tb.tau_plus)},"
                        f"{fmt(tb.width)},{tb.resolved}")
        _write_rows(args.out, "b,tau_minus,tau_plus,width,resolved", rows)
        return 0
    tb = boundary(args.b)
    print(f"tau_minus = {fmt(tb.tau_minus)}")
    print(f"tau_plus = {fmt(tb.tau_plus)}")
    print(f"width = {fmt(tb.width)}")
    print(f"resolved = {tb.resolved}")
    return 0 if tb.resolved else NUMERICAL_ERROR


def _regions_for(args):
    m = _build(args)
    if args.family == "pinched":
        E, C, I0, _, _ = conditions.choose_regions_pinched(
            args.alpha, args.p, beta=(args.b if args.b else 1.0),
            eps=args.eps)
        return m, E, C, I0, None
    if args.family == "arnold":
        E, C, I0, I0p, _, _, _, _ = conditions.choose_regions_arnold(
            args.tau, args.a, args.d, b=(args.b if args.b else 1.0),
            margin=getattr(args, "margin", None))
        return m, E, C, I0, I0p
    raise ValueError("region selection supports arnold and pinched only")


def _cmd_conditions(args) -> int:
    m, E, C, I0, I0p = _regions_for(args)
    report = conditions.estimate_bounds(m, E, C, I0, I0p)
    print(report.to_json())
    return 0 if report.all_passed else NUMERICAL_ERROR


def _cmd_critical(args) -> int:
    m, E, C, I0, I0p = _regions_for(args)
    report = conditions.estimate_bounds(m, E, C, I0, I0p)
    if not report.all_passed:
        print("hypothesis verdicts failed; not building", file=sys.stderr)
        return NUMERICAL_ERROR
    M = [int(v) for v in args.windows.split(",")]
    state = critical.build_critical_state(m, report, args.omega, M,
                                          n_samples=args.samples)
    print(state.to_json())
    return 0


def _cmd_exclude(args) -> int:
    half = args.region_length / 2.0
    c = args.region_center
    parent = RegionUnion((CircleInterval(c - half, c + half),))
    child_half = half * args.child_factor
    child = RegionUnion((CircleInterval(c - child_half, c + child_half),))

    def region_fn(omega, level):
        return parent if level == 0 else child

    N = [float(v) for v in args.N.split(",")]
    K = [int(v) for v in args.K.split(",")]
    eps = [float(v) for v in args.eps.split(",")]
    sch = exclusion.desk_schedule(n_comp=1, N=N, K=K, eps=eps)
    sets = exclusion.build_omega(region_fn, sch, args.depth)
    print(json.dumps([json.loads(s.to_json()) for s in sets], indent=2))
    return 0


def _sweep_spec_from_config(path: str, out_override=None) -> SweepSpec:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_string("[_root]\n" + fh.read())
    if not cp.has_section("sweep"):
        raise ValueError("config must contain a [sweep] section")
    sec = dict(cp.items("sweep"))
    axes = []
    for i in (1, 2, 3):
        name = sec.pop(f"axis{i}", None)
        if name is None:
            continue
        lo, hi, count = (sec.pop(f"axis{i}_lo"), sec.pop(f"axis{i}_hi"),
                         sec.pop(f"axis{i}_count"))
        scale = sec.pop(f"axis{i}_scale", "linear")
        axes.append(Axis(name, float(lo), float(hi), _int(count), scale))
    observables = tuple(v.strip()
                        for v in sec.pop("observables", "rho").split(","))
    family = sec.pop("family", "arnold")
    spec_kwargs = {}
    for key in ("n_rho", "n_lyap", "n_density", "seed"):
        if key in sec:
            spec_kwargs[key] = _int(sec.pop(key))
    for key in ("tol_rho", "tol_tau"):
        if key in sec:
            spec_kwargs[key] = float(sec.pop(key))
    output = out_override or sec.pop("output", "sweep.csv")
    sec.pop("output", None)
    fixed = {k: (v if k == "forcing" else float(v)) for k, v in sec.items()}
    if "d" in fixed:
        fixed["d"] = int(fixed["d"])
    return SweepSpec(family=family, fixed=fixed, axes=tuple(axes),
                     observables=observables, output=output, **spec_kwargs)


def _cmd_sweep(args) -> int:
    if not args.config:
        print("error: sweep requires --config", file=sys.stderr)
        return USAGE_ERROR
    spec = _sweep_spec_from_config(args.config, args.out)
    complete = write_sweep_csv(spec)
    print(f"{'complete' if complete else 'checkpointed'}: {spec.output}")
    return 0


_COMMANDS = {
    "rotnum": _cmd_rotnum,
    "lyap": _cmd_lyap,
    "attractor": _cmd_attractor,
    "deviations": _cmd_deviations,
    "tongue": _cmd_tongue,
    "conditions": _cmd_conditions,
    "critical": _cmd_critical,
    "exclude": _cmd_exclude,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        argv = _apply_config(ap, argv)
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
