"""Command-line interface.

Exit codes: 0 when every check passes, 1 on a verification or dynamics
failure, 2 on bad usage or malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import biham_lift, dynamics, poisson
from .errors import CalogeroError, PositionCollision, PreconditionViolation
from .phase_core import Coupling, PhaseState, build_lax, commutation_residual, random_state
from .serialize import complex_list
from .spectral import conjecture_residual, default_probes, eigenvector_coords, spectral_coords

SUITES = ("canonicity", "bracket1", "lenard", "table", "superintegrability", "euler",
          "delta-generator", "commutation", "lift")


class UsageError(Exception):
    pass


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj):
    _emit(args, json.dumps(obj, indent=2) + "\n")


def _load_state(path: str) -> PhaseState:
    try:
        with open(path) as fh:
            d = json.load(fh)
        return PhaseState.from_dict(d)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"cannot read state from {path}: {exc}") from None


def _summary(report, entries: bool) -> dict:
    d = report.to_dict()
    if not entries:
        d.pop("entries", None)
    return d


# -- commands -----------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.n < 1:
        raise UsageError("n must be at least 1")
    s = random_state(args.n, np.random.default_rng(args.seed), args.coupling)
    _emit_json(args, s.to_dict())
    return 0


def cmd_coords(args) -> int:
    s = _load_state(args.state)
    pair = build_lax(s)
    coords = spectral_coords(pair)
    out = coords.to_dict()
    ev = eigenvector_coords(pair)
    out["mu_tilde_eigenvector"] = complex_list(ev)
    scale = np.maximum(1.0, np.abs(coords.mu_tilde))
    out["route_deviation"] = float(np.max(np.abs(ev - coords.mu_tilde) / scale))
    _emit_json(args, out)
    return 0


def _states(args) -> list:
    if args.state:
        return [_load_state(args.state)]
    rng = np.random.default_rng(args.seed)
    return [random_state(args.n, rng, args.coupling) for _ in range(args.random)]


def _run_suite(name: str, s: PhaseState, args) -> list:
    fd = {} if args.tol_fd is None else {"h": args.tol_fd}
    tol = {} if args.tol_check is None else {"tol": args.tol_check}
    if name == "canonicity":
        return [poisson.verify_canonicity(s, **tol, **fd)]
    if name == "bracket1":
        return [poisson.verify_bracket1_relations(s, **tol, **fd)]
    if name == "lenard":
        return [poisson.verify_lenard(s, **tol, **fd)]
    if name == "table":
        return [poisson.verify_bracket_table(s, **tol, **fd)]
    if name == "superintegrability":
        return [poisson.verify_superintegrability(s, **tol, **fd)]
    if name == "euler":
        return [poisson.verify_euler_field(s, **tol, **fd)]
    if name == "delta-generator":
        return [poisson.verify_delta_generator(s, complex(args.probe), **tol, **fd)]
    if name == "commutation":
        report = poisson.BracketReport("commutation", args.tol_check or 1e-12)
        pair = build_lax(s)
        for lam in default_probes(pair):
            report.add("lambda", str(lam), commutation_residual(pair, lam), 0.0)
        return [report]
    raise UsageError(f"unknown suite {name!r}")


def _lift_reports(args, rng) -> list:
    if args.n > 3:
        raise UsageError("lift checks are limited to n <= 3")
    if getattr(args, "point", None):
        try:
            with open(args.point) as fh:
                pt = biham_lift.LiftedPoint.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read lifted point: {exc}") from None
    else:
        pt = biham_lift.LiftedPoint.random(args.n, rng)
    kw = {} if args.tol_check is None else {"tol": args.tol_check}
    return list(biham_lift.check_lift(pt, rng, trials=args.trials, **kw).values())


def cmd_verify(args) -> int:
    if args.suite not in SUITES and args.suite != "all":
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all")
    names = SUITES if args.suite == "all" else (args.suite,)
    reports = []
    if "lift" in names:
        reports += _lift_reports(args, np.random.default_rng(args.seed))
    phase_names = [nm for nm in names if nm != "lift"]
    if phase_names:
        for s in _states(args):
            for nm in phase_names:
                if nm == "superintegrability" and s.n < 2:
                    continue
                reports += _run_suite(nm, s, args)
    worst = {}
    for r in reports:
        worst[r.check] = max(worst.get(r.check, 0.0), r.max_err)
    ok = all(r.passed for r in reports)
    _emit_json(args, {"suite": args.suite, "pass": ok, "worst": worst,
                      "reports": [_summary(r, args.entries) for r in reports]})
    return 0 if ok else 1


def cmd_lift_verify(args) -> int:
    reports = _lift_reports(args, np.random.default_rng(args.seed))
    ok = all(r.passed for r in reports)
    _emit_json(args, {"suite": "lift", "pass": ok,
                      "worst": {r.check: r.max_err for r in reports},
                      "reports": [_summary(r, args.entries) for r in reports]})
    return 0 if ok else 1


def cmd_evolve(args) -> int:
    s = _load_state(args.state)
    times = np.linspace(0.0, args.t_end, args.samples)
    if args.method == "exact":
        traj = dynamics.sample_exact(s, times)
    else:
        traj = dynamics.integrate(s, args.t_end, tol=args.tol_ode, t_out=times)
    traj = dynamics.track_coordinates(traj)
    _emit(args, traj.to_csv())
    print(f"# max energy drift {traj.energy_drift:.3e}, max lambda drift {traj.lambda_drift:.3e}",
          file=sys.stderr)
    return 0


def cmd_scatter(args) -> int:
    s = _load_state(args.state)
    data = dynamics.scattering(s, args.t_max)
    check = dynamics.asymptotic_momenta_check(s, args.t_max)
    lam = np.sort(data.lambdas)
    dev = max(float(np.max(np.abs(np.sort(data.p_plus) - lam))),
              float(np.max(np.abs(np.sort(data.p_minus) - lam))))
    tol = args.tol_check or 1e-6
    out = data.to_dict()
    out["momentum_deviation"] = dev
    out["asymptotics"] = check.to_dict()
    ok = dev <= tol and check.passed
    out["pass"] = ok
    _emit_json(args, out)
    return 0 if ok else 1


def _parse_range(text: str):
    try:
        a, b = (int(v) for v in text.split(".."))
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a..b") from None
    if a < 1 or b < a:
        raise UsageError(f"bad range {text!r}; need 1 <= a <= b")
    return a, b


def cmd_conjecture(args) -> int:
    a, b = _parse_range(args.n_range)
    rng = np.random.default_rng(args.seed)
    tol = args.tol_check or 1e-8
    rows = []
    for n in range(a, b + 1):
        plain = scaled = 0.0
        for _ in range(args.trials):
            pair = build_lax(random_state(n, rng, args.coupling))
            probes = default_probes(pair)
            plain = max(plain, conjecture_residual(pair, probes))
            scaled = max(scaled, conjecture_residual(pair, probes, scale_by_c=True))
        rows.append({"n": n, "residual": plain, "residual_c_scaled": scaled,
                     "pass": plain <= tol, "pass_c_scaled": scaled <= tol})
    ok = all(r["pass"] for r in rows)
    _emit_json(args, {"coupling": args.coupling.value, "trials": args.trials, "tolerance": tol,
                      "pass": ok, "per_n": rows})
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------

def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=2)
    common.add_argument("--coupling", type=Coupling.parse, default=Coupling.IMAGINARY,
                        help="real | imaginary")
    common.add_argument("--tol-fd", type=_positive, default=None, help="finite-difference step")
    common.add_argument("--tol-check", type=_positive, default=None, help="pass/fail tolerance")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="calogero", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="sample a random state")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("coords", parents=[common], help="spectral coordinates of a state")
    p.add_argument("state")
    p.set_defaults(func=cmd_coords)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("state", nargs="?")
    p.add_argument("--suite", required=True)
    p.add_argument("--random", type=int, default=1, metavar="COUNT")
    p.add_argument("--probe", default="0.3+0.7j", help="spectral parameter for delta-generator")
    p.add_argument("--trials", type=int, default=50, help="Jacobi triples for the lift suite")
    p.add_argument("--point", default=None, help="LiftedPoint JSON for the lift suite")
    p.add_argument("--entries", action="store_true", help="include every residual entry")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lift-verify", parents=[common], help="checks of the lifted bi-Hamiltonian pair")
    p.add_argument("--point", default=None)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--entries", action="store_true")
    p.set_defaults(func=cmd_lift_verify)

    p = sub.add_parser("evolve", parents=[common], help="trajectory CSV")
    p.add_argument("state")
    p.add_argument("--t-end", type=_positive, default=1.0)
    p.add_argument("--method", choices=("exact", "rk"), default="exact")
    p.add_argument("--tol-ode", type=_positive, default=1e-10)
    p.add_argument("--samples", type=int, default=51)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("scatter", parents=[common], help="asymptotic momenta and intercepts")
    p.add_argument("state")
    p.add_argument("--t-max", type=_positive, default=1e3)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("conjecture", parents=[common], help="test E - G = Delta''/2")
    p.add_argument("--n-range", default="1..8")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_conjecture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format == "csv" and args.command != "evolve":
        parser.error("csv output is only available for evolve")
    if args.format == "json" and args.command == "evolve":
        parser.error("evolve writes CSV")
    if getattr(args, "random", 1) < 1 or getattr(args, "trials", 1) < 1:
        parser.error("counts must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PreconditionViolation, PositionCollision) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except CalogeroError as exc:
        print(f"failed [{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
