"""Command-line front end.

Every subcommand is deterministic given its flags: stochastic commands
take --seed (default 0) and are single-threaded, so repeated runs are
byte-identical.  Summary records go to stdout as one line of
key=value pairs; tabular payloads go to --out as CSV with 12
significant digits and LF line endings.

Exit codes: 0 success, 2 validation error, 3 capacity error,
4 bracket/precondition error.

CSV schemas:
  series:     level,x,y,z,u,v,w,se_x,se_y,se_z,se_u,se_v,se_w
  trajectory: iter,X,Z
  phase:      lambda1,lambda2,classification
  threshold:  param,lambda1_star
"""

import argparse
import sys

import numpy as np

from . import dynsys, popdyn
from .broadcast import TreeShape
from .channel import (
    ChannelParams,
    Spectrum,
    ks_check,
    params_from_eigenvalues,
    spectrum,
)
from .errors import BracketError, CapacityError, ValidationError
from .exact import MomentStats, exact_moments
from .formulas import map_coefficients

SERIES_HEADER = "level,x,y,z,u,v,w,se_x,se_y,se_z,se_u,se_v,se_w"
TRAJECTORY_HEADER = "iter,X,Z"
PHASE_HEADER = "lambda1,lambda2,classification"
THRESHOLD_HEADER = "param,lambda1_star"


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def summary(**fields) -> None:
    print(" ".join(f"{k}={fmt(v)}" for k, v in fields.items()))


def emit(rows, header: str, path: str | None) -> None:
    """Write CSV rows (iterables of cells) under the given header."""
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt(c) for c in row))
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def series_rows(series: list[MomentStats]):
    for s in series:
        yield (s.level, s.x, s.y, s.z, s.u, s.v, s.w,
               s.se_x, s.se_y, s.se_z, s.se_u, s.se_v, s.se_w)


def add_channel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--p0", type=float)
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)


def resolve_params(args) -> ChannelParams:
    lam = args.lambda1 is not None or args.lambda2 is not None
    ps = args.p0 is not None or args.p1 is not None or args.p2 is not None
    if lam == ps:
        raise ValidationError(
            "provide exactly one of (--lambda1 --lambda2) or (--p0 --p1 --p2)"
        )
    if lam:
        if args.lambda1 is None or args.lambda2 is None:
            raise ValidationError("both --lambda1 and --lambda2 are required")
        return params_from_eigenvalues(args.q, args.lambda1, args.lambda2)
    if args.p0 is None or args.p1 is None or args.p2 is None:
        raise ValidationError("all of --p0 --p1 --p2 are required")
    return ChannelParams(q=args.q, p0=args.p0, p1=args.p1, p2=args.p2)


def cmd_channel(args) -> None:
    params = resolve_params(args)
    spec = spectrum(params)
    fields = dict(
        q=params.q, p0=params.p0, p1=params.p1, p2=params.p2,
        lambda1=spec.lambda1, lambda2=spec.lambda2, lambda3=spec.lambda3,
        lambda_star=spec.lambda_star,
    )
    if args.d is not None:
        rep = ks_check(args.d, spec)
        fields.update(
            d=rep.d, d_lambda_sq=rep.d_lambda_sq,
            d_lambda1_sq=rep.d_lambda1_sq, d_lambda2_sq=rep.d_lambda2_sq,
            ks_solvable=rep.solvable, ks_warn=rep.warn,
        )
    summary(**fields)


def cmd_exact(args) -> None:
    params = resolve_params(args)
    series = [
        exact_moments(params, TreeShape(args.d, n), cap=args.cap)
        for n in range(args.n + 1)
    ]
    emit(series_rows(series), SERIES_HEADER, args.out)
    summary(command="exact", q=args.q, d=args.d, n=args.n, rows=len(series))


def cmd_mctree(args) -> None:
    params = resolve_params(args)
    rng = np.random.default_rng(args.seed)
    stats = popdyn.mc_tree_moments(params, TreeShape(args.d, args.n), args.samples, rng)
    emit(series_rows([stats]), SERIES_HEADER, args.out)
    summary(
        command="mctree", q=args.q, d=args.d, n=args.n,
        samples=args.samples, seed=args.seed, x=stats.x, se_x=stats.se_x,
    )


def cmd_popdyn(args) -> None:
    params = resolve_params(args)
    series = popdyn.run_series(params, args.d, args.pop, args.levels, args.seed)
    emit(series_rows(series), SERIES_HEADER, args.out)
    verdict = popdyn.classify_series(series, args.pop)
    summary(
        command="popdyn", q=args.q, d=args.d, pop=args.pop,
        levels=args.levels, seed=args.seed,
        verdict=verdict.value, x_final=series[-1].x,
    )


def cmd_dynsys(args) -> None:
    # The truncated map needs only the eigenvalue pair, so it can probe
    # (lambda1, lambda2) outside the channel-feasible region.
    coeffs = map_coefficients(args.q, args.d, Spectrum(args.lambda1, args.lambda2))
    traj = dynsys.iterate_classify(
        dynsys.DynState(args.x0, args.z0), coeffs,
        max_iter=args.iters, tol=args.tol, escape_bound=args.escape_bound,
    )
    rows = ((i, s.Xc, s.Zc) for i, s in enumerate(traj.states))
    emit(rows, TRAJECTORY_HEADER, args.out)
    summary(
        command="dynsys", q=args.q, d=args.d,
        lambda1=args.lambda1, lambda2=args.lambda2,
        classification=traj.classification.value,
        iterations=traj.iterations, left_domain=traj.left_domain,
    )


def cmd_fixedpoints(args) -> None:
    coeffs = map_coefficients(args.q, args.d, Spectrum(args.lambda1, args.lambda2))
    pts = dynsys.fixed_points(coeffs)
    for i, fp in enumerate(pts):
        summary(
            index=i, X=fp.state.Xc, Z=fp.state.Zc,
            mult1=fp.multipliers[0], mult2=fp.multipliers[1],
            stable=fp.stable,
        )
    summary(command="fixedpoints", q=args.q, d=args.d, count=len(pts))


def cmd_threshold(args) -> None:
    if args.method == "dynsys":
        def solve(x_start):
            res = dynsys.escape_threshold(
                args.q, args.d, args.lambda2, x_start,
                (args.lo, args.hi), tol=args.tol,
            )
            return res.lambda1_star, res.d_lambda1_star_sq, res.below_ks, False
    else:
        def solve(x_start):
            res = popdyn.survival_threshold(
                args.q, args.d, args.lambda2, (args.lo, args.hi),
                pop_size=args.pop, levels=args.levels, seed=args.seed,
                resolution=args.resolution,
            )
            return res.lambda1_star, res.d_lambda1_star_sq, res.below_ks, res.ambiguous

    if args.sweep_x_start:
        starts = [float(v) for v in args.sweep_x_start.split(",")]
        rows = [(x0, solve(x0)[0]) for x0 in starts]
        emit(rows, THRESHOLD_HEADER, args.out)
        summary(command="threshold", method=args.method, points=len(rows))
        return
    star, dsq, below, ambiguous = solve(args.x_start)
    summary(
        command="threshold", method=args.method, q=args.q, d=args.d,
        lambda2=args.lambda2,
        lambda1_star=star, d_lambda1_star_sq=dsq,
        below_ks=below, ambiguous=ambiguous,
    )


def cmd_sweep(args) -> None:
    l1s = np.linspace(args.lambda1_min, args.lambda1_max, args.lambda1_steps)
    l2s = np.linspace(args.lambda2_min, args.lambda2_max, args.lambda2_steps)
    rows = []
    for l1 in l1s:
        for l2 in l2s:
            coeffs = map_coefficients(
                args.q, args.d, Spectrum(float(l1), float(l2))
            )
            traj = dynsys.iterate_classify(
                dynsys.DynState(args.x0, args.z0), coeffs,
                max_iter=args.iters, keep_states=False,
            )
            rows.append((float(l1), float(l2), traj.classification.value))
    emit(rows, PHASE_HEADER, args.out)
    summary(command="sweep", q=args.q, d=args.d, points=len(rows))


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="treebroadcast",
        description="Broadcast reconstruction on d-ary trees: exact, Monte "
        "Carlo and dynamical-system engines.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel", help="channel spectrum and Kesten-Stigum report")
    add_channel_args(p)
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("exact", help="exact moment sweep over levels 0..n")
    add_channel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cap", type=int, default=10**7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("mctree", help="independent full-tree Monte Carlo moments")
    add_channel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mctree)

    p = sub.add_parser("popdyn", help="population-dynamics moment series")
    add_channel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--pop", type=int, default=popdyn.DEFAULT_POPULATION)
    p.add_argument("--levels", type=int, default=popdyn.DEFAULT_LEVELS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_popdyn)

    p = sub.add_parser("dynsys", help="iterate the truncated (X, Z) map")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--z0", type=float, default=0.0)
    p.add_argument("--iters", type=int, default=dynsys.DEFAULT_MAX_ITER)
    p.add_argument("--tol", type=float, default=dynsys.DEFAULT_TOL)
    p.add_argument("--escape-bound", type=float, default=dynsys.DEFAULT_ESCAPE_BOUND)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dynsys)

    p = sub.add_parser("fixedpoints", help="fixed points of the truncated map")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.set_defaults(func=cmd_fixedpoints)

    p = sub.add_parser("threshold", help="escape/survival threshold in lambda1")
    p.add_argument("--method", choices=("dynsys", "popdyn"), default="dynsys")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.add_argument("--x-start", type=float, default=0.5)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--resolution", type=float, default=0.005)
    p.add_argument("--pop", type=int, default=popdyn.DEFAULT_POPULATION)
    p.add_argument("--levels", type=int, default=popdyn.DEFAULT_LEVELS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep-x-start", help="comma list of x_start values; emits threshold CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", help="classification over a lambda1 x lambda2 grid")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda1-min", type=float, required=True)
    p.add_argument("--lambda1-max", type=float, required=True)
    p.add_argument("--lambda1-steps", type=int, default=20)
    p.add_argument("--lambda2-min", type=float, required=True)
    p.add_argument("--lambda2-max", type=float, required=True)
    p.add_argument("--lambda2-steps", type=int, default=20)
    p.add_argument("--x0", type=float, default=0.5)
    p.add_argument("--z0", type=float, default=0.0)
    p.add_argument("--iters", type=int, default=10**4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error=validation message={str(exc)!r}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error=capacity message={str(exc)!r}", file=sys.stderr)
        return 3
    except BracketError as exc:
        print(f"error=bracket message={str(exc)!r}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
