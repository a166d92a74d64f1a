"""``otdistill`` command-line front end.

Every command writes a run manifest (resolved configuration, seed, version,
input digests, duration). ``otdistill --from-manifest run.json`` replays a
run with the recorded configuration.

Exit codes: 0 success, 1 computation error, 2 I/O error, 3 bad flag.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .barycenter import (BarycenterConfig, GridSpec, displacement_midpoint, fixed_grid_barycenter,
                         free_support_barycenter, render_atoms_to_grid, render_points_to_grid)
from .bounds import BOUND_COLUMNS, bound_comparison_sweep
from .core import OtDistillError, UnknownGeometryError, class_rng, make_blob_dataset
from .distill import DistillConfig, ToyEncoder, distill_dataset
from .metrics import KernelSpec, kl_divergence_grid, mmd_squared, sliced_wasserstein
from .ot import build_cost_matrix, solve_exact

log = logging.getLogger("otdistill")

EXIT_ERROR, EXIT_IO, EXIT_BAD_FLAG = 1, 2, 3
SEED_ENV = "OTDISTILL_SEED"


class BadFlagError(OtDistillError):
    pass


class SingleLabelInputError(OtDistillError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_BAD_FLAG)


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _resolve_seed(args, default=0):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise BadFlagError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return default


# -- commands ---------------------------------------------------------------

def cmd_gen_data(args):
    if args.n < args.classes:
        raise BadFlagError("--n must be at least --classes")
    try:
        data = make_blob_dataset(args.seed, args.classes, args.n // args.classes, args.d,
                                 args.geometry, args.noise)
    except UnknownGeometryError as exc:
        raise BadFlagError(f"--geometry: {exc}") from None
    fio.write_points_csv(args.out, data)
    return [args.out], []


def cmd_distance(args):
    src = fio.read_points_csv(args.source)
    tgt = fio.read_points_csv(args.target)
    if args.p < 1:
        raise BadFlagError("--p must be >= 1")
    sol = solve_exact(src, tgt, build_cost_matrix(src, tgt, args.p))
    print(fio.fmt(max(sol.objective, 0.0) ** (1.0 / args.p)))
    outputs = []
    if args.emit_plan:
        fio.write_plan_csv(args.emit_plan, sol.plan)
        outputs.append(args.emit_plan)
    return outputs, [args.source, args.target]


def _bary_config(args, m) -> BarycenterConfig:
    if args.eta <= 0 or args.k < 1 or m < 1:
        raise BadFlagError("--eta must be > 0, --k and --m >= 1")
    return BarycenterConfig(m=m, K=args.k, eta=args.eta, init_strategy=args.init,
                            single_solve=args.single_solve)


def cmd_barycenter(args):
    if args.per_label:
        groups = fio.read_labeled_csv(args.input)
    else:
        groups = [fio.read_points_csv(args.input)]
    config = _bary_config(args, args.m)
    out = []
    for dist in groups:
        seed = int(class_rng(args.seed, dist.label).integers(0, 2**63))
        res = free_support_barycenter(dist, config, seed=seed)
        if abs(res.weights.sum() - 1.0) > 1e-9 or np.any(res.weights < 0):
            raise OtDistillError("barycenter weights left the simplex")
        log.info("label %s: W2^2 %s -> %s", dist.label, res.initial_objective, res.objective_trace[-1])
        out.append({"label": dist.label, "atoms": res.atoms.tolist(),
                    "weights": res.weights.tolist(), "objective_trace": list(res.objective_trace)})
    fio.dump_json(args.out, out)
    return [args.out], [args.input]


def grid_for(groups, size: int, margin: float = 0.15) -> GridSpec:
    pts = np.vstack([g.points for g in groups])
    lo, hi = float(pts.min()), float(pts.max())
    span = max(hi - lo, 1e-12)
    return GridSpec(lo - margin * span, hi + margin * span, size)


def wasserstein_interpolant(groups):
    """Exact W_2 barycenter for two groups; sequential interpolation for more."""
    bary = groups[0]
    for k, g in enumerate(groups[1:], start=2):
        bary = displacement_midpoint(bary, g, t=1.0 / k)
    return bary


def cmd_compare_metrics(args):
    if args.grid < 1:
        raise BadFlagError("--grid must be >= 1")
    groups = fio.read_labeled_csv(args.input)
    if len(groups) < 2:
        raise SingleLabelInputError("compare-metrics needs at least two labels")
    spec = grid_for(groups, args.grid)
    bw = args.bandwidth if args.bandwidth is not None else 1.5 * spec.cell
    if bw <= 0:
        raise BadFlagError("--bandwidth must be > 0")
    dens = [render_points_to_grid(g.points, g.weights, spec, bw) for g in groups]
    interp = wasserstein_interpolant(groups)
    m = interp.n if args.m is None else args.m
    bary = free_support_barycenter(interp, _bary_config(args, m), seed=args.seed)
    grids = {
        "kl_forward": fixed_grid_barycenter(dens, "kl_forward"),
        "mmd_mixture": fixed_grid_barycenter(dens, "mmd_mixture"),
        "wasserstein": render_atoms_to_grid(bary, spec, bw),
    }
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    axis = spec.axis()
    outputs = []
    for name, g in grids.items():
        path = outdir / f"{name}.csv"
        fio.write_grid_csv(path, axis, g)
        outputs.append(str(path))
    for g, d in zip(groups, dens):
        path = outdir / f"input_label_{g.label}.csv"
        fio.write_grid_csv(path, axis, d)
        outputs.append(str(path))
    return outputs, [args.input]


METRIC_KINDS = ("w1", "w2", "sw1", "mmd-linear", "mmd-rbf", "kl-grid")


def cmd_metric(args):
    if args.kind == "kl-grid":
        value = kl_divergence_grid(fio.read_grid_csv(args.source), fio.read_grid_csv(args.target))
    else:
        P, Q = fio.read_points_csv(args.source), fio.read_points_csv(args.target)
        if args.kind in ("w1", "w2"):
            p = 1.0 if args.kind == "w1" else 2.0
            value = max(solve_exact(P, Q, build_cost_matrix(P, Q, p)).objective, 0.0) ** (1.0 / p)
        elif args.kind == "sw1":
            if args.projections < 1:
                raise BadFlagError("--projections must be >= 1")
            value = sliced_wasserstein(P, Q, 1.0, args.projections, args.seed)
        elif args.kind == "mmd-linear":
            value = mmd_squared(P, Q, KernelSpec("linear"))
        else:
            if args.gamma is not None and args.gamma <= 0:
                raise BadFlagError("--gamma must be > 0")
            value = mmd_squared(P, Q, KernelSpec("gaussian_rbf", args.gamma))
    print(fio.fmt(value))
    return [], [args.source, args.target]


def _encoder_from_spec(spec: dict, d: int) -> ToyEncoder:
    if spec.get("kind") == "identity":
        return ToyEncoder.identity(d)
    return ToyEncoder.random(d, int(spec.get("d_f", d)), spec.get("activation", "tanh"),
                             int(spec.get("seed", 0)))


def load_distill_config(path, seed_override=None):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    bary = BarycenterConfig(**raw.get("barycenter", {}))
    seed = int(raw.get("seed", 0)) if seed_override is None else seed_override
    cfg = DistillConfig(lam=float(raw.get("lambda", 0.1)), lr=float(raw.get("lr", 0.05)),
                        steps=int(raw.get("steps", 200)), m_per_class=int(raw.get("m_per_class", 10)),
                        barycenter=bary, seed=seed)
    return cfg, raw.get("encoder", {"kind": "identity"}), raw


def cmd_distill(args):
    groups = fio.read_labeled_csv(args.input)
    cfg, enc_spec, _ = load_distill_config(args.config, args.seed)
    enc = _encoder_from_spec(enc_spec, groups[0].d)
    result = distill_dataset(groups, enc, cfg)
    classes = []
    for c in result.classes:
        classes.append({
            "label": c.label,
            "synthetic": c.synthetic.tolist(),
            "weights": c.weights.tolist(),
            "barycenter_atoms": c.atoms.tolist(),
            "feature_loss": c.feature_loss,
            "bn_loss": c.bn_loss,
            "total_loss": c.total_loss,
            "loss_trace": list(c.loss_trace),
        })
    fio.dump_json(args.out, {"seed": cfg.seed, "lambda": cfg.lam, "classes": classes})
    return [args.out], [args.input, args.config]


def cmd_check_bounds(args):
    if args.trials < 1:
        raise BadFlagError("--trials must be >= 1")
    rows = bound_comparison_sweep(args.seed, args.trials)
    lines = [",".join(BOUND_COLUMNS)]
    for r in rows:
        lines.append(",".join(fio.fmt(r[c]) for c in BOUND_COLUMNS))
        if r["gap"] > min(r["L_bound"], r["rkhs_bound"]) + 1e-9:
            raise OtDistillError("a bound was violated; see the bounds module checks")
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return [args.out], []


COMMANDS = {
    "gen-data": cmd_gen_data,
    "distance": cmd_distance,
    "barycenter": cmd_barycenter,
    "compare-metrics": cmd_compare_metrics,
    "metric": cmd_metric,
    "distill": cmd_distill,
    "check-bounds": cmd_check_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="otdistill", description="Wasserstein dataset distillation at desk scale.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--from-manifest", metavar="PATH", help="replay a run from its manifest")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--manifest", default=None, help="manifest path (default: next to the output)")
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("gen-data", help="generate a labeled point-set CSV")
    p.add_argument("--geometry", default="gaussian")
    p.add_argument("--n", type=int, default=400, help="total number of points")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("distance", help="exact Wasserstein distance between two point sets")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--emit-plan", default=None)
    common(p)

    def bary_flags(p, m_default):
        p.add_argument("--m", type=int, default=m_default)
        p.add_argument("--k", type=int, default=10)
        p.add_argument("--eta", type=float, default=0.05)
        p.add_argument("--init", default="subsample",
                       choices=["subsample", "kmeans_seed", "random_gaussian"])
        p.add_argument("--single-solve", action="store_true")

    p = sub.add_parser("barycenter", help="free-support barycenter per label")
    p.add_argument("--input", required=True)
    p.add_argument("--per-label", action="store_true")
    p.add_argument("--out", required=True)
    bary_flags(p, 10)
    common(p)

    p = sub.add_parser("compare-metrics", help="KL / MMD / Wasserstein barycenter grids")
    p.add_argument("--input", required=True)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--out", required=True)
    bary_flags(p, None)
    common(p)

    p = sub.add_parser("metric", help="print one discrepancy value")
    p.add_argument("--kind", required=True, choices=METRIC_KINDS)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--projections", type=int, default=100)
    common(p)

    p = sub.add_parser("distill", help="distill a labeled point set")
    p.add_argument("--input", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("check-bounds", help="randomized check of the W1 and MMD risk bounds")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out", required=True)
    common(p)
    return parser


def _manifest_path(args) -> str:
    if args.manifest:
        return args.manifest
    out = getattr(args, "out", None)
    if out:
        return str(out).rstrip("/\\") + ".manifest.json"
    return f"otdistill-{args.command}.manifest.json"


def run(args) -> int:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    explicit_seed = args.seed
    if args.command != "distill":
        args.seed = _resolve_seed(args)
    elif args.seed is None and os.environ.get(SEED_ENV) is not None:
        args.seed = _resolve_seed(args)
    start = time.perf_counter()
    outputs, inputs = COMMANDS[args.command](args)
    config = {k: v for k, v in vars(args).items() if k != "from_manifest"}
    manifest = {
        "command": args.command,
        "config": config,
        "seed": args.seed,
        "seed_flag": explicit_seed,
        "version": __version__,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "duration_seconds": time.perf_counter() - start,
    }
    fio.dump_json(_manifest_path(args), manifest)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_BAD_FLAG
    try:
        if args.from_manifest:
            with open(args.from_manifest, encoding="utf-8") as fh:
                manifest = json.load(fh)
            args = argparse.Namespace(**manifest["config"])
        elif args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_BAD_FLAG
        return run(args)
    except BadFlagError as exc:
        print(f"otdistill: error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAG
    except OSError as exc:
        print(f"otdistill: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OtDistillError as exc:
        print(f"otdistill: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
