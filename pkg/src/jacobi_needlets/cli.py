"""Command-line driver: ``jacobi-needlets <subcommand> [flags]``.

Exit status is 0 on success, 1 when flags or configuration fail validation
and 2 when a numerical check fails. CSV goes to ``--out PREFIX.csv`` (or
stdout), the JSON summary to ``PREFIX.json`` (or stdout), and one pass/fail
line per check to stderr.
"""
import argparse
import contextlib
import csv
import io
import json
import math
import sys

import numpy as np

CUTOFFS = ("exp-a", "exp-b", "exp-c", "product-a", "product-b", "sin-splice",
           "quasi-norm-b", "small-a", "small-c", "dual-product-b",
           "radial-negative-control")


class ValidationError(Exception):
    """Invalid flags or configuration; exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _float_or_inf(text):
    if str(text).lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="cap on BLAS/OpenMP worker threads")
    common.add_argument("--out", default=None,
                        help="output prefix; writes PREFIX.csv and PREFIX.json")
    common.add_argument("--config", default=None,
                        help="JSON file with flag values (keys use underscores)")

    parser = _Parser(prog="jacobi-needlets", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def geometry(p):
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--beta", type=float, default=0.0)

    p = sub.add_parser("cutoff-export", parents=[common], help="sample a cutoff on a grid")
    p.add_argument("--cutoff", choices=CUTOFFS, default="product-b")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--grid", type=int, default=65, help="points per axis on [0, 2.5]")
    p.add_argument("--gauge-eps", type=float, default=1.0,
                   help="epsilon of the power gauge for small-* cutoffs")

    p = sub.add_parser("kernel-decay", parents=[common], help="empirical localization constants")
    geometry(p)
    p.add_argument("--cutoff", choices=CUTOFFS, default="product-b")
    p.add_argument("--sigma", type=float, default=4.0)
    p.add_argument("--n-list", type=_int_list, default=[8, 16, 32, 64])
    p.add_argument("--per-stratum", type=int, default=64)
    p.add_argument("--gauge-eps", type=float, default=1.0)

    p = sub.add_parser("cubature-report", parents=[common], help="cubature exactness and tiles")
    geometry(p)
    p.add_argument("--jmax", type=int, default=4)
    p.add_argument("--trials", type=int, default=4)

    p = sub.add_parser("frame-roundtrip", parents=[common], help="analysis/synthesis identities")
    geometry(p)
    p.add_argument("--jmax", type=int, default=4)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--tight", dest="tight", action="store_true", default=True)
    mode.add_argument("--dual", dest="tight", action="store_false")
    p.add_argument("--trials", type=int, default=10)

    p = sub.add_parser("norm-equiv", parents=[common], help="kernel versus sequence norms")
    geometry(p)
    p.add_argument("--family", choices=("F", "B"), default="B")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--p", type=_float_or_inf, default=2.0)
    p.add_argument("--q", type=_float_or_inf, default=2.0)
    p.add_argument("--jmax", type=int, default=6,
                   help="frame depth; inputs have per-coordinate degree 2^(jmax-1)")
    p.add_argument("--trials", type=int, default=10)

    p = sub.add_parser("nterm", parents=[common], help="greedy n-term approximation")
    geometry(p)
    p.add_argument("--target", choices=("singular-x1", "random-bandlimited", "needlet"),
                   default="singular-x1")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n-list", type=_int_list, default=[16, 64, 256, 1024])
    p.add_argument("--jmax", type=int, default=9)

    p = sub.add_parser("acceptance", parents=[common], help="run acceptance protocols")
    p.add_argument("--criterion", type=int, action="append", default=None,
                   help="criterion number (repeatable); default all")
    p.set_defaults(seed=None)
    return parser


def _apply_config(parser, argv):
    """Merge ``--config`` JSON values under explicit command-line flags."""
    args = parser.parse_args(argv)
    if args.command is None:
        raise ValidationError("a subcommand is required")
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read config {args.config!r}: {exc}")
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    if cfg.get("subcommand", args.command) != args.command:
        raise ValidationError(
            f"config is for {cfg['subcommand']!r}, not {args.command!r}")
    extra = []
    given = {a.split("=")[0] for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        if key == "subcommand":
            continue
        flag = "--" + key.replace("_", "-")
        if flag in given:
            continue
        if isinstance(value, bool):
            if key == "tight":
                extra.append("--tight" if value else "--dual")
            elif value:
                extra.append(flag)
        elif isinstance(value, list):
            extra += [flag, ",".join(str(v) for v in value)]
        else:
            extra += [flag, str(value)]
    return parser.parse_args(argv + extra)


def _params(args):
    from .tensor import TensorJacobiParams
    if args.d < 1:
        raise ValidationError("--d must be at least 1")
    if min(args.alpha, args.beta) < -0.5:
        raise ValidationError("--alpha and --beta must be >= -1/2")
    return TensorJacobiParams.uniform(args.d, args.alpha, args.beta)


def make_cutoff(name, d, gauge_eps=1.0):
    """Named cutoff of dimension ``d``."""
    from . import cutoff as co

    def small(tag):
        return co.make_small_derivative_univariate(co.DerivativeGauge.power(gauge_eps), tag)

    if name in ("exp-a", "exp-b", "exp-c"):
        if d != 1:
            raise ValidationError(f"{name} is univariate; use --d 1")
        return co.make_univariate(name[-1])
    if name == "product-a":
        return co.make_multivariate("product", d)
    if name == "product-b":
        return co.make_multivariate("difference", d)
    if name == "sin-splice":
        return co.make_multivariate("sin_splice", d)
    if name == "quasi-norm-b":
        return co.make_multivariate("quasi_norm", d, base=co.make_univariate("b"))
    if name == "small-a":
        return co.make_multivariate("product", d, base=small("a"))
    if name == "small-c":
        return co.make_multivariate("sin_splice", d, base=small("a"))
    if name == "dual-product-b":
        return co.make_dual_cutoff(co.make_multivariate("difference", d))
    if name == "radial-negative-control":
        return co.make_radial_impostor(d)
    raise ValidationError(f"unknown cutoff {name!r}")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Report:
    def __init__(self, out):
        self.out = out
        self.checks = []

    def check(self, name, passed, detail):
        self.checks.append((name, bool(passed)))
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}", file=sys.stderr)

    def emit(self, summary, header=None, rows=None):
        text = json.dumps(_jsonable(summary), sort_keys=True)
        if self.out:
            if header is not None:
                with open(self.out + ".csv", "w") as fh:
                    fh.write(_csv_text(header, rows))
            with open(self.out + ".json", "w") as fh:
                fh.write(text + "\n")
        else:
            if header is not None:
                sys.stdout.write(_csv_text(header, rows))
            print(text)

    @property
    def failed(self):
        return [n for n, ok in self.checks if not ok]


def cmd_cutoff_export(args, rep):
    from .cutoff import verify_admissibility

    if not 1 <= args.d <= 3:
        raise ValidationError("cutoff-export supports 1 <= --d <= 3")
    if args.grid < 2:
        raise ValidationError("--grid must be at least 2")
    A = make_cutoff(args.cutoff, args.d, args.gauge_eps)
    axis = np.linspace(0.0, 2.5, args.grid)
    mesh = np.stack(np.meshgrid(*[axis] * args.d, indexing="ij"), axis=-1).reshape(-1, args.d)
    vals = A.at_points(mesh)
    rows = [list(t) + [v] for t, v in zip(mesh, vals)]
    header = [f"t{i + 1}" for i in range(args.d)] + ["value"]
    report = verify_admissibility(A)
    summary = {"cutoff": A.name, "type": A.type_tag, "kind": A.kind,
               "admissible": report.passed, "failures": ",".join(report.failures())}
    for c in report.checks:
        summary[f"check_{c.name}"] = c.worst_value
    rep.emit(summary, header, rows)


def cmd_kernel_decay(args, rep):
    from .kernel import KernelSpec, decay_profile, stratified_pairs

    params = _params(args)
    if not args.n_list or min(args.n_list) < 1:
        raise ValidationError("--n-list needs positive integers")
    A = make_cutoff(args.cutoff, args.d, args.gauge_eps)
    rows, C = [], []
    for n in args.n_list:
        sample = stratified_pairs(args.d, n, np.random.default_rng(args.seed), args.per_stratum)
        prof = decay_profile(KernelSpec(params, A, n), args.sigma, sample)
        C.append(prof.C_emp)
        rows.append([n, prof.C_emp, prof.C_emp / C[0], prof.rho_at_max, prof.excluded])
    q = np.array(C) / C[0]
    growth = float(C[-1] / C[0])
    stable = bool(np.all((q >= 0.25) & (q <= 4.0)))
    negative = args.cutoff == "radial-negative-control"
    summary = {"cutoff": A.name, "sigma": args.sigma, "growth": growth, "stable": stable,
               "negative_control": negative}
    if negative:
        summary["growth_flagged"] = growth >= 2.0
        print(f"NOTE negative control: C({args.n_list[-1]})/C({args.n_list[0]}) = {growth:.3g}"
              f"{' (growth flagged)' if growth >= 2.0 else ''}", file=sys.stderr)
    else:
        rep.check("localization_stability", stable,
                  "C(n)/C(n0) = " + ", ".join(f"{v:.3g}" for v in q))
    rep.emit(summary, ["n", "C_emp", "ratio_to_first", "rho_at_max", "excluded"], rows)


def cmd_cubature_report(args, rep):
    from .cubature import build_level
    from .tensor import JacobiExpansion

    params = _params(args)
    if args.jmax < 0:
        raise ValidationError("--jmax must be nonnegative")
    rng = np.random.default_rng(args.seed)
    mass = params.total_mass()
    rows = []
    worst = 0.0
    for j in range(args.jmax + 1):
        cub = build_level(j, params)
        err = 0.0
        for _ in range(args.trials):
            g = JacobiExpansion.random(params, 2 ** (j + 2) - 1, rng)
            exact = g.coeffs[(0,) * params.d] * math.sqrt(mass)
            got = cub.integrate(g.evaluate_grid(cub.axis_nodes))
            err = max(err, abs(got - exact) / (g.l2_norm() * math.sqrt(mass)))
        worst = max(worst, err)
        tiles = cub.tile_measures
        ratio = tiles / cub.weights
        rows.append([j, cub.node_count, err, abs(tiles.sum() - mass) / mass,
                     float(ratio.min()), float(ratio.max())])
    rep.check("quadrature_exactness", worst <= 1e-11, f"max relative error {worst:.3g}")
    rep.emit({"max_rel_error": worst, "levels": args.jmax + 1},
             ["j", "nodes", "exactness_rel_error", "tile_mass_rel_error",
              "tile_weight_ratio_min", "tile_weight_ratio_max"], rows)


def cmd_frame_roundtrip(args, rep):
    from .frame import analyze, build_frame, frame_bound_ratio, synthesize
    from .tensor import JacobiExpansion

    params = _params(args)
    if args.jmax < 0 or args.trials < 1:
        raise ValidationError("--jmax must be >= 0 and --trials >= 1")
    frame = build_frame(params, "tight" if args.tight else "dual", args.jmax)
    rng = np.random.default_rng(args.seed)
    degree = 2 ** (args.jmax - 1) if args.jmax > 0 else 0
    rt = pars = 0.0
    for _ in range(args.trials):
        f = JacobiExpansion.random(params, degree, rng)
        c = analyze(frame, f)
        nf = f.l2_norm()
        rt = max(rt, (synthesize(frame, c) - f).l2_norm() / nf)
        pars = max(pars, abs(c.energy() - nf ** 2) / nf ** 2)
    bound = frame_bound_ratio(frame, rng, trials=args.trials)[0]
    rep.check("roundtrip", rt <= 1e-9, f"max relative error {rt:.3g}")
    if frame.tight:
        rep.check("parseval", pars <= 1e-9, f"max relative error {pars:.3g}")
    rep.emit({"max_roundtrip_rel_error": rt, "parseval_rel_error": pars,
              "frame_bound_ratio": bound, "tight": frame.tight})


def cmd_norm_equiv(args, rep):
    from .cubature import spectrum_level
    from .frame import analyze, build_frame
    from .spaces import InvalidSpaceParams, SpaceParams, b_norm_kernel, f_norm_kernel, seq_norm
    from .tensor import JacobiExpansion

    try:
        sp = SpaceParams(args.s, args.rho, args.p, args.q, args.family)
    except InvalidSpaceParams as exc:
        raise ValidationError(str(exc))
    params = _params(args)
    if args.jmax < 2 or args.trials < 1:
        raise ValidationError("--jmax must be >= 2 and --trials >= 1")
    A = make_cutoff("product-b", args.d)
    kern = f_norm_kernel if sp.family == "F" else b_norm_kernel
    rng = np.random.default_rng(args.seed)
    rows, bands = [], []
    top = 2 ** (args.jmax - 1)
    for degree in (top // 2, top):
        frame = build_frame(params, A, spectrum_level(degree) + 1)
        ratios = []
        for k in range(args.trials):
            f = JacobiExpansion.random(params, degree, rng, decay=rng.uniform(0.0, 3.0))
            kn = kern(f, sp, A)
            sn = seq_norm(analyze(frame, f), sp)
            ratios.append(kn / sn)
            rows.append([k, degree, kn, sn, kn / sn])
        bands.append(max(max(ratios), 1.0 / min(ratios)))
    stable = bands[1] <= 1.5 * bands[0]
    all_r = [r[-1] for r in rows]
    rep.check("equivalence_band_stable", stable,
              f"band {bands[0]:.4g} at degree {top // 2} -> {bands[1]:.4g} at {top}")
    rep.emit({"ratio_min": min(all_r), "ratio_max": max(all_r), "stable": stable},
             ["trial", "degree", "kernel_norm", "seq_norm", "ratio"], rows)


def cmd_nterm(args, rep):
    from .approx import ApproxRun, abs_power_target, bs_tau_norm, greedy_nterm
    from .frame import NeedletCoefficients, build_frame, synthesize
    from .tensor import JacobiExpansion

    params = _params(args)
    if args.jmax < 1 or not args.n_list or min(args.n_list) < 1:
        raise ValidationError("--jmax must be >= 1 and --n-list positive")
    if args.s <= 0 or args.p <= 0 or args.p == math.inf:
        raise ValidationError("need s > 0 and finite p > 0")
    frame = build_frame(params, "tight", args.jmax)
    rng = np.random.default_rng(args.seed)
    degree = 2 ** (args.jmax - 1)
    if args.target == "singular-x1":
        f = abs_power_target(params, degree)
    elif args.target == "random-bandlimited":
        f = JacobiExpansion.random(params, degree, rng, decay=1.0)
    else:
        j = args.jmax - 1
        xi = int(rng.integers(frame.level(j).size))
        f = synthesize(frame, NeedletCoefficients.single(frame, j, xi))
    run = ApproxRun(frame, f, args.p, tuple(args.n_list))
    bnorm = bs_tau_norm(f, args.s, args.p, frame)
    rows, errs = [], []
    for n in sorted(args.n_list):
        _, err = greedy_nterm(run, n)
        errs.append(err)
        rows.append([n, err, err * n ** (args.s / params.d) / bnorm])
    col = np.array([r[2] for r in rows])
    mono = all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(errs, errs[1:]))
    bounded = bool(col.max() <= 10 * max(np.median(col), 1e-300)) if col.any() else True
    rep.check("errors_nonincreasing", mono, ", ".join(f"{e:.3g}" for e in errs))
    rep.check("normalized_bounded", bounded, ", ".join(f"{v:.3g}" for v in col))
    rep.emit({"target": args.target, "bs_tau_norm": bnorm, "nnz": run.nnz,
              "monotone": mono, "bounded": bounded}, ["n", "error", "normalized"], rows)


def cmd_acceptance(args, rep):
    from .checks import CRITERIA, run_criterion

    numbers = args.criterion or sorted(CRITERIA)
    for n in numbers:
        if n not in CRITERIA:
            raise ValidationError(f"no criterion {n}; choose from 1..{len(CRITERIA)}")
    rows = []
    for n in numbers:
        res = run_criterion(n, seed=args.seed)
        print(res.line())
        rep.checks.append((f"criterion {n}", res.passed))
        rows.append([n, res.title, "PASS" if res.passed else "FAIL", res.seconds, res.summary])
    if args.out:
        rep.emit({f"criterion_{r[0]}": r[2] for r in rows},
                 ["criterion", "title", "verdict", "seconds", "summary"], rows)


COMMANDS = {
    "cutoff-export": cmd_cutoff_export,
    "kernel-decay": cmd_kernel_decay,
    "cubature-report": cmd_cubature_report,
    "frame-roundtrip": cmd_frame_roundtrip,
    "norm-equiv": cmd_norm_equiv,
    "nterm": cmd_nterm,
    "acceptance": cmd_acceptance,
}


def _thread_limit(n):
    if n is None:
        return contextlib.nullcontext()
    if n < 1:
        raise ValidationError("--threads must be positive")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        rep = Report(args.out)
        with _thread_limit(args.threads):
            COMMANDS[args.command](args, rep)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if rep.failed:
        print("numerical check failed: " + ", ".join(rep.failed), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
