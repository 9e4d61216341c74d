"""Command-line entry point: ``zeroconc <subcommand> [options]``.

Every subcommand writes its tables under the output directory (``--out``,
else $ZEROCONC_OUT, else ./zeroconc_out) and ends with a one-line JSON
manifest on stdout. Exit status: 0 success, 2 invalid input, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__, experiments, gaussalg, kernels, sampler, spectral, zeros


class UsageError(ValueError):
    pass


def _out_dir(args):
    path = args.out or os.environ.get("ZEROCONC_OUT") or "zeroconc_out"
    os.makedirs(path, exist_ok=True)
    return path


def _model(args):
    return spectral.SpectralModel.from_name(args.model, K=args.K, csv_path=args.csv)


def _model_spec(args):
    spec = {"family": args.model}
    if args.model == "band":
        spec["K"] = args.K
    if args.csv:
        spec["csv"] = args.csv
    return spec


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


# -- subcommands ----------------------------------------------------------

def cmd_kac_rice(args):
    model = _model(args)
    alpha = spectral.kac_rice_alpha(model)
    m2 = spectral.spectral_moment(model, 2)
    print(f"alpha {alpha:.6f}")
    print(f"second_moment {m2:.10g}")
    print(f"minus_r2_at_0 {spectral.curvature_at_zero(model):.10g}")
    return {"alpha": alpha, "second_moment": m2, "kappa": model.kappa}


def cmd_covariance(args):
    model = _model(args)
    t = np.linspace(0.0, args.t_max, args.points)
    cols = {"t": t, "r": spectral.covariance(model, t)}
    if args.kappa_o is not None:
        cols["r_kappa"] = spectral.covariance_kappa(model, t, args.kappa_o)
    if args.y is not None:
        for ell in (1, 2):
            v = spectral.r_ell(model, t, args.y, ell)
            cols[f"r{ell}_re"] = np.real(v)
            cols[f"r{ell}_im"] = np.imag(v)
    path = os.path.join(_out_dir(args), "covariance.csv")
    _write_rows(path, list(cols), zip(*cols.values()))
    return {"files": {"covariance": path}, "columns": list(cols)}


def cmd_assumption_a(args):
    model = _model(args)
    rep = spectral.omega_star(model, args.xstar, args.kappa_prime, args.horizon, args.y_grid,
                              args.threshold)
    print(f"verdict {rep.verdict}")
    path = os.path.join(_out_dir(args), "assumption_a.json")
    with open(path, "w") as fh:
        json.dump(experiments.clean_json(rep.to_dict()), fh, indent=2)
        fh.write("\n")
    return {"verdict": rep.verdict, "files": {"report": path}}


def cmd_omega(args):
    model = _model(args)
    tab = gaussalg.omega_table(model, args.xstar, args.kappa_prime, args.horizon, args.y_grid,
                               args.norm)
    star = spectral.omega_star(model, args.xstar, args.kappa_prime, args.horizon, args.y_grid)
    rows = [(int(k), float(w), float(s)) for k, w, s in
            zip(tab.ks, tab.values, (v for _, v in star.omega_star_table))]
    path = os.path.join(_out_dir(args), "omega.csv")
    _write_rows(path, ["k", "omega", "omega_star"], rows)
    return {"files": {"omega": path}, "last_increment": tab.last_increment,
            "verdict": star.verdict}


def _scheme(args, horizon):
    return sampler.build_synthesis(_model(args), args.n_nodes, design_horizon=horizon)


def cmd_simulate(args):
    scheme = _scheme(args, args.T)
    dt = args.dt or sampler.default_dt(scheme)
    path = sampler.sample_real_path(scheme, args.T, dt, args.seed)
    out = _out_dir(args)
    files = {"path": os.path.join(out, "path.csv")}
    path.to_csv(files["path"])
    if args.strip_y:
        pts = np.concatenate([path.times + 1j * y for y in _floats(args.strip_y)])
        strip = sampler.sample_strip_field(scheme, pts, args.seed)
        files["strip"] = os.path.join(out, "strip.csv")
        strip.to_csv(files["strip"])
    return {"files": files, "dt": path.dt, "sup_error": scheme.sup_error,
            "n_nodes": scheme.size}


def cmd_zeros(args):
    scheme = _scheme(args, args.T)
    dt = args.dt or sampler.default_dt(scheme)
    path = sampler.sample_real_path(scheme, args.T, dt, args.seed)
    rep = zeros.count_zeros_real(path, args.refine_iters)
    out = _out_dir(args)
    files = {"zeros": os.path.join(out, "zeros.csv"), "report": os.path.join(out, "zeros.json")}
    rep.to_csv(files["zeros"])
    rep.to_json(files["report"])
    print(f"count {rep.count}")
    return {"files": files, "count": rep.count, "flags": len(rep.flags)}


def cmd_jensen(args):
    scheme = _scheme(args, max(args.T, 1.0))
    rows = []
    for i in range(args.seeds):
        f = sampler.GaussianField(scheme, sampler.replicate_seed(args.seed, i))
        tr = zeros.jensen_sandwich(f, args.center, args.delta, args.beta)
        cover = zeros.cover_count(f, args.T, args.delta)
        path = sampler.sample_real_path(scheme, args.T, sampler.default_dt(scheme),
                                        sampler.replicate_seed(args.seed, i))
        real = zeros.count_zeros_real(path, 0).count
        rows.append((i, tr.lower, tr.mid, tr.upper, tr.tol, int(tr.holds), real, cover.total))
    path = os.path.join(_out_dir(args), "jensen.csv")
    _write_rows(path, ["seed_index", "lower", "mid", "upper", "tol", "holds", "real_zeros",
                       "cover_count"], rows)
    held = sum(r[5] for r in rows)
    covered = sum(r[6] <= r[7] for r in rows)
    print(f"sandwich {held}/{len(rows)} cover {covered}/{len(rows)}")
    return {"files": {"jensen": path}, "sandwich_holds": held, "cover_holds": int(covered)}


def _density(name):
    if name == "flat":
        return experiments.flat_density
    if name == "raised-cosine":
        return lambda lam: (1.0 + np.cos(lam)) / (2.0 * math.pi)
    data = np.loadtxt(name, delimiter=",", ndmin=2)
    return (data[:, 0], data[:, 1])


def cmd_split(args):
    dens = _density(args.density)
    rows = []
    for m in [int(v) for v in _floats(args.m)]:
        sp = sampler.m_dependent_split(dens, m, args.coeff_horizon, args.paper_taper)
        last = int(np.max(np.flatnonzero(sp.w_cov))) if np.any(sp.w_cov) else 0
        rows.append((m, sp.eps_m, sp.dependence_range, last, sp.identity_residual()))
    path = os.path.join(_out_dir(args), "split.csv")
    _write_rows(path, ["m", "eps_m", "dependence_range", "last_nonzero_lag", "identity_residual"],
                rows)
    return {"files": {"split": path}, "eps_m": [r[1] for r in rows]}


def cmd_moments(args):
    model = _model(args)
    J = [args.k * j for j in range(1, args.m + 1)]
    K, P = gaussalg.lattice_complex_cov(model, args.y, J, args.xstar)
    circ = gaussalg.wick_second_moment(K)
    full = gaussalg.wick_second_moment(K, P)
    fm = gaussalg.frac_moment_mc(model, args.y, args.k, args.m, args.eps, args.reps, args.seed,
                                 args.xstar)
    out = {
        "wick_permanent": circ.value,
        "wick_hafnian": full.value,
        "row_sum_bound": circ.bound,
        "frac_pos": fm.pos, "frac_pos_se": fm.pos_se,
        "frac_neg": fm.neg, "frac_neg_se": fm.neg_se,
        "reference_pos": fm.reference_pos, "reference_neg": fm.reference_neg,
    }
    path = os.path.join(_out_dir(args), "moments.json")
    with open(path, "w") as fh:
        json.dump(experiments.clean_json(out), fh, indent=2)
        fh.write("\n")
    return {"files": {"moments": path}, **out}


def cmd_tail(args):
    out = _out_dir(args)
    if args.density:
        cfg = experiments.SignChangeConfig(args.density, [int(t) for t in _floats(args.T)],
                                           _floats(args.eta), args.reps, args.seed, args.workers)
        res = experiments.run_sign_change_study(cfg)
        files = experiments.persist(res, out, kind="sign_changes")
    else:
        cfg = experiments.TailConfig(_model_spec(args), _floats(args.T), _floats(args.eta),
                                     args.reps, args.dt, args.seed, args.workers, args.n_nodes)
        res = experiments.run_tail_study(cfg)
        files = experiments.persist(res, out, kind="tail")
    fits = [{"eta": f.eta, "slope": f.slope, "r_squared": f.r_squared} for f in res.fits]
    return {"files": files, "fits": fits}


def cmd_mean(args):
    res = experiments.run_mean_study(_model_spec(args), args.T, args.reps, args.seed, args.dt,
                                     args.workers, args.n_nodes)
    config = {"model": _model_spec(args), "T": args.T, "reps": args.reps, "seed": args.seed,
              "dt": args.dt, "n_nodes": args.n_nodes}
    files = experiments.persist(res, _out_dir(args), kind="mean", config=config)
    print(f"mean {res.mean:.6f} se {res.se:.6f} alpha {res.alpha:.6f}")
    return {"files": files, "mean": res.mean, "se": res.se, "alpha": res.alpha}


# -- parser ---------------------------------------------------------------

def _common(p, seed=True):
    p.add_argument("--model", default="gaussian",
                   choices=["band", "gaussian", "bilateral_exponential", "tabulated"])
    p.add_argument("--K", type=float, default=1.0, help="band half-width")
    p.add_argument("--csv", help="two-column density table for --model tabulated")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON file whose keys override the flags")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="zeroconc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kac-rice", help="zero intensity and spectral moments")
    _common(p, seed=False)
    p.set_defaults(func=cmd_kac_rice)

    p = sub.add_parser("covariance", help="covariance tables")
    _common(p, seed=False)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--kappa-o", type=float)
    p.add_argument("--y", type=float)
    p.set_defaults(func=cmd_covariance)

    for name, func in (("assumption-a", cmd_assumption_a), ("omega", cmd_omega)):
        p = sub.add_parser(name, help="summability of lattice correlations")
        _common(p, seed=False)
        p.add_argument("--xstar", type=float, default=1.0)
        p.add_argument("--kappa-prime", type=float, default=0.2)
        p.add_argument("--horizon", type=int, default=50)
        p.add_argument("--y-grid", type=int, default=21)
        if name == "assumption-a":
            p.add_argument("--threshold", type=float, default=0.05)
        else:
            p.add_argument("--norm", choices=["euclid", "l1"], default="euclid")
        p.set_defaults(func=func)

    for name, func in (("simulate", cmd_simulate), ("zeros", cmd_zeros)):
        p = sub.add_parser(name, help="sample a path" if name == "simulate" else "real zeros")
        _common(p)
        p.add_argument("--T", type=float, default=100.0)
        p.add_argument("--dt", type=float)
        p.add_argument("--n-nodes", type=int)
        if name == "simulate":
            p.add_argument("--strip-y", help="comma-separated heights for strip evaluation")
        else:
            p.add_argument("--refine-iters", type=int, default=40)
        p.set_defaults(func=func)

    p = sub.add_parser("jensen", help="Jensen sandwich and cover bound over seeds")
    _common(p)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--center", type=float, default=1.0)
    p.add_argument("--T", type=float, default=20.0)
    p.add_argument("--n-nodes", type=int, default=128)
    p.set_defaults(func=cmd_jensen)

    p = sub.add_parser("split", help="m-dependent split of a discrete density")
    p.add_argument("--density", default="raised-cosine",
                   help="flat, raised-cosine or a CSV path")
    p.add_argument("--m", default="2,4,8,16,32")
    p.add_argument("--coeff-horizon", type=int, default=512)
    p.add_argument("--paper-taper", action="store_true",
                   help="use the (1-|k|/(m-1)) window (correlation up to lag 2m-4)")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("moments", help="Wick and fractional moments on a lattice")
    _common(p)
    p.add_argument("--y", type=float, default=0.1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--xstar", type=float, default=1.0)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("tail", help="concentration tail study")
    _common(p)
    p.add_argument("--T", default="25,50,100,200")
    p.add_argument("--eta", default="0.05")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--dt", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-nodes", type=int)
    p.add_argument("--density", help="run the discrete sign-change study instead "
                   "(flat or CSV path)")
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("mean", help="mean zero density")
    _common(p)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--dt", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-nodes", type=int)
    p.set_defaults(func=cmd_mean)
    return parser


def _apply_config(args):
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("func", "command") or not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        setattr(args, dest, value)
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _apply_config(args)
        info = args.func(args)
    except (spectral.QuadratureError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure inside a study
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    manifest = {"command": args.command, "version": __version__, "backend": kernels.BACKEND,
                **info}
    print(json.dumps(experiments.clean_json(manifest), sort_keys=True, allow_nan=False,
                     default=experiments._json_default))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
