"""Command-line entry point: ``cuspcorr <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

from . import arith, cache, correlation, dirichlet, experiments, expsum, forms, petersson
from .errors import CuspcorrError, IntegrityError, ParameterError, UsageError
from .report import ExperimentConfig, ExperimentReport, coerce_value, fingerprint, load_config, new_run_dir, write_csv


def _emit_csv(header, rows, path=None):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    finally:
        if path:
            fh.close()


def _emit_json(obj):
    print(json.dumps(obj, sort_keys=True, indent=2, allow_nan=False))


# --------------------------------------------------------------------------
# subcommands


def cmd_forms(args, conf):
    k = _pick(args.weight, conf, "weight", 12)
    N = _pick(args.N, conf, "N", 100)
    f = forms.build_form(k, N)
    if args.check:
        res, pairs = forms.hecke_residual(f, min(N, 10**4))
        bad = forms.deligne_violations(f)
        _emit_json({"weight": k, "N": N, "hecke_residual": res, "pairs": pairs, "deligne_violations": len(bad)})
        return 0 if res == 0 and not bad else 1
    _emit_csv(("n", "a", "lambda"), ((n, f.a[n - 1], float(f.lam[n])) for n in range(1, N + 1)), args.csv)
    return 0


def cmd_arith(args, conf):
    k = _pick(args.weight, conf, "weight", 12)
    lo, hi = args.lo, args.hi
    if args.fn == "vonmangoldt":
        t = arith.sieve_vonmangoldt(lo, hi)
    elif args.fn == "divisor":
        t = arith.sieve_divisor(args.m, lo, hi)
    else:
        f = forms.build_form(k, hi)
        t = arith.lambda_f_table(f, lo, hi) if args.fn == "lambdaf" else arith.mu_f_table(f, lo, hi)
    _emit_csv(("n", "value"), t.to_csv_rows(), args.csv)
    return 0


def cmd_expsum(args, conf):
    k = _pick(args.weight, conf, "weight", 12)
    X = _pick(args.X, conf, "X", 1000)
    f = forms.build_form(k, 2 * X)
    coeffs = arith.hecke_lambda_vm(f, X + 1, 2 * X)
    rows = []
    for a in args.alpha:
        s = expsum.exp_sum(coeffs, a)
        rows.append((a, s.real, s.imag, abs(s)))
    _emit_csv(("alpha", "re", "im", "abs"), rows, args.csv)
    return 0


def cmd_arcs(args, conf):
    X = _pick(args.X, conf, "X", 10**4)
    H = _pick(args.H, conf, "H", math.ceil(X**0.75))
    variant = expsum.VARIANTS.get(args.variant, args.variant)
    arcs = expsum.build_arcs(X, H, args.A, args.eps, variant, c0=args.c0)
    out = {"X": X, "H": H, "A": args.A, "eps": args.eps, "variant": variant, "Q": arcs.Q, "R": arcs.R,
           "count": arcs.count, "measure_major": arcs.measure_major(), "measure_minor": arcs.measure_minor(),
           "intervals": len(arcs.union)}
    if args.classify is not None:
        label, w = expsum.classify_alpha(arcs, args.classify)
        out["classify"] = {"alpha": args.classify, "label": label, "a": w.a, "q": w.q, "err": w.err}
    _emit_json(out)
    return 0


def cmd_corr(args, conf):
    k = _pick(args.weight, conf, "weight", 12)
    X = _pick(args.X, conf, "X", 1024)
    H = _pick(args.H, conf, "H", 64)
    f = forms.build_form(k, 2 * X)
    coeffs = arith.hecke_lambda_vm(f, X + 1, 2 * X)
    results = {}
    if args.method in ("direct", "both"):
        results["direct"] = correlation.autocorr_direct(coeffs, H)
    if args.method in ("fft", "both"):
        results["fft"] = correlation.autocorr_fft(coeffs, H)
    main = results.get("fft") or results["direct"]
    if args.out:
        _emit_csv(("h", "c_h", "abs2"), ((h, float(main.c[h]), float(main.c[h] ** 2)) for h in range(1, H + 1)),
                  args.out)
    summary = {"X": X, "H": H, "weight": k, "vf": main.vf, "vf_smoothed": correlation.vf_smoothed(coeffs, H),
               "method": args.method}
    if len(results) == 2:
        d, g = results["direct"], results["fft"]
        summary["max_abs_delta"] = float(abs(d.c - g.c).max())
        summary["vf_delta"] = abs(d.vf - g.vf)
    _emit_json(summary)
    return 0


def cmd_petersson(args, conf):
    v = petersson.petersson_delta(args.k, args.m, args.n, args.cmax)
    out = {"k": v.k, "m": v.m, "n": v.n, "value": v.value, "cmax": v.truncation_c, "tail_bound": v.tail_bound,
           "imag_residue": v.imag_residue}
    if args.k in forms.SUPPORTED_WEIGHTS:
        f = forms.build_form(args.k, max(args.m, args.n))
        w = petersson.harmonic_weight(args.k)
        out["omega"] = w
        out["rank1_delta"] = abs(v.value - w * f.lambda_at(args.m) * f.lambda_at(args.n))
    _emit_json(out)
    return 0


def cmd_avgvf(args, conf):
    X = _pick(args.X, conf, "X", 1000)
    H = _pick(args.H, conf, "H", 32)
    sample = None
    need = 2 * X + H
    if args.sample:
        x, y, a = args.sample.split(",")
        sample = (int(x), int(y), float(a))
        need = max(need, sample[0] + sample[1])
    f = forms.build_form(args.k, need)
    r = petersson.averaged_vf(f, X, H, args.cmax, sample=sample)
    _emit_json({"k": r.k, "X": r.X, "H": r.H, "omega": r.omega, "weighted_vf": r.weighted_vf,
                "normalized": r.normalized, "sample": None if sample is None else
                {"x": r.x, "y": r.y, "alpha": r.alpha, "direct": r.direct, "expanded": r.expanded,
                 "diagonal": r.diagonal, "relative_gap": r.relative_gap, "cmax": r.cmax,
                 "tail_bound": r.tail_bound}})
    return 0


def cmd_moments(args, conf):
    k = _pick(args.weight, conf, "weight", 12)
    f = forms.build_form(k, 2 * args.M)
    r = dirichlet.moment4(f, args.q, args.T, args.M, c=args.c)
    _emit_csv(("q", "T", "M", "value", "ratio"), [(r.q, float(r.T), r.M, r.value, r.ratio)], args.csv)
    return 0


def cmd_twisted(args, conf):
    k = _pick(args.weight, conf, "weight", 12)
    X = _pick(args.X, conf, "X", 1000)
    H = _pick(args.H, conf, "H", 50)
    f = forms.build_form(k, 2 * X + H)
    r = dirichlet.twisted_window_energy(f, args.q, X, H, args.B)
    _emit_json({"q": r.q, "X": r.X, "H": r.H, "B": r.B, "value": r.value, "normalized": r.normalized})
    return 0


def cmd_cache(args, conf):
    path = Path(args.path)
    if args.action == "build":
        k = _pick(args.weight, conf, "weight", 12)
        N = _pick(args.N, conf, "N", 10**5)
        cache.write_cache(forms.build_form(k, N), path)
        _emit_json({"path": str(path), "weight": k, "ncoeffs": N, "bytes": path.stat().st_size})
        return 0
    if args.action == "info":
        h = cache.read_header(path)
        _emit_json({"path": str(path), "version": h.version, "weight": h.weight, "ncoeffs": h.ncoeffs})
        return 0
    res = cache.verify_cache(path, args.fraction, args.seed if args.seed is not None else 0)
    _emit_json(res)
    return 0 if res["passed"] else 1


def run_experiment(cfg: ExperimentConfig, out_root, threads: int = 1) -> tuple[ExperimentReport, Path]:
    fn = experiments.get(cfg.experiment)
    t0 = time.perf_counter()
    records, tables, used = fn(cfg, experiments.Context(threads))
    elapsed = time.perf_counter() - t0
    rep = ExperimentReport(cfg.as_dict(), records,
                           {f"weight{f.weight}_N{f.ncoeffs}": fingerprint(f) for f in used})
    run_dir = new_run_dir(out_root, cfg.experiment)
    (run_dir / "report.json").write_text(rep.to_json())
    for name, (header, rows) in tables.items():
        write_csv(run_dir / f"{name}.csv", header, rows)
    # timing and thread count live beside the report so report.json stays reproducible
    (run_dir / "timing.json").write_text(json.dumps({"seconds": elapsed, "threads": threads}, sort_keys=True) + "\n")
    return rep, run_dir


def cmd_run(args, conf):
    mapping = dict(conf)
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        mapping[key.strip()] = coerce_value(value)
    for key in ("experiment", "weight", "N", "X", "H", "theta", "A", "eps", "variant"):
        v = getattr(args, key)
        if v is not None:
            mapping[key] = v
    if args.seed is not None:
        mapping["seed"] = args.seed
    cfg = ExperimentConfig.from_mapping(mapping)
    rep, run_dir = run_experiment(cfg, args.out, args.threads)
    s = rep.summary
    print(f"{run_dir}  pass={s['pass']} fail={s['fail']} soft={s['soft']} "
          f"(violations {s['soft_violations']}) info={s['info']}")
    for name in rep.failures():
        print(f"FAILED: {name}", file=sys.stderr)
    return 0 if rep.passed else 1


def _pick(flag, conf, key, default):
    if flag is not None:
        return flag
    return conf.get(key, default)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuspcorr", description="Correlations of Hecke eigenvalues weighted by primes.")
    p.add_argument("--config", help="flat key = value file; command-line flags win")
    p.add_argument("--out", default="runs", help="root directory for run reports")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("forms", help="eigenform coefficients")
    s.add_argument("--weight", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--check", action="store_true", help="run the Hecke and Deligne checks instead")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_forms)

    s = sub.add_parser("arith", help="arithmetic-function tables")
    s.add_argument("--fn", choices=("vonmangoldt", "lambdaf", "muf", "divisor"), required=True)
    s.add_argument("--lo", type=int, default=1)
    s.add_argument("--hi", type=int, required=True)
    s.add_argument("--weight", type=int)
    s.add_argument("--m", type=int, default=2, help="order of the divisor function")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_arith)

    s = sub.add_parser("expsum", help="S(alpha) over (X, 2X]")
    s.add_argument("--alpha", type=float, nargs="+", required=True)
    s.add_argument("--X", type=int)
    s.add_argument("--weight", type=int)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_expsum)

    s = sub.add_parser("arcs", help="major/minor arc dissection")
    s.add_argument("--X", type=int)
    s.add_argument("--H", type=int)
    s.add_argument("--A", type=float, default=1.0)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--variant", choices=sorted(expsum.VARIANTS), default="t1")
    s.add_argument("--c0", type=float, default=1.0)
    s.add_argument("--classify", type=float)
    s.set_defaults(func=cmd_arcs)

    s = sub.add_parser("corr", help="correlation sum V_f(X; H)")
    s.add_argument("--X", type=int)
    s.add_argument("--H", type=int)
    s.add_argument("--weight", type=int)
    s.add_argument("--method", choices=("direct", "fft", "both"), default="fft")
    s.add_argument("--out", dest="out", help="CSV of h, c_h, abs2")
    s.set_defaults(func=cmd_corr)

    s = sub.add_parser("petersson", help="Petersson formula Delta_k(m, n)")
    s.add_argument("--k", type=int, default=12)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--cmax", type=int)
    s.set_defaults(func=cmd_petersson)

    s = sub.add_parser("avgvf", help="harmonic-weighted correlation sum")
    s.add_argument("--k", type=int, default=12)
    s.add_argument("--X", type=int)
    s.add_argument("--H", type=int)
    s.add_argument("--cmax", type=int)
    s.add_argument("--sample", help="x,y,alpha for the two-route expansion check")
    s.set_defaults(func=cmd_avgvf)

    s = sub.add_parser("moments", help="fourth moment of twisted Dirichlet polynomials")
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--T", type=float, default=100.0)
    s.add_argument("--M", type=int, default=64)
    s.add_argument("--weight", type=int)
    s.add_argument("--c", type=float, default=3.0)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("twisted-energy", help="character-twisted short-interval energy")
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--X", type=int)
    s.add_argument("--H", type=int)
    s.add_argument("--weight", type=int)
    s.add_argument("--B", type=float, default=0.0)
    s.set_defaults(func=cmd_twisted)

    s = sub.add_parser("run", help="run a named experiment into a new run directory")
    s.add_argument("--experiment", choices=sorted(experiments.EXPERIMENTS))
    s.add_argument("--weight", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--X", type=int)
    s.add_argument("--H", type=int)
    s.add_argument("--theta", type=float)
    s.add_argument("--A", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--variant")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="extra experiment parameter")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("cache", help="binary coefficient cache")
    s.add_argument("action", choices=("build", "verify", "info"))
    s.add_argument("--path", required=True)
    s.add_argument("--weight", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--fraction", type=float, default=0.01)
    s.set_defaults(func=cmd_cache)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        conf = load_config(args.config) if args.config else {}
        return args.func(args, conf)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 3
    except (CuspcorrError, ParameterError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
