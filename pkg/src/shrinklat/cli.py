"""Command-line front end: declarative configs, deterministic seeds, CSV/JSON
artifacts.

Config files are flat `key = value` text (keys match the long option names);
command-line flags override config values. Identical (config, seed) pairs
reproduce artifacts byte-for-byte.

Exit codes: 0 ok, 2 invalid config, 3 domain/dimension errors, 4 numeric
failures, 5 enumeration budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import errors
from .curves import builtin_curves, builtin_graphs, jet_at, parse_curve
from .dirichlet import (DirichletQuery, density_scan, min_lambda,
                        solvable_direct, solvable_lattice)
from .identity import (correction_polynomial, decay_fit, identity_residual,
                       limit_element, solve_correction)
from .lattices import (Box, UnimodularLattice, count_in_box, haar_oracle,
                       shrinking_ball_average, trajectory_average)
from .linalg import identity as identity_matrix
from .scalars import auto_precision, rat
from .suites import SUITES, run_suite
from .twisting import degeneracy_locus_probe

SCHEMA = {
    "identity": "identity-residuals/1",
    "twist": "twist-sweep/1",
    "equidist": "equidist-samples/1",
    "traj": "trajectory/1",
    "dirichlet": "dirichlet-scan/1",
    "check": "suite-report/1",
}

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4
EXIT_BUDGET = 5

PREC_ENV = "SHRINKLAT_PREC"


def _env_prec():
    val = os.environ.get(PREC_ENV)
    if val is None:
        return None
    try:
        return int(val)
    except ValueError:
        raise errors.ConfigInvalid(f"{PREC_ENV} must be an integer, got {val!r}")


def _check_n(n, actual, what):
    if n is not None and int(n) != actual:
        raise errors.ConfigInvalid(f"--n {n} does not match {what} ({actual})")


def _load_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise errors.ConfigInvalid(f"{path}:{lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = val
    if "lambda" in out:  # the flag is --lambda but the dest is lam
        out["lam"] = out.pop("lambda")
    return out


def _resolve(args, config: dict, key: str, default=None, cast=None):
    val = getattr(args, key, None)
    if val is None:
        val = config.get(key)
    if val is None:
        return default
    if cast is not None and isinstance(val, str):
        return cast(val)
    return val


def _get_curve(name, curve_file):
    if curve_file:
        return parse_curve(Path(curve_file).read_text())
    cat = builtin_curves()
    if name not in cat:
        raise errors.ConfigInvalid(
            f"unknown curve {name!r}; builtins: {sorted(cat)}")
    return cat[name]


def _parse_box(text: str, dim: int) -> Box:
    if ":" not in text:
        return Box.cube(rat(text), dim)
    ivs = []
    for part in text.split(","):
        a, b = part.split(":")
        ivs.append((rat(a), rat(b)))
    return Box(tuple(ivs))


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def cmd_identity(args, config) -> int:
    curve = _get_curve(_resolve(args, config, "curve", "moment"),
                       _resolve(args, config, "curve_file"))
    _check_n(_resolve(args, config, "n"), curve.n, "the curve dimension")
    s = rat(_resolve(args, config, "s", "0"))
    ts = [rat(tok) for tok in _resolve(args, config, "t", "10,100,1000").split(",")]
    backend = _resolve(args, config, "backend",
                       "rational" if curve.top_polys is not None else "float")
    sign = _resolve(args, config, "sign", "both")
    if sign not in ("both", "pos", "neg"):
        raise errors.ConfigInvalid(f"sign must be both/pos/neg, got {sign!r}")
    if backend == "rational" and curve.top_polys is None:
        raise errors.ConfigInvalid(
            f"curve {curve.name!r} has no polynomial data; use the float backend")
    prec = _resolve(args, config, "prec", cast=int)
    if prec is None:
        prec = _env_prec()
    if backend == "float" and prec is None:
        prec = auto_precision(curve.n, max(float(t) for t in ts))
    out = Path(_resolve(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)

    jet = jet_at(curve, s, backend="rational" if backend == "rational" else "float",
                 prec=prec or 256)
    corr = solve_correction(jet)
    xi = limit_element(jet, corr)
    signed_ts = []
    for t in ts:
        if sign in ("both", "pos"):
            signed_ts.append(t)
        if sign in ("both", "neg"):
            signed_ts.append(-t)
    rows = []
    pos_pairs = []
    for t in signed_ts:
        rep = identity_residual(curve, s, corr, xi, t,
                                prec=None if backend == "rational" else prec)
        rows.append([SCHEMA["identity"], str(rep.t), str(rep.sup_norm),
                     rep.sigma, backend, prec or ""])
        if rep.sigma > 0:
            pos_pairs.append((rep.t, rep.sup_norm))
    _write_csv(out / "identity_residuals.csv",
               ["schema", "t", "sup_norm", "sign", "backend", "precision_bits"],
               rows)
    summary = {"curve": curve.name, "s": str(s), "backend": backend,
               "precision_bits": prec}
    pos_pairs.sort(key=lambda p: p[0])
    if len(pos_pairs) >= 4 and all(v > 0 for _, v in pos_pairs):
        fit = decay_fit(pos_pairs)
        summary["decay_slope"] = fit.slope
    (out / "identity_summary.json").write_text(
        json.dumps(summary, sort_keys=True) + "\n")
    norms = ",".join(str(r[2]) for r in rows)
    print(f"identity: curve={curve.name} s={s} sup_norms={norms}")
    return 0


def cmd_twist(args, config) -> int:
    graphs = builtin_graphs()
    gid = _resolve(args, config, "graph", "graph-quad-22")
    if gid not in graphs:
        raise errors.ConfigInvalid(
            f"unknown graph {gid!r}; builtins: {sorted(graphs)}")
    graph = graphs[gid]
    samples = _resolve(args, config, "samples", 50, int)
    seed = _resolve(args, config, "seed", 0, int)
    rational = bool(_resolve(args, config, "rational", False,
                             lambda v: v.lower() in ("1", "true", "yes")))
    out = Path(_resolve(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)

    probe = degeneracy_locus_probe(graph, samples, seed, rational=rational)
    rows = [[SCHEMA["twist"], seed, idx, str(det_mg), int(in_zs)]
            for idx, det_mg, in_zs in probe.records]
    _write_csv(out / "twist_sweep.csv",
               ["schema", "seed", "sample_index", "det_Mg", "in_Zs"],
               rows)
    print(f"twist: graph={gid} samples={samples} "
          f"degenerate_fraction={probe.degenerate_fraction}")
    return 0


def cmd_equidist(args, config) -> int:
    curve = _get_curve(_resolve(args, config, "curve", "moment"),
                       _resolve(args, config, "curve_file"))
    s = rat(_resolve(args, config, "s", "0"))
    t = rat(_resolve(args, config, "t", "100"))
    samples = _resolve(args, config, "samples", 1000, int)
    seed = _resolve(args, config, "seed", 0, int)
    box = _parse_box(_resolve(args, config, "box", "1"), curve.n + 1)
    ball = _resolve(args, config, "ball", "1")
    body = tuple((-rat(ball), rat(ball)) for _ in range(curve.d))
    out = Path(_resolve(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)

    rep = shrinking_ball_average(curve, (s,) * curve.d, t, body, samples,
                                 box, seed, keep_records=True)
    rows = [[SCHEMA["equidist"], idx,
             ";".join(repr(x) for x in eta), val]
            for idx, eta, val in rep.records]
    _write_csv(out / "equidist_samples.csv",
               ["schema", "sample_index", "eta_coords", "observable_value"],
               rows)
    (out / "equidist_summary.json").write_text(rep.to_json() + "\n")
    print(f"equidist: mean={rep.mean:.6f} oracle={rep.oracle} "
          f"deviation={rep.deviation_sigmas:+.2f} sigma")
    return 0


def cmd_traj(args, config) -> int:
    curve = _get_curve(_resolve(args, config, "curve", "moment"),
                       _resolve(args, config, "curve_file"))
    s = rat(_resolve(args, config, "s", "0"))
    T = rat(_resolve(args, config, "T", "100"))
    grid = _resolve(args, config, "grid", 1000, int)
    box = _parse_box(_resolve(args, config, "box", "1"), curve.n + 1)
    xspec = _resolve(args, config, "x", "identity")
    out = Path(_resolve(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)

    jet = jet_at(curve, s)
    corr = solve_correction(jet)
    if xspec == "identity":
        basis = identity_matrix(curve.n + 1)
    elif xspec.startswith("u:"):
        from .curves import unipotent
        basis = unipotent(tuple(rat(tok) for tok in xspec[2:].split(",")))
    else:
        raise errors.ConfigInvalid(f"unknown base point spec {xspec!r}")
    x = UnimodularLattice(basis)
    rep = trajectory_average(
        lambda t: correction_polynomial(corr, t), x, T,
        lambda L: count_in_box(L, box), grid,
        oracle=haar_oracle(box), name="correction-trajectory")
    (out / "traj_summary.json").write_text(rep.to_json() + "\n")
    print(f"traj: T={float(T)} mean={rep.mean:.6f} oracle={rep.oracle}")
    return 0


def cmd_dirichlet(args, config) -> int:
    mode = _resolve(args, config, "mode", "B")
    z = tuple(rat(tok) for tok in _resolve(args, config, "z", "1/2").split(","))
    _check_n(_resolve(args, config, "n"), len(z), "the length of z")
    lam = rat(_resolve(args, config, "lam", "1"))
    out = Path(_resolve(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    N_range = _resolve(args, config, "N_range")
    if N_range:
        lo, hi = (int(p) for p in N_range.split(":"))
        rep = density_scan(z, range(lo, hi + 1), lam, mode)
        (out / "dirichlet_density.json").write_text(json.dumps({
            "z": [str(x) for x in z], "mode": mode, "lambda": str(lam),
            "N_lo": rep.N_lo, "N_hi": rep.N_hi, "solvable": rep.solvable,
            "total": rep.total, "density": rep.density,
            "unsolvable_witnesses": list(rep.unsolvable_witnesses),
        }, sort_keys=True) + "\n")
        print(f"dirichlet: density={rep.density:.4f} "
              f"unsolvable={len(rep.unsolvable_witnesses)}")
        return 0
    N = _resolve(args, config, "N", 10, int)
    query = DirichletQuery(z=z, N=N, lam=lam, mode=mode)
    flag, witness = solvable_direct(query)
    agree = solvable_lattice(query)
    if flag != agree:
        raise errors.ConfigInvalid(
            "direct and lattice criteria disagree (internal error)")
    ml = min_lambda(z, N, mode)
    rows = [[SCHEMA["dirichlet"], N, int(flag), str(ml.value),
             str(witness[0]) if witness else "",
             str(witness[1]) if witness else ""]]
    _write_csv(out / "dirichlet_scan.csv",
               ["schema", "N", "solvable", "min_lambda", "witness_q",
                "witness_p"], rows)
    word = "solvable" if flag else "unsolvable"
    extra = f", witness q={witness[0]} p={witness[1]}" if witness else ""
    print(f"dirichlet: mode {mode}, N={N}, lambda={lam}: {word}{extra}; "
          f"min_lambda={ml.value}")
    return 0


def cmd_check(args, config) -> int:
    suite = _resolve(args, config, "suite")
    if suite is None:
        raise errors.ConfigInvalid(
            f"suite is required; options: {sorted(SUITES)}")
    cases = _resolve(args, config, "cases", 100, int)
    seed = _resolve(args, config, "seed", 0, int)
    out = Path(_resolve(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    rep = run_suite(suite, cases, seed)
    (out / f"check_{suite}.json").write_text(json.dumps({
        "schema": SCHEMA["check"], "suite": rep.suite, "cases": rep.cases,
        "seed": rep.seed, "ok": rep.ok,
        "failures": [[str(k), msg] for k, msg in rep.failures],
    }, sort_keys=True) + "\n")
    word = "PASS" if rep.ok else "FAIL"
    print(f"check: suite={suite} cases={rep.cases} seed={seed} {word} "
          f"({len(rep.failures)} failures)")
    return 0 if rep.ok else 1


COMMANDS = {
    "check": cmd_check,
    "identity": cmd_identity,
    "twist": cmd_twist,
    "equidist": cmd_equidist,
    "traj": cmd_traj,
    "dirichlet": cmd_dirichlet,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shrinklat",
                                description=__doc__.split("\n", 1)[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--out", help="output directory (default .)")

    sp = sub.add_parser("identity", help="residual sweep of the curve identity")
    common(sp)
    sp.add_argument("--curve")
    sp.add_argument("--curve-file", dest="curve_file")
    sp.add_argument("--n", help="expected ambient dimension (consistency check)")
    sp.add_argument("--s")
    sp.add_argument("--t", help="comma-separated t values")
    sp.add_argument("--backend", choices=["rational", "float"])
    sp.add_argument("--prec", type=int)
    sp.add_argument("--sign", choices=["both", "pos", "neg"])

    sp = sub.add_parser("twist", help="rotation sweep on a graph form")
    common(sp)
    sp.add_argument("--graph")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--rational", action="store_const", const=True)

    sp = sub.add_parser("equidist", help="shrinking-ball translate averages")
    common(sp)
    sp.add_argument("--curve")
    sp.add_argument("--curve-file", dest="curve_file")
    sp.add_argument("--s")
    sp.add_argument("--t")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--box", help="cube radius or a:b,a:b,... intervals")
    sp.add_argument("--ball", help="radius of the parameter neighborhood")

    sp = sub.add_parser("traj", help="polynomial trajectory averages")
    common(sp)
    sp.add_argument("--curve")
    sp.add_argument("--curve-file", dest="curve_file")
    sp.add_argument("--s")
    sp.add_argument("--T")
    sp.add_argument("--grid", type=int)
    sp.add_argument("--box")
    sp.add_argument("--x", help='"identity" or "u:z1,z2,..."')

    sp = sub.add_parser("check", help="randomized exact verification suites")
    common(sp)
    sp.add_argument("--suite", choices=sorted(SUITES))
    sp.add_argument("--cases", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("dirichlet", help="improvability scans")
    common(sp)
    sp.add_argument("--mode", choices=["A", "B"])
    sp.add_argument("--n", help="expected number of coordinates (consistency check)")
    sp.add_argument("--z", help="comma-separated rational coordinates")
    sp.add_argument("--N", type=int)
    sp.add_argument("--N-range", dest="N_range", help="lo:hi inclusive")
    sp.add_argument("--lambda", dest="lam")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config) if args.config else {}
        return COMMANDS[args.command](args, config)
    except errors.ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (errors.OutOfDomain, errors.DimensionMismatch,
            errors.BadDimensions, errors.RankDeficient) as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (errors.PrecisionExhausted, errors.NumericJetUnstable,
            errors.SingularJet, errors.SingularMatrix, errors.NotUnimodular,
            errors.OnDegeneracyLocus, errors.DegenerateInput,
            errors.JetDepthInsufficient) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (errors.EnumerationBudgetExceeded, errors.BudgetExceeded) as e:
        print(f"budget error: {e}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    raise SystemExit(main())
