"""Command-line driver: verification campaigns and the classification table.

Exit codes: 0 when every check passed, 1 when any check failed or was
inconclusive, 2 on invalid input.
"""

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import lru_cache

from .coherence import (
    CASES,
    build_case,
    canonical_case,
    classify_case,
    coherence_report,
    dual_identity_check,
    functional_relation_check,
    load_fixture,
    reconstruction_check,
)
from .errors import CoherentPairsError, InvalidParameter, ModeError
from .functionals import from_family
from .mops import build_mops, orthogonality_residuals, prop2_check, structure_table
from .poly import FALLING
from .scalar import DEFAULT_PREC, MIN_PREC, Ball, format_scalar, nonzero_status, worst_status, zero_status
from .sobolev import (
    build_sobolev,
    collapse_status,
    connection_check,
    initial_condition_status,
    orthogonality_status,
)
from .weights import FAMILIES, make_family, make_pair, parse_params, pearson_data, pearson_residuals

TOL = Fraction(1, 2**90)
WORKERS_ENV = "COHERENTPAIRS_WORKERS"
VERIFY_COMMANDS = ("pearson", "structure", "mops", "coherence", "sobolev")


class UsageError(CoherentPairsError, ValueError):
    """Invalid command-line input (exit code 2)."""


# formatting ---------------------------------------------------------------


def _magnitude(x):
    if isinstance(x, Ball):
        return Fraction(*x.upper_abs().as_integer_ratio())
    return abs(Fraction(x))


def scalar_str(x):
    return format_scalar(x)


def poly_residual_str(p):
    """The largest coefficient (in the falling-factorial basis) of a residual polynomial."""
    coeffs = list(p.to(FALLING).coeffs) if p.coeffs else []
    if not coeffs:
        return "0"
    return scalar_str(max(coeffs, key=_magnitude))


def _row(check, subject, n, status, residual, tau=None, notes=()):
    row = dict(check=check, subject=subject, n=n, status=status, residual=residual)
    if tau is not None:
        row["tau"] = scalar_str(tau)
    row["notes"] = list(notes)
    return row


def _sort_key(row):
    return (row["subject"], -1 if row["n"] is None else row["n"], row["check"])


def summarize(results):
    counts = dict(passed=0, failed=0, inconclusive=0)
    key = {"pass": "passed", "fail": "failed", "inconclusive": "inconclusive"}
    for r in results:
        counts[key[r["status"]]] += 1
    return counts


def exit_code(results):
    return 0 if all(r["status"] == "pass" for r in results) else 1


# configuration ------------------------------------------------------------


def _config(args):
    cfg = dict(command=args.command if args.command != "verify" else args.check)
    for key in ("family", "case", "functional", "nmax", "xmax", "mode", "prec"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    params = parse_params(getattr(args, "param", None))
    cfg["params"] = {k: format_scalar(v) for k, v in sorted(params.items())}
    lams = getattr(args, "lam", None)
    if lams is not None:
        cfg["lambdas"] = [format_scalar(Fraction(v)) for v in _parse_lambdas(lams)]
    return cfg


def _parse_lambdas(items):
    out = []
    for item in items:
        try:
            out.append(parse_params([f"lam={item}"])["lam"])
        except InvalidParameter as exc:
            raise UsageError(f"--lambda: {exc}") from exc
    return out


def validate(cfg):
    """Raise :class:`UsageError` for configurations that violate the run invariants."""
    cmd = cfg["command"]
    mode = cfg.get("mode")
    if mode == "approx" and cfg.get("prec", DEFAULT_PREC) < MIN_PREC:
        raise UsageError(f"mode=approx requires --prec >= {MIN_PREC}")
    if cmd in ("pearson", "mops") and not cfg.get("family"):
        raise UsageError(f"verify {cmd} needs --family")
    if cmd == "structure" and not (cfg.get("family") or cfg.get("case")):
        raise UsageError("verify structure needs --family or --case")
    if cmd == "structure" and cfg.get("family") and cfg.get("case"):
        raise UsageError("give either --family or --case, not both")
    if cmd in ("coherence", "sobolev") and not cfg.get("case"):
        raise UsageError(f"verify {cmd} needs --case")
    if cfg.get("nmax") is not None and cfg["nmax"] < 1:
        raise UsageError("--nmax must be at least 1")
    if cfg.get("family"):
        make_family(cfg["family"], cfg["params"])
    if cfg.get("case"):
        case = canonical_case(cfg["case"])
        needed = set(FAMILIES[CASES[case][0]][1]) | ({"omega"} if case != "I" else set())
        missing = needed - set(cfg["params"])
        extra = set(cfg["params"]) - needed
        if missing:
            raise UsageError(f"case {case} needs parameter(s) {', '.join(sorted(missing))}")
        if extra:
            raise UsageError(f"case {case} does not take parameter(s) {', '.join(sorted(extra))}")


# jobs (top-level so they can run in worker processes) ----------------------


@lru_cache(maxsize=8)
def _pair(case, params, nmax, mode, prec):
    return build_case(case, dict(params), nmax=nmax, mode=mode, prec=prec)


def _pair_from(cfg, nmax):
    return _pair(cfg["case"], tuple(sorted(cfg["params"].items())), nmax, cfg.get("mode"), cfg.get("prec", DEFAULT_PREC))


def _family_functional(cfg):
    fam = make_family(cfg["family"], cfg["params"])
    mode = cfg.get("mode") or "exact"
    return fam, from_family(fam, mode=mode, prec=cfg.get("prec", DEFAULT_PREC))


def job_pearson(cfg):
    fam = make_family(cfg["family"], cfg["params"])
    subject = fam.describe()
    out = []
    for x, r in enumerate(pearson_residuals(fam, cfg.get("xmax", 100))):
        out.append(_row("pearson", subject, x, zero_status(r), scalar_str(r)))
    return out


def job_structure(cfg):
    nmax = cfg.get("nmax", 10)
    if cfg.get("case"):
        pair = _pair_from(cfg, nmax)
        L, note = pair.L0, []
        if cfg.get("functional", "L1") == "L1":
            row = classify_case(pair)
            pp = make_pair(row["companion_phi"], row["companion_psi"])
            L = pair.L1
            note = [f"companion {row['fitted_family']} with Pearson pair from the weight ratio"]
        else:
            pp = pearson_data(pair.base)
        subject = f"{pair.describe()} [{cfg.get('functional', 'L1')}]"
    else:
        fam, L = _family_functional(cfg)
        pp, note, subject = pearson_data(fam), [], fam.describe()
    tol = None if L.mode == "exact" else TOL
    top = nmax + max(pp.phi.degree, 1)
    size = L.support_size()
    if size is not None and top > size - 1:
        raise UsageError(f"{subject}: structure check to n={nmax} needs {top + 1} support points, have {size}")
    seq = build_mops(L, top)
    out = []
    for n in range(pp.class_s + 1, nmax + 1):
        rep = structure_table(L, pp, n, seq, tol)
        below = rep.eps[: n - pp.class_s]
        res = scalar_str(max(below, key=_magnitude)) if below else "0"
        notes = note + rep.notes + [f"eps_(n,n-s) = {scalar_str(rep.anchor)}"]
        out.append(_row("structure", subject, n, rep.status, res, notes=notes))
        status, vals = prop2_check(L, pp, n, seq, tol)
        checked = [v for k, v in vals if k < n - pp.class_s]
        res = scalar_str(max(checked, key=_magnitude)) if checked else "0"
        out.append(_row("weighted-difference", subject, n, status, res))
    return out


def job_mops(cfg):
    fam, L = _family_functional(cfg)
    nmax = cfg.get("nmax", 12)
    seq = build_mops(L, nmax)
    tol = None if L.mode == "exact" else TOL
    subject = fam.describe()
    by_n = {}
    for n, k, v in orthogonality_residuals(seq):
        by_n.setdefault(n, []).append(v)
    out = []
    for n, vals in sorted(by_n.items()):
        st = worst_status([zero_status(v, tol) for v in vals] + [nonzero_status(seq.h(n))])
        notes = [f"alpha = {scalar_str(seq.alpha[n])}", f"h = {scalar_str(seq.h(n))}"]
        out.append(_row("mops", subject, n, st, scalar_str(max(vals, key=_magnitude)), notes=notes))
    return out


def job_coherence(cfg):
    nmax = cfg.get("nmax", 12)
    pair = _pair_from(cfg, nmax)
    subject = pair.describe()
    out = []
    for r in coherence_report(pair):
        out.append(_row("coherence", subject, r["n"], worst_status([r["residual_status"], r["tau_nonzero"]]),
                        poly_residual_str(r["residual"]), tau=r["tau"]))
        out.append(_row("tau-dual", subject, r["n"], worst_status([r["tau_match"], r["lower_status"]]),
                        scalar_str(r["tau"] - r["tau_bruteforce"]), tau=r["tau_bruteforce"]))
    return out


def job_relations(cfg):
    pair = _pair_from(cfg, cfg.get("nmax", 12))
    subject = pair.describe()
    out = []
    for r in functional_relation_check(pair):
        res = max((r["delta_relation"], r["christoffel_relation"]), key=_magnitude)
        out.append(_row("functional-relation", subject, r["k"], r["status"], scalar_str(res)))
    rec = reconstruction_check(pair)
    st = worst_status([rec["lambda2_status"], rec["lambda3_status"]])
    notes = [f"Lambda2 = {rec['lambda2']}", f"Lambda3 = {rec['lambda3']}"]
    out.append(_row("reconstruction", subject, None, st, "0" if st == "pass" else "mismatch", notes=notes))
    return out


def job_dual(cfg):
    nmax = cfg.get("nmax", 12)
    pair = _pair_from(cfg, nmax)
    subject = pair.describe()
    out = []
    for n in range(0, min(8, nmax - 2) + 1):
        rows = dual_identity_check(pair, n)
        res = max((r["lhs"] - r["rhs"] for r in rows), key=_magnitude)
        notes = [r["test"] for r in rows if r["status"] != "pass"]
        out.append(_row("dual-identity", subject, n, worst_status(r["status"] for r in rows), scalar_str(res), notes=notes))
    return out


def job_sobolev(cfg, lam):
    nmax = cfg.get("nmax", 8)
    pair = _pair_from(cfg, nmax + 1)
    system = build_sobolev(pair, lam, nmax)
    subject = f"{pair.describe()}, lambda={format_scalar(lam)}"
    out = [
        _row("sobolev-initial", subject, 1, initial_condition_status(system), "0"),
        _row("sobolev-orthogonality", subject, None, orthogonality_status(system), "0"),
    ]
    if lam == 0:
        out.append(_row("sobolev-collapse", subject, None, collapse_status(system), "0"))
    for n in range(1, nmax + 1):
        c = connection_check(system, n)
        out.append(_row("sobolev-line1", subject, n, c["line1_status"], poly_residual_str(c["line1"]),
                        notes=[f"gamma = {scalar_str(c['gamma'])}"]))
        out.append(_row("sobolev-line2", subject, n, c["line2_status"], poly_residual_str(c["line2"])))
    return out


def _jobs(cfg):
    cmd = cfg["command"]
    if cmd == "pearson":
        return [(job_pearson, (cfg,))]
    if cmd == "structure":
        return [(job_structure, (cfg,))]
    if cmd == "mops":
        return [(job_mops, (cfg,))]
    if cmd == "coherence":
        return [(job_coherence, (cfg,)), (job_relations, (cfg,)), (job_dual, (cfg,))]
    lams = [Fraction(v) for v in cfg.get("lambdas", ["0", "1/2", "2"])]
    return [(job_sobolev, (cfg, lam)) for lam in lams]


def _call(job):
    fn, args = job
    return fn(*args)


def default_workers():
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def run_checks(cfg, workers=1):
    """Run every job for ``cfg``; results come back in canonical order."""
    jobs = _jobs(cfg)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            chunks = list(pool.map(_call, jobs))
    else:
        chunks = [_call(j) for j in jobs]
    results = [r for chunk in chunks for r in chunk]
    return sorted(results, key=_sort_key)


# classification table ------------------------------------------------------

TABLE_COLUMNS = (
    "case", "L0", "L1", "stated_mapping", "stated_verified",
    "verified_family", "verified_mapping", "pointwise", "notes",
)


def _mapping_str(m):
    return " ".join(f"{k}={format_scalar(v)}" for k, v in m.items()) if m else ""


def classify_rows(fixture=None):
    """One row per case from the first fixture point of each case, in case order."""
    rows = load_fixture(fixture)
    seen, out = set(), []
    for row in rows:
        case = canonical_case(row["case"])
        if case in seen:
            continue
        seen.add(case)
        params = {k: v for k, v in row.items() if k not in ("case", "nmax", "mode", "prec")}
        pair = build_case(case, params, nmax=4, mode=row.get("mode"))
        c = classify_case(pair)
        notes = []
        if not c["stated_verified"]:
            notes.append("stated mapping fails the weight-ratio check")
        if c["fitted_family"] != c["L1"]:
            notes.append(f"companion weight is {c['fitted_family']}, not {c['L1']}")
        ok = c["fitted_mapping"] is not None and c["fitted_pointwise"] and c["shifted_verified"]
        out.append(dict(
            case=case,
            L0=c["L0"],
            L1=c["L1"],
            stated_mapping=_mapping_str(c["stated_mapping"]),
            stated_verified=str(c["stated_verified"]).lower(),
            verified_family=c["fitted_family"] or "",
            verified_mapping=_mapping_str(c["fitted_mapping"]),
            pointwise=str(c["fitted_pointwise"]).lower(),
            notes="; ".join(notes),
            status="pass" if ok else "fail",
            subject=pair.describe(),
        ))
    order = list(CASES)
    return sorted(out, key=lambda r: order.index(r["case"]))


def table_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def results_csv(results):
    buf = io.StringIO()
    cols = ("check", "subject", "n", "status", "residual", "tau", "notes")
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in results:
        w.writerow({**r, "n": "" if r["n"] is None else r["n"], "tau": r.get("tau", ""), "notes": "; ".join(r["notes"])})
    return buf.getvalue()


# entry point ---------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="coherentpairs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run one verification campaign")
    verify.add_argument("check", choices=VERIFY_COMMANDS)
    verify.add_argument("--family", help="weight family tag, e.g. gen-meixner")
    verify.add_argument("--case", help="coherent pair case: I, IIa, IIb, III, IV")
    verify.add_argument("--functional", choices=("L0", "L1"), help="structure check target for --case (default L1)")
    verify.add_argument("--param", action="append", default=[], metavar="NAME=P/Q")
    verify.add_argument("--nmax", type=int)
    verify.add_argument("--xmax", type=int, help="largest x for the Pearson check (default 100)")
    verify.add_argument("--mode", choices=("exact", "approx"))
    verify.add_argument("--prec", type=int, help=f"working precision in bits (default {DEFAULT_PREC})")
    verify.add_argument("--lambda", dest="lam", action="append", metavar="P/Q",
                        help="Sobolev weight; repeatable (default 0, 1/2, 2)")
    verify.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    verify.add_argument("--out", help="report path (default stdout)")
    verify.add_argument("--format", choices=("json", "csv"), default="json")

    table = sub.add_parser("classify-table", help="reproduce the classification table")
    table.add_argument("--fixture", help="fixture file (default: bundled parameter points)")
    table.add_argument("--out", help="output path (default stdout)")
    table.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _write(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        if args.command == "classify-table":
            rows = classify_rows(args.fixture)
            results = [_row("classify", r["subject"], None, r["status"], "0",
                            notes=[f"{r['case']}: {r['L0']} -> {r['verified_family']} {r['verified_mapping']}"])
                       for r in rows]
            if args.format == "csv":
                text = table_csv(rows)
            else:
                report = dict(command="classify-table", config=dict(fixture=args.fixture),
                              results=results, table=[{k: r[k] for k in TABLE_COLUMNS} for r in rows],
                              summary=summarize(results))
                text = json.dumps(report, indent=2) + "\n"
            _write(text, args.out)
            return exit_code(results)

        cfg = _config(args)
        validate(cfg)
        workers = args.workers if args.workers is not None else default_workers()
        if workers < 1:
            raise UsageError("--workers must be positive")
        try:
            results = run_checks(cfg, workers)
        except (InvalidParameter, ModeError, UsageError):
            raise
        except CoherentPairsError as exc:
            # the input is well-formed but the construction broke down
            results = [_row(cfg["command"], cfg.get("case") or cfg.get("family"), None, "fail", "", notes=[str(exc)])]
        if args.format == "csv":
            text = results_csv(results)
        else:
            report = dict(command=cfg["command"], config=cfg, results=results, summary=summarize(results))
            text = json.dumps(report, indent=2) + "\n"
        _write(text, args.out)
        return exit_code(results)
    except (InvalidParameter, ModeError, UsageError, OSError) as exc:
        print(f"coherentpairs: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
