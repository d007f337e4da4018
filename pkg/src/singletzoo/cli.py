"""Command-line front end.

Subcommands:

    verify <model>      Monte Carlo joint tables vs the singlet over a
                        deterministic setting grid (atomic models are
                        additionally averaged exactly); exit 1 on mismatch.
    audit <model>       full hypothesis profile vs the model's declared
                        classification; exit 1 on mismatch.
    chsh <model>        CHSH value at the optimal coplanar settings.
    scan <model>        correlator vs angle table in the x-z plane.
    frobenius <model>   boundary decay exponents s+ and s- of C.
    admissible          check a candidate G expression for admissibility.

All randomized output is a pure function of (--seed, --workers):
repeated runs are byte-identical.  --format csv (default) writes flat
records; --format json writes one structured document, and errors then
go to standard error as JSON too.  Exit codes: 0 success, 1 a
verification, audit, or admissibility check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import admissibility, audit, expr
from .geometry import coplanar, fibonacci_sphere, sample_unit_sphere
from .models import estimate_joint, exact_average
from .quantum import CHSH_QUANTUM_BOUND, OUTCOMES, chsh_optimal_settings, qm_joint
from .zoo import MODEL_NAMES, UnknownModelError, make_model

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Bad arguments discovered after argparse (unknown model, bad expr)."""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="singletzoo",
        description="Hidden-variable models of the spin singlet: "
                    "verification, hypothesis audits, and admissibility checks.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model_arg=True):
        if model_arg:
            sp.add_argument("model", help=f"one of: {', '.join(MODEL_NAMES)}"
                                          " (dilorenzo also accepts dilorenzo:wa,wb)")
            sp.add_argument("--wa", type=float, default=None,
                            help="dilorenzo weight of the +-a atom pair")
            sp.add_argument("--wb", type=float, default=None,
                            help="dilorenzo weight of the +-b atom pair")
        sp.add_argument("--samples", type=int, default=100000,
                        help="Monte Carlo sample count (default 100000)")
        sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--workers", type=int, default=1,
                        help="worker shards for estimation (default 1)")
        sp.add_argument("--tol", type=float, default=1e-9,
                        help="tolerance for exact comparisons (default 1e-9)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    common(sub.add_parser("verify", help="estimated joint tables vs the singlet"))
    common(sub.add_parser("audit", help="hypothesis profile vs declared classification"))
    common(sub.add_parser("chsh", help="CHSH at the optimal settings"))

    sp = sub.add_parser("scan", help="correlator vs angle")
    common(sp)
    sp.add_argument("--from-deg", type=float, default=0.0, dest="from_deg")
    sp.add_argument("--to-deg", type=float, default=180.0, dest="to_deg")
    sp.add_argument("--step", type=float, default=5.0)

    sp = sub.add_parser("frobenius", help="boundary decay exponents of C")
    common(sp)

    sp = sub.add_parser("admissible", help="admissibility of a candidate G")
    common(sp, model_arg=False)
    sp.add_argument("--g", required=True, metavar="EXPR",
                    help="G(lambda,a,b) over ab, ua, ub, va, vb, l1..l4")
    sp.add_argument("--splus", required=True, type=float, help="exponent s+ at a.b = -1")
    sp.add_argument("--sminus", required=True, type=float, help="exponent s- at a.b = +1")
    sp.add_argument("--mu", default=None, metavar="EXPR",
                    help="unnormalized density over l1..l4 (default uniform)")
    return p


# ----------------------------------------------------------------------
# output plumbing

def _emit(args, fieldnames, records, extra=None):
    """Write records as CSV rows or one JSON document."""
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)
        text = buf.getvalue()
    else:
        doc = {"command": args.command, "records": records}
        if extra:
            doc.update(extra)
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail_note(args, message):
    """Human-readable failure diagnostics on stderr."""
    if args.format == "json":
        sys.stderr.write(json.dumps({"failure": message}, sort_keys=True) + "\n")
    else:
        sys.stderr.write(message + "\n")


def _model_from_args(args):
    params = {}
    if getattr(args, "wa", None) is not None:
        params["wa"] = args.wa
    if getattr(args, "wb", None) is not None:
        params["wb"] = args.wb
    try:
        return make_model(args.model, **params)
    except (UnknownModelError, ValueError) as e:
        raise UsageError(str(e)) from None


def _pair_seeds(seed, k):
    return list(np.random.SeedSequence(seed).spawn(k))


def _check_samples(args):
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")


# ----------------------------------------------------------------------
# subcommands

def _verify_grid():
    A = fibonacci_sphere(8)
    B = fibonacci_sphere(8, offset=0.5)
    pairs = [(A[i], B[i]) for i in range(8)]
    a0 = np.array([0.0, 0.0, 1.0])
    pairs += [(a0, a0.copy()), (a0, -a0)]
    return pairs


def cmd_verify(args) -> int:
    _check_samples(args)
    model = _model_from_args(args)
    pairs = _verify_grid()
    seeds = _pair_seeds(args.seed, len(pairs))
    records = []
    failures = []
    exact_max = 0.0
    for (a, b), s in zip(pairs, seeds):
        est = estimate_joint(model, a, b, args.samples, s, args.workers)
        ref = qm_joint(a, b)
        for sigma in OUTCOMES:
            for tau in OUTCOMES:
                e = est.estimate(sigma, tau)
                pq = ref.prob(sigma, tau)
                records.append({
                    "model": model.name,
                    "ax": float(a[0]), "ay": float(a[1]), "az": float(a[2]),
                    "bx": float(b[0]), "by": float(b[1]), "bz": float(b[2]),
                    "sigma": sigma, "tau": tau,
                    "p_est": e.mean, "p_qm": pq, "stderr": e.stderr,
                })
                if abs(e.mean - pq) > 4.0 * e.stderr + args.tol:
                    failures.append(
                        f"model {model.name}: P({sigma:+d},{tau:+d}) at a={a.tolist()}"
                        f" b={b.tolist()}: estimate {e.mean:.6g} vs {pq:.6g}"
                        f" (stderr {e.stderr:.2g})")
        if model.is_atomic:
            err = float(np.abs(exact_average(model, a, b).p - ref.p).max())
            exact_max = max(exact_max, err)
            if err > max(args.tol, 1e-12):
                failures.append(
                    f"model {model.name}: exact average off by {err:.3g}"
                    f" at a={a.tolist()} b={b.tolist()}")
    extra = {"n_samples": args.samples, "failures": failures}
    if model.is_atomic:
        extra["exact_max_error"] = exact_max
    _emit(args, ["model", "ax", "ay", "az", "bx", "by", "bz",
                 "sigma", "tau", "p_est", "p_qm", "stderr"], records, extra)
    for f in failures:
        _fail_note(args, f)
    return 1 if failures else 0


def cmd_audit(args) -> int:
    model = _model_from_args(args)
    profile = audit.full_audit(model, seed=args.seed, tol=args.tol)
    verdicts = profile.verdicts()
    declared = model.declared_profile
    records = []
    for name in ("uc", "si_a", "si_b", "rc", "malus_a", "malus_b"):
        finding = getattr(profile, name)
        records.append({
            "model": model.name,
            "hypothesis": name,
            "verdict": finding.verdict,
            "declared": declared[name],
            "max_deviation": finding.max_deviation,
            "witness": json.dumps(finding.witness, sort_keys=True)
            if finding.witness else "",
        })
    ok = profile.matches(declared)
    _emit(args, ["model", "hypothesis", "verdict", "declared",
                 "max_deviation", "witness"], records,
          {"matches_declared": ok})
    if not ok:
        bad = [n for n in verdicts if verdicts[n] != declared[n]]
        _fail_note(args, f"model {model.name}: audited profile differs from "
                         f"declared on: {', '.join(bad)}")
    return 0 if ok else 1


def cmd_chsh(args) -> int:
    _check_samples(args)
    model = _model_from_args(args)
    a, a2, b, b2 = chsh_optimal_settings()
    combo = [(a, b, 1.0), (a, b2, -1.0), (a2, b, 1.0), (a2, b2, 1.0)]
    seeds = _pair_seeds(args.seed, len(combo))
    s_val = 0.0
    var = 0.0
    for (x, y, sign), sd in zip(combo, seeds):
        est = estimate_joint(model, x, y, args.samples, sd, args.workers).correlator()
        s_val += sign * est.mean
        var += est.stderr**2
    stderr = math.sqrt(var)
    records = [{
        "model": model.name, "S": s_val, "stderr": stderr,
        "S_quantum": CHSH_QUANTUM_BOUND, "n_samples": args.samples,
    }]
    _emit(args, ["model", "S", "stderr", "S_quantum", "n_samples"], records)
    return 0


def cmd_scan(args) -> int:
    _check_samples(args)
    model = _model_from_args(args)
    if args.step <= 0:
        raise UsageError("--step must be positive")
    angles = np.arange(args.from_deg, args.to_deg + args.step / 2.0, args.step)
    if len(angles) == 0:
        raise UsageError("empty angle range")
    a = coplanar(0.0)
    seeds = _pair_seeds(args.seed, len(angles))
    records = []
    for ang, sd in zip(angles, seeds):
        b = coplanar(float(ang))
        est = estimate_joint(model, a, b, args.samples, sd, args.workers).correlator()
        records.append({
            "model": model.name, "angle_deg": float(ang),
            "corr_est": est.mean, "stderr": est.stderr,
            "corr_qm": -float(np.cos(np.deg2rad(ang))),
            "n_samples": args.samples,
        })
    _emit(args, ["model", "angle_deg", "corr_est", "stderr", "corr_qm",
                 "n_samples"], records)
    return 0


def cmd_frobenius(args) -> int:
    model = _model_from_args(args)
    try:
        fe = admissibility.frobenius_for_model(model, n_lambda=200, seed=args.seed)
    except admissibility.InsufficientDataError as e:
        _fail_note(args, f"model {model.name}: {e}")
        return 1
    records = []
    for side, est in (("s_minus", fe.s_minus), ("s_plus", fe.s_plus)):
        key = side.replace("s_", "")
        records.append({
            "model": model.name, "side": side, "estimate": est.mean,
            "stderr": est.stderr, "n_lambda": est.n,
            "rms_residual": fe.details[f"rms_residual_{key}"],
        })
    _emit(args, ["model", "side", "estimate", "stderr", "n_lambda",
                 "rms_residual"], records)
    return 0


_MU_VARS = {"l1", "l2", "l3", "l4"}


def _expression_sampler(mu_source):
    """lambda-sampler for the admissibility checker.

    Hidden states are (u, v) uniform on the sphere plus four scalars
    l1..l4 uniform on [-1, 1]; an optional mu expression over l1..l4
    reweights the scalars by rejection against its maximum on a pilot
    batch (so it need not be normalized).
    """
    mu_ast = None
    if mu_source is not None:
        mu_ast = expr.parse(mu_source)
        extra_vars = expr.variables_of(mu_ast) - _MU_VARS
        if extra_vars:
            raise UsageError("--mu may only reference l1..l4, not "
                             + ", ".join(sorted(extra_vars)))

    def draw_scalars(rng, n):
        return {f"l{i}": rng.uniform(-1.0, 1.0, n) for i in range(1, 5)}

    def sampler(rng, n):
        if mu_ast is None:
            ls = draw_scalars(rng, n)
        else:
            pilot = draw_scalars(rng, 4096)
            w = np.asarray(expr.eval_expr(mu_ast, pilot), dtype=float)
            w = np.broadcast_to(w, (4096,))
            if np.any(w < 0):
                raise UsageError("--mu takes negative values; it must be a density")
            wmax = float(w.max())
            if wmax <= 0.0:
                raise UsageError("--mu is identically zero on its domain")
            ls = {f"l{i}": np.empty(0) for i in range(1, 5)}
            got = 0
            rounds = 0
            while got < n:
                cand = draw_scalars(rng, max(4096, 2 * (n - got)))
                w = np.broadcast_to(
                    np.asarray(expr.eval_expr(mu_ast, cand), dtype=float),
                    (len(cand["l1"]),))
                if np.any(w < 0):
                    raise UsageError("--mu takes negative values; it must be a density")
                if float(w.max()) > wmax * (1.0 + 1e-9):
                    raise UsageError("--mu exceeded its pilot maximum; "
                                     "supply a bounded density")
                keep = rng.uniform(0.0, wmax, len(w)) < w
                for k in ls:
                    ls[k] = np.concatenate([ls[k], cand[k][keep]])
                got = len(ls["l1"])
                rounds += 1
                if rounds > 10000:
                    raise UsageError("--mu rejection sampling failed to terminate")
            ls = {k: v[:n] for k, v in ls.items()}
        lam = {"u": sample_unit_sphere(rng, n), "v": sample_unit_sphere(rng, n)}
        lam.update(ls)
        lam["n"] = n
        return lam

    return sampler


def _expression_G(g_source):
    ast = expr.parse(g_source)

    def Gfn(lam, a, b):
        n = lam["n"]
        bindings = {
            "ab": float(np.dot(a, b)),
            "ua": lam["u"] @ a, "ub": lam["u"] @ b,
            "va": lam["v"] @ a, "vb": lam["v"] @ b,
        }
        bindings.update({k: lam[k] for k in _MU_VARS})
        out = np.asarray(expr.eval_expr(ast, bindings), dtype=float)
        return np.full(n, float(out)) if out.ndim == 0 else out

    return Gfn


def cmd_admissible(args) -> int:
    _check_samples(args)
    try:
        Gfn = _expression_G(args.g)
        sampler = _expression_sampler(args.mu)
    except expr.ExprError as e:
        raise UsageError(str(e)) from None
    if args.splus <= 0 or args.sminus <= 0:
        raise UsageError("--splus and --sminus must be positive")
    try:
        report = admissibility.admissible(
            Gfn, sampler, args.splus, args.sminus,
            n_lambda=args.samples, tol=args.tol, seed=args.seed)
    except expr.DomainError as e:
        raise UsageError(f"expression domain error during scan: {e}") from None
    records = [{
        "verdict": "admissible" if report.admissible else "rejected",
        "rule": f["rule"] if not report.admissible else "",
        "what": f["what"] if not report.admissible else "",
        "witness": json.dumps(f.get("witness"), sort_keys=True)
        if not report.admissible else "",
    } for f in (report.failures or [{}])]
    _emit(args, ["verdict", "rule", "what", "witness"], records,
          {"checks": report.checks, "g": args.g, "mu": args.mu,
           "s_plus": args.splus, "s_minus": args.sminus})
    if not report.admissible:
        _fail_note(args, "rejected: " + report.reason())
    return 0 if report.admissible else 1


_DISPATCH = {
    "verify": cmd_verify,
    "audit": cmd_audit,
    "chsh": cmd_chsh,
    "scan": cmd_scan,
    "frobenius": cmd_frobenius,
    "admissible": cmd_admissible,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except UsageError as e:
        if getattr(args, "format", "csv") == "json":
            sys.stderr.write(json.dumps(
                {"error": {"type": "usage", "message": str(e)}},
                sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
