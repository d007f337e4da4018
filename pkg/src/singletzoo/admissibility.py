"""Correlator decomposition, Frobenius indices, and admissibility of G.

Any hidden-variable model of the singlet has a per-lambda correlator

    D(lambda, a, b) = sum_{sigma,tau} sigma*tau P(sigma,tau | lambda, a, b)

which can always be written D = -a.b + C.  Reproducing the singlet
forces the mu-average of C to vanish at every setting pair, and perfect
(anti)correlations force C(lambda, a, +-a) = 0 pointwise on the support
of mu.  Writing c = a.b, the vanishing at the boundary admits a
power-law (Frobenius) form

    C = (1 + c)^{s+} (1 - c)^{s-} G(lambda, a, b)

with G nonzero and finite at c = +-1 away from declared exceptional
sets.  Positivity of the kernel then requires s+ >= 1 and s- >= 1,
and bounds G pointwise; ``admissible`` certifies a candidate (G, s+,
s-) numerically with a witness on failure.

Index estimation fits the slope of log |C| against log eps along a
geodesic approach b -> a with a.b = 1 - eps (giving s-) and the
mirrored approach to -a (giving s+).  C functions built from sign
kernels flip sign at isolated path points; each per-lambda fit is
truncated at the first sign change away from the limit point so only
the branch attached to the limit enters the regression.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import fibonacci_sphere, geodesic_from, perp, sample_unit_sphere
from .models import Estimate, HiddenBatch, Model, estimate_joint

__all__ = [
    "InsufficientDataError",
    "PacReport",
    "FrobeniusEstimate",
    "AdmissibilityReport",
    "correlator_D",
    "extract_C",
    "extract_C_mean",
    "check_pac_zero",
    "pac_zero_for_model",
    "estimate_frobenius_indices",
    "frobenius_for_model",
    "model_C_function",
    "admissible",
]

_SIG = np.array([1.0, -1.0])

DEFAULT_EPS_GRID = np.geomspace(1e-6, 1e-1, 26)

# |C| below this counts as an exact zero (skipped in log fits); genuine
# power-law values on the default grid stay far above it
ZERO_FLOOR = 1e-280


class InsufficientDataError(RuntimeError):
    """Too few nonzero C values to fit an exponent."""


def correlator_D(table) -> float:
    """sum over sigma, tau of sigma*tau*P; inverts P = (1 + sigma*tau*D)/4."""
    p = np.asarray(getattr(table, "p", table), dtype=float)
    return float(_SIG @ p @ _SIG)


def _C_array(model: Model, lam, a, b) -> np.ndarray:
    tb = np.asarray(model.tables(lam, a, b), dtype=float)
    d = np.einsum("i,nij,j->n", _SIG, tb, _SIG)
    return d + float(np.dot(a, b))


def extract_C(model: Model, lam, a, b):
    """C = D + a.b evaluated per hidden state; scalar for a size-1 batch."""
    out = _C_array(model, lam, a, b)
    return float(out[0]) if lam.n == 1 else out


def extract_C_mean(model: Model, a, b, n_samples=10**6, seed=0, workers=1) -> Estimate:
    """Monte Carlo mean of C over mu(lambda | a, b) with standard error.

    Exactly zero in expectation for any model reproducing the singlet,
    whatever the per-lambda behaviour of C.
    """
    est = estimate_joint(model, a, b, n_samples, seed, workers)
    corr = est.correlator()
    return Estimate(corr.mean + float(np.dot(a, b)), corr.stderr, corr.n)


def model_C_function(model: Model) -> Callable:
    """Cfn(lam, a, b) -> (n,) array of C values for a zoo model."""

    def Cfn(lam, a, b):
        return _C_array(model, lam, a, b)

    return Cfn


# ----------------------------------------------------------------------
# perfect-(anti)correlation zeros

@dataclass(frozen=True)
class PacReport:
    passed: bool
    max_parallel: float
    max_antiparallel: float
    n_evaluated: int
    n_excluded: int
    witness: Optional[dict] = None


def check_pac_zero(Cfn, lam_sampler, n_lambda=200, n_dirs=20, tol=1e-9,
                   seed=0, exceptional=None) -> PacReport:
    """Verify C(lambda, a, a) = 0 and C(lambda, a, -a) = 0 on the support.

    ``lam_sampler(a, b, rng, n)`` draws hidden states for the setting
    pair under test (the zeros are only claimed on the support of the
    distribution at that pair).  ``exceptional(lam, i, a)`` may mark
    measure-zero directions to exclude.
    """
    rng = np.random.default_rng(seed)
    worst = {1.0: 0.0, -1.0: 0.0}
    witness = None
    evaluated = 0
    excluded = 0
    for _ in range(n_dirs):
        a = sample_unit_sphere(rng)
        for side in (1.0, -1.0):
            b = side * a
            lam = lam_sampler(a, b, rng, n_lambda)
            vals = np.abs(np.asarray(Cfn(lam, a, b), dtype=float))
            keep = np.ones(len(vals), dtype=bool)
            if exceptional is not None:
                for i in range(len(vals)):
                    if exceptional(lam, i, a):
                        keep[i] = False
            excluded += int((~keep).sum())
            evaluated += int(keep.sum())
            if not keep.any():
                continue
            k = int(np.flatnonzero(keep)[np.argmax(vals[keep])])
            if vals[k] > worst[side]:
                worst[side] = float(vals[k])
                if vals[k] > tol:
                    desc = lam.describe(k) if hasattr(lam, "describe") else {"index": k}
                    witness = {"side": int(side), "a": a.tolist(),
                               "abs_C": float(vals[k]), "lambda": desc}
    passed = worst[1.0] <= tol and worst[-1.0] <= tol
    return PacReport(passed, worst[1.0], worst[-1.0], evaluated, excluded,
                     witness if not passed else None)


def pac_zero_for_model(model: Model, n_lambda=200, n_dirs=20, tol=1e-9,
                       seed=0) -> PacReport:
    """check_pac_zero wired to a zoo model.

    Atomic models are checked over their full atom list (exact), with
    zero-weight atoms excluded since they are outside the support at
    the tested pair.  Samplers that perturb collinear settings do so
    with a warning, which is routine here and silenced.
    """
    if model.is_atomic:
        def lam_sampler(a, b, rng, n):
            atom_set = model.atoms(a, b)
            keep = atom_set.weights > 1e-15
            batch = atom_set.batch
            kw = {k: np.asarray(v)[keep] for k, v in batch.fields().items()}
            return HiddenBatch(kind=batch.kind, n=int(keep.sum()), **kw)
    else:
        def lam_sampler(a, b, rng, n):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return model.sample(a, b, rng, n)

    return check_pac_zero(model_C_function(model), lam_sampler,
                          n_lambda=n_lambda, n_dirs=n_dirs, tol=tol,
                          seed=seed, exceptional=model.exceptional)


# ----------------------------------------------------------------------
# Frobenius index estimation

@dataclass(frozen=True)
class FrobeniusEstimate:
    s_minus: Estimate
    s_plus: Estimate
    details: dict = field(default_factory=dict)


def _fit_side(Cfn, lam, a, t, eps_grid, pole):
    """Per-lambda log-log slopes for the approach b -> pole*a.

    Returns (slopes, residual rms list, zero count, skipped count).
    """
    base = pole * np.asarray(a, dtype=float)
    vals = np.empty((lam.n, len(eps_grid)))
    for j, eps in enumerate(eps_grid):
        b = geodesic_from(base, t, float(eps))
        vals[:, j] = np.asarray(Cfn(lam, a, b), dtype=float)
    logeps = np.log(np.asarray(eps_grid, dtype=float))
    slopes = []
    resid = []
    zeros = int((np.abs(vals) < ZERO_FLOOR).sum())
    skipped = 0
    for i in range(lam.n):
        row = vals[i]
        nz = np.abs(row) >= ZERO_FLOOR
        if not nz[0]:
            skipped += 1
            continue
        # keep the maximal initial run with the sign of the limit branch
        s0 = math.copysign(1.0, row[0])
        run = 0
        while run < len(row) and nz[run] and math.copysign(1.0, row[run]) == s0:
            run += 1
        if run < 3:
            skipped += 1
            continue
        x = logeps[:run]
        y = np.log(np.abs(row[:run]))
        coef = np.polyfit(x, y, 1)
        pred = np.polyval(coef, x)
        slopes.append(float(coef[0]))
        resid.append(float(np.sqrt(np.mean((y - pred) ** 2))))
    return np.array(slopes), resid, zeros, skipped


def estimate_frobenius_indices(Cfn, lam_sampler, a=None, t=None,
                               eps_grid=None, n_lambda=200,
                               seed=0) -> FrobeniusEstimate:
    """Estimate (s-, s+) from the decay of C along geodesic approaches.

    For each sampled lambda the slope of log |C(lambda, a, b(eps))|
    against log eps is fit on ``eps_grid`` (default 26 points,
    log-spaced in [1e-6, 1e-1]); b(eps) approaches a for the s- side
    and -a for the s+ side.  Per-lambda fits are truncated at the first
    sign change of C counted from the limit end, and lambdas whose C
    vanishes there are skipped.  Raises InsufficientDataError when more
    than 90 percent of all (lambda, eps) values are zeros.
    """
    if a is None:
        a = np.array([0.0, 0.0, 1.0])
    a = np.asarray(a, dtype=float)
    t = perp(a) if t is None else np.asarray(t, dtype=float)
    eps_grid = DEFAULT_EPS_GRID if eps_grid is None else np.asarray(eps_grid, float)
    rng = np.random.default_rng(seed)

    sides = {}
    details = {"eps_grid": eps_grid.tolist()}
    total = 0
    zeros = 0
    for label, pole in (("minus", 1.0), ("plus", -1.0)):
        b_near = geodesic_from(pole * a, t, float(eps_grid[0]))
        lam = lam_sampler(a, b_near, rng, n_lambda)
        slopes, resid, nz, skipped = _fit_side(Cfn, lam, a, t, eps_grid, pole)
        total += lam.n * len(eps_grid)
        zeros += nz
        details[f"n_used_{label}"] = int(len(slopes))
        details[f"n_skipped_{label}"] = int(skipped)
        details[f"rms_residual_{label}"] = float(np.mean(resid)) if resid else float("nan")
        sides[label] = slopes
    if total == 0 or zeros > 0.9 * total:
        raise InsufficientDataError(
            f"{zeros} of {total} C evaluations are zero; no exponent to fit"
        )
    out = {}
    for label, slopes in sides.items():
        if len(slopes) == 0:
            raise InsufficientDataError(f"no usable lambda on the s_{label} side")
        se = float(np.std(slopes, ddof=1) / math.sqrt(len(slopes))) if len(slopes) > 1 else 0.0
        out[label] = Estimate(float(np.mean(slopes)), se, len(slopes))
    return FrobeniusEstimate(s_minus=out["minus"], s_plus=out["plus"], details=details)


def frobenius_for_model(model: Model, a=None, t=None, eps_grid=None,
                        n_lambda=200, seed=0) -> FrobeniusEstimate:
    """estimate_frobenius_indices wired to a zoo model.

    Hidden states are drawn at the near end of each approach path;
    setting-dependent samplers thus see the geometry they would in the
    limit being probed.
    """
    def lam_sampler(a_, b_, rng, n):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return model.sample(a_, b_, rng, n)

    return estimate_frobenius_indices(model_C_function(model), lam_sampler,
                                      a=a, t=t, eps_grid=eps_grid,
                                      n_lambda=n_lambda, seed=seed)


# ----------------------------------------------------------------------
# admissibility of candidate G functions

@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    failures: list
    checks: dict = field(default_factory=dict)

    def reason(self) -> str:
        if self.admissible:
            return "admissible"
        return "; ".join(f"rule {f['rule']}: {f['what']}" for f in self.failures)


def _settings_pairs(n_settings, eps_list, t_of):
    """Deterministic positivity grid: lattice pairs, a coplanar sweep
    over the full range of a.b, and near-boundary extremes b = +-a +- eps*t."""
    A = fibonacci_sphere(n_settings)
    B = fibonacci_sphere(n_settings, offset=0.5)
    pairs = [(A[i], B[i]) for i in range(n_settings)]
    pairs += [(A[i], B[(i + n_settings // 3) % n_settings]) for i in range(n_settings)]
    a0 = np.array([0.0, 0.0, 1.0])
    for ang in np.linspace(0.0, 180.0, 61):
        th = np.deg2rad(ang)
        pairs.append((a0, np.array([np.sin(th), 0.0, np.cos(th)])))
    extremes = []
    for i in range(0, n_settings, max(1, n_settings // 8)):
        a = A[i]
        t = t_of(a)
        for pole in (1.0, -1.0):
            for eps in eps_list:
                extremes.append((a, geodesic_from(pole * a, t, eps)))
    return pairs, extremes


def admissible(Gfn, lam_sampler, s_plus, s_minus, n_lambda=500, n_settings=50,
               tol=1e-9, seed=0, exceptional=None) -> AdmissibilityReport:
    """Certify a candidate correlator deviation C = (1+c)^s+ (1-c)^s- G.

    Rejection rules, each with a witness:
      (i)   s+ < 1 or s- < 1 (positivity near the boundary fails in the
            limit regardless of G);
      (ii)  some probability entry (1 + sigma*tau*(-c + C))/4 falls
            outside [-tol, 1 + tol] on the scanned settings grid;
      (iii) the lambda-mean of G deviates from 0 by more than 4 standard
            errors at some setting pair (the zero-mean constraint);
      (iv)  G is zero, non-finite, or unboundedly large at b = +-a for
            some lambda outside the declared exceptional set.

    ``Gfn(lam, a, b) -> (n,)``; ``lam_sampler(rng, n) -> lam``.  A
    ``Gfn`` of None means C is identically zero (the quantum reference
    itself), which is admissible with no further analysis.
    """
    checks = {}
    if Gfn is None:
        return AdmissibilityReport(True, [], {"note": "C identically zero"})
    failures = []
    s_plus = float(s_plus)
    s_minus = float(s_minus)
    for name, s in (("s_plus", s_plus), ("s_minus", s_minus)):
        if not (s > 0):
            raise ValueError(f"{name} must be positive, got {s}")
        if s < 1.0 - 1e-12:
            failures.append({
                "rule": "i", "what": f"{name} = {s} < 1",
                "witness": {name: s},
            })

    rng = np.random.default_rng(seed)
    lam = lam_sampler(rng, n_lambda)
    n = getattr(lam, "n", n_lambda)

    def C_of(a, b):
        c = float(np.dot(a, b))
        g = np.asarray(Gfn(lam, a, b), dtype=float)
        return c, g, (1.0 + c) ** s_plus * (1.0 - c) ** s_minus * g

    # rule (ii): pointwise positivity over the deterministic grid
    eps_list = (1e-6, 1e-4, 1e-2)
    pairs, extremes = _settings_pairs(n_settings, eps_list, perp)
    worst = (0.0, None)
    excluded_ext = 0
    for group, plist in (("grid", pairs), ("boundary", extremes)):
        for a, b in plist:
            c, g, C = C_of(a, b)
            d = -c + C
            idx = np.arange(len(d))
            if group == "boundary" and exceptional is not None:
                keep = np.array([not exceptional(lam, i, a) for i in range(len(d))])
                excluded_ext += int((~keep).sum())
                if not keep.any():
                    continue
                d = d[keep]
                idx = idx[keep]
            over = np.abs(d) - 1.0
            k = int(np.argmax(over))
            if over[k] > worst[0]:
                sigma, tau = (1, -1) if d[k] > 0 else (1, 1)
                p_bad = (1.0 + sigma * tau * d[k]) / 4.0
                worst = (float(over[k]), {
                    "a": np.asarray(a).tolist(), "b": np.asarray(b).tolist(),
                    "c": c, "sigma": sigma, "tau": tau,
                    "probability": float(p_bad), "lambda_index": int(idx[k]),
                })
    checks["positivity_margin"] = worst[0]
    checks["boundary_lambdas_excluded"] = excluded_ext
    if worst[0] > 4.0 * tol:  # P outside [-tol, 1+tol] <=> |D| > 1 + 4 tol
        failures.append({"rule": "ii",
                         "what": f"probability {worst[1]['probability']:.6g} "
                                 f"outside [0, 1] at c = {worst[1]['c']:.6g}",
                         "witness": worst[1]})

    # rule (iii): zero lambda-mean of G at sampled setting pairs
    worst_mean = (0.0, None, 0.0)
    for a, b in pairs[: min(len(pairs), 20)]:
        _, g, _ = C_of(a, b)
        m = float(np.mean(g))
        se = float(np.std(g, ddof=1) / math.sqrt(len(g))) if len(g) > 1 else 0.0
        if abs(m) - 4.0 * se > worst_mean[0]:
            worst_mean = (abs(m) - 4.0 * se, {"a": np.asarray(a).tolist(),
                                              "b": np.asarray(b).tolist(),
                                              "mean": m, "stderr": se}, m)
    checks["worst_mean_margin"] = worst_mean[0]
    if worst_mean[0] > 1e-15:
        failures.append({"rule": "iii",
                         "what": f"mean G = {worst_mean[2]:.6g} not 0 within 4 stderr",
                         "witness": worst_mean[1]})

    # rule (iv): G nonzero and finite at the (anti)parallel boundary
    gbound = 0.0
    for a in fibonacci_sphere(8):
        for side in (1.0, -1.0):
            g = np.asarray(Gfn(lam, a, side * a), dtype=float)
            keep = np.ones(len(g), dtype=bool)
            if exceptional is not None:
                keep = np.array([not exceptional(lam, i, a) for i in range(len(g))])
            if not keep.any():
                continue
            g = g[keep]
            bad = ~np.isfinite(g) | (np.abs(g) <= 1e-12)
            if bad.any():
                k = int(np.argmax(bad))
                failures.append({"rule": "iv",
                                 "what": f"|G(lambda, a, {'+' if side > 0 else '-'}a)|"
                                         f" = {abs(g[k]):.3g} not in (0, inf)",
                                 "witness": {"a": a.tolist(), "side": int(side),
                                             "G": float(g[k])}})
                break
            gbound = max(gbound, float(np.abs(g).max()))
        else:
            continue
        break
    checks["max_boundary_G"] = gbound

    return AdmissibilityReport(not failures, failures, checks)
