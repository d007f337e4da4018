"""Empirical classification of models against locality-type hypotheses.

The hypotheses, for a model mu(lambda | a, b) with kernel
P(sigma, tau | lambda, a, b):

    UC     uncorrelated choice: mu does not depend on the settings.
    SI_A   setting independence, Alice side: the lambda-conditioned
           marginal of sigma does not depend on Bob's setting b
           (SI_B symmetrically).
    RC     reducibility of correlations: conditioned on lambda and the
           settings, tau is independent of sigma, i.e. the conditional
           Q(tau | sigma) equals Bob's marginal.
    Malus  the lambda-conditioned marginals follow the Malus form
           (1 + sigma u.a)/2 with u carried by lambda (a special case
           of SI).

Any model reproducing the singlet violates at least one of UC, SI, RC;
the audits find which, with a concrete witness per violation.

UC is checked in three layers: atom lists compared across setting
pairs, identical random streams replayed under different settings
(samplers must ignore settings they do not use), and a two-sample
Kolmogorov-Smirnov comparison of hidden-state features as statistical
evidence.  The KS layer uses the asymptotic critical value
c(alpha) * sqrt((n1+n2)/(n1*n2)) with c(alpha) = sqrt(-ln(alpha/2)/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import sample_unit_sphere, unit
from .models import (
    SATISFIED,
    UNDETERMINED,
    VIOLATED,
    HiddenBatch,
    Model,
)

__all__ = [
    "AllSkippedError",
    "AuditFinding",
    "HypothesisProfile",
    "ks_2samp",
    "ks_critical",
    "audit_si",
    "audit_rc",
    "audit_uc",
    "audit_malus",
    "check_trivial_marginals",
    "full_audit",
]

_SIG = np.array([1.0, -1.0])

# thresholds: kernels are analytic, so real violations are O(1); these
# tolerances only absorb floating-point noise
DEFAULT_TOL = 1e-9
ATOM_TOL = 1e-12
MARGINAL_FLOOR = 1e-9  # below this a conditional is treated as undefined


class AllSkippedError(RuntimeError):
    """Every sampled configuration was skipped; the audit is vacuous."""


@dataclass(frozen=True)
class AuditFinding:
    verdict: str
    max_deviation: float
    witness: Optional[dict] = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class HypothesisProfile:
    uc: AuditFinding
    si_a: AuditFinding
    si_b: AuditFinding
    rc: AuditFinding
    malus_a: AuditFinding
    malus_b: AuditFinding

    def verdicts(self) -> dict:
        return {
            "uc": self.uc.verdict,
            "si_a": self.si_a.verdict,
            "si_b": self.si_b.verdict,
            "rc": self.rc.verdict,
            "malus_a": self.malus_a.verdict,
            "malus_b": self.malus_b.verdict,
        }

    def matches(self, declared: dict) -> bool:
        return self.verdicts() == dict(declared)


def _rand_pair(rng):
    return sample_unit_sphere(rng), sample_unit_sphere(rng)


def _marginals(tb, axis):
    # axis=1 sums over tau -> Alice's marginals; axis=0 over sigma -> Bob's
    return tb.sum(axis=2) if axis == 0 else tb.sum(axis=1)


# ----------------------------------------------------------------------
# setting independence

def audit_si(model: Model, n_lambda=40, n_settings=30, tol=DEFAULT_TOL, seed=0):
    """Sweep the remote setting with lambda held fixed.

    For each of ``n_lambda`` hidden states (each sampled at its own
    reference pair), the kernel is re-evaluated at ``n_settings``
    random remote settings; the verdict is violated when a
    lambda-conditioned marginal moves by more than ``tol``.
    Returns (finding for SI_A, finding for SI_B).
    """
    rng = np.random.default_rng(seed)
    worst = [(-1.0, None), (-1.0, None)]  # (deviation, witness) for A, B
    for _ in range(n_lambda):
        a_ref, b_ref = _rand_pair(rng)
        lam = model.sample(a_ref, b_ref, rng, 1)
        sweep = sample_unit_sphere(rng, n_settings)
        for side in (0, 1):
            remotes = np.vstack([[b_ref if side == 0 else a_ref], sweep])
            vals = np.empty((len(remotes), 2))
            for j, r in enumerate(remotes):
                a_j, b_j = (a_ref, r) if side == 0 else (r, b_ref)
                tb = np.asarray(model.tables(lam, a_j, b_j))
                vals[j] = _marginals(tb, axis=side)[0]
            variation = float((vals.max(axis=0) - vals.min(axis=0)).max())
            if variation > worst[side][0]:
                k = int(np.argmax(vals.max(axis=0) - vals.min(axis=0)))
                witness = {
                    "lambda": lam.describe(0),
                    "local_setting": (a_ref if side == 0 else b_ref).tolist(),
                    "remote_low": remotes[int(np.argmin(vals[:, k]))].tolist(),
                    "remote_high": remotes[int(np.argmax(vals[:, k]))].tolist(),
                    "outcome": int(_SIG[k]),
                    "variation": variation,
                }
                worst[side] = (variation, witness)
    out = []
    for dev, witness in worst:
        verdict = VIOLATED if dev > tol else SATISFIED
        out.append(AuditFinding(verdict, max(dev, 0.0),
                                witness if verdict == VIOLATED else None,
                                details={"n_lambda": n_lambda, "n_settings": n_settings}))
    return out[0], out[1]


# ----------------------------------------------------------------------
# reducibility of correlations

def audit_rc(model: Model, n_lambda=50, n_settings=20, tol=DEFAULT_TOL, seed=0):
    """Compare outcome conditionals against Bob's marginal per lambda.

    Where both sigma-conditionals exist the deviation is
    max_tau |Q(tau | +1) - Q(tau | -1)|; where only one side of the
    conditioning has support (deterministic kernels) that conditional
    is compared against Bob's marginal directly, and the other branch
    is counted as skipped.  Raises AllSkippedError when nothing could
    be evaluated.
    """
    rng = np.random.default_rng(seed)
    worst = (-1.0, None)
    evaluated = 0
    skipped = 0
    for _ in range(n_settings):
        a, b = _rand_pair(rng)
        batch = model.sample(a, b, rng, n_lambda)
        tb = np.asarray(model.tables(batch, a, b), dtype=float)
        ma = tb.sum(axis=2)              # (n, 2) marginals of sigma
        mb = tb.sum(axis=1)              # (n, 2) marginals of tau
        defined = ma >= MARGINAL_FLOOR
        skipped += int((~defined).sum())
        devs = np.zeros(len(tb))
        both = defined.all(axis=1)
        if both.any():
            q = tb[both] / ma[both][:, :, None]
            devs[both] = np.abs(q[:, 0, :] - q[:, 1, :]).max(axis=1)
        single = defined.sum(axis=1) == 1
        if single.any():
            idx = np.flatnonzero(single)
            which = np.argmax(defined[idx], axis=1)
            q = tb[idx, which, :] / ma[idx, which][:, None]
            devs[idx] = np.abs(q - mb[idx]).max(axis=1)
        evaluated += int(both.sum() + single.sum())
        k = int(np.argmax(devs))
        if devs[k] > worst[0]:
            worst = (float(devs[k]), {
                "lambda": batch.describe(k),
                "a": a.tolist(),
                "b": b.tolist(),
                "deviation": float(devs[k]),
            })
    if evaluated == 0:
        raise AllSkippedError("no configuration had a defined conditional")
    dev, witness = worst
    verdict = VIOLATED if dev > tol else SATISFIED
    return AuditFinding(verdict, max(dev, 0.0),
                        witness if verdict == VIOLATED else None,
                        details={"evaluated": evaluated, "skipped_branches": skipped})


# ----------------------------------------------------------------------
# uncorrelated choice

def ks_2samp(x1, x2) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (max CDF distance)."""
    x1 = np.sort(np.asarray(x1, dtype=float))
    x2 = np.sort(np.asarray(x2, dtype=float))
    allv = np.concatenate([x1, x2])
    cdf1 = np.searchsorted(x1, allv, side="right") / len(x1)
    cdf2 = np.searchsorted(x2, allv, side="right") / len(x2)
    return float(np.abs(cdf1 - cdf2).max())


def ks_critical(alpha, n1, n2) -> float:
    """Asymptotic two-sample KS critical value at significance alpha."""
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    return c * math.sqrt((n1 + n2) / (n1 * n2))


_KS_REFS = (np.array([1.0, 0.0, 0.0]), unit(np.array([1.0, 1.0, 1.0])))


def _feature_map(batch: HiddenBatch) -> dict:
    feats = {}
    for name in ("u", "v"):
        vec = getattr(batch, name)
        if vec is not None:
            for k, r in enumerate(_KS_REFS):
                feats[f"{name}.r{k + 1}"] = vec @ r
    for name in ("alpha", "beta", "x", "y"):
        val = getattr(batch, name)
        if val is not None:
            feats[name] = np.asarray(val, dtype=float)
    return feats


def audit_uc(model: Model, n_pairs=3, n_samples=20000, alpha=1e-3, seed=0):
    """Does mu(lambda | a, b) depend on (a, b)?

    Three layers of evidence, any of which decides "violated":
    atom lists compared across two random setting pairs; the sampler
    replayed with an identical random stream under both pairs (a
    sampler honouring UC must ignore its setting arguments); and a
    two-sample KS test on scalar features of the hidden state at
    significance ``alpha``.
    """
    if n_samples < 100:
        raise ValueError("KS comparison needs n_samples >= 100")
    rng = np.random.default_rng(seed)
    max_ks = 0.0
    crit = ks_critical(alpha, n_samples, n_samples)
    for _ in range(n_pairs):
        (a1, b1), (a2, b2) = _rand_pair(rng), _rand_pair(rng)
        if model.is_atomic:
            s1, s2 = model.atoms(a1, b1), model.atoms(a2, b2)
            dw = float(np.abs(s1.weights - s2.weights).max())
            if dw > ATOM_TOL:
                return AuditFinding(VIOLATED, dw, {
                    "layer": "atoms", "field": "weights",
                    "pair1": [a1.tolist(), b1.tolist()],
                    "pair2": [a2.tolist(), b2.tolist()],
                })
            for name, val1 in s1.batch.fields().items():
                val2 = s2.batch.fields()[name]
                dv = float(np.abs(np.asarray(val1) - np.asarray(val2)).max())
                if dv > ATOM_TOL:
                    return AuditFinding(VIOLATED, dv, {
                        "layer": "atoms", "field": name,
                        "pair1": [a1.tolist(), b1.tolist()],
                        "pair2": [a2.tolist(), b2.tolist()],
                    })
        # replay one child stream under both setting pairs
        child = int(rng.integers(2**63))
        rep1 = model.sample(a1, b1, np.random.default_rng(child), 64)
        rep2 = model.sample(a2, b2, np.random.default_rng(child), 64)
        for name, val1 in rep1.fields().items():
            val2 = rep2.fields().get(name)
            dv = (np.inf if val2 is None or np.shape(val1) != np.shape(val2)
                  else float(np.abs(np.asarray(val1) - np.asarray(val2)).max()))
            if dv > ATOM_TOL:
                return AuditFinding(VIOLATED, dv, {
                    "layer": "stream-replay", "field": name,
                    "pair1": [a1.tolist(), b1.tolist()],
                    "pair2": [a2.tolist(), b2.tolist()],
                })
        # statistical comparison of hidden-state features
        f1 = _feature_map(model.sample(a1, b1, rng, n_samples))
        f2 = _feature_map(model.sample(a2, b2, rng, n_samples))
        for name in f1:
            d = ks_2samp(f1[name], f2[name])
            max_ks = max(max_ks, d)
            if d > crit:
                return AuditFinding(VIOLATED, d, {
                    "layer": "ks", "feature": name, "critical": crit,
                    "pair1": [a1.tolist(), b1.tolist()],
                    "pair2": [a2.tolist(), b2.tolist()],
                })
    return AuditFinding(SATISFIED, max_ks, None,
                        details={"ks_critical": crit, "n_pairs": n_pairs})


# ----------------------------------------------------------------------
# Malus-form marginals

def audit_malus(model: Model, n_lambda=40, n_settings=15, tol=DEFAULT_TOL, seed=0):
    """Compare lambda-conditioned marginals with (1 + sigma u.a)/2.

    Needs the hidden state to carry the vectors u (Alice side) and v
    (Bob side); verdicts are undetermined otherwise.
    Returns (finding for side A, finding for side B).
    """
    rng = np.random.default_rng(seed)
    worst = [(-1.0, None), (-1.0, None)]
    have = [False, False]
    for _ in range(n_settings):
        a, b = _rand_pair(rng)
        batch = model.sample(a, b, rng, n_lambda)
        tb = np.asarray(model.tables(batch, a, b), dtype=float)
        for side, vec, setting in ((0, batch.u, a), (1, batch.v, b)):
            if vec is None:
                continue
            have[side] = True
            marg = _marginals(tb, axis=side)                     # (n, 2)
            target = (1.0 + _SIG[None, :] * (vec @ setting)[:, None]) / 2.0
            devs = np.abs(marg - target).max(axis=1)
            k = int(np.argmax(devs))
            if devs[k] > worst[side][0]:
                worst[side] = (float(devs[k]), {
                    "lambda": batch.describe(k),
                    "a": a.tolist(), "b": b.tolist(),
                    "deviation": float(devs[k]),
                })
    out = []
    for side in (0, 1):
        if not have[side]:
            out.append(AuditFinding(UNDETERMINED, float("nan"), None))
            continue
        dev, witness = worst[side]
        verdict = VIOLATED if dev > tol else SATISFIED
        out.append(AuditFinding(verdict, max(dev, 0.0),
                                witness if verdict == VIOLATED else None))
    return out[0], out[1]


# ----------------------------------------------------------------------

def check_trivial_marginals(model: Model, n_lambda=10, n_settings=100,
                            tol=1e-12, seed=0):
    """Worst deviation of any lambda-conditioned marginal from 1/2.

    Models satisfying both UC and SI are forced to have trivial
    marginals; this measures how far a given model is from that.
    Returns an AuditFinding whose verdict is satisfied when the
    deviation stays within ``tol``.
    """
    rng = np.random.default_rng(seed)
    worst = (-1.0, None)
    for _ in range(n_settings):
        a, b = _rand_pair(rng)
        batch = model.sample(a, b, rng, n_lambda)
        tb = np.asarray(model.tables(batch, a, b), dtype=float)
        for axis in (0, 1):
            devs = np.abs(_marginals(tb, axis=axis) - 0.5).max(axis=1)
            k = int(np.argmax(devs))
            if devs[k] > worst[0]:
                worst = (float(devs[k]), {
                    "lambda": batch.describe(k), "a": a.tolist(), "b": b.tolist(),
                    "side": "A" if axis == 0 else "B",
                })
    dev, witness = worst
    verdict = SATISFIED if dev <= tol else VIOLATED
    return AuditFinding(verdict, max(dev, 0.0),
                        witness if verdict == VIOLATED else None)


def full_audit(model: Model, seed=0, tol=DEFAULT_TOL) -> HypothesisProfile:
    """All hypothesis audits with independent child seeds."""
    seeds = np.random.SeedSequence(seed).spawn(4)
    si_a, si_b = audit_si(model, tol=tol, seed=seeds[0])
    rc = audit_rc(model, tol=tol, seed=seeds[1])
    uc = audit_uc(model, seed=seeds[2])
    malus_a, malus_b = audit_malus(model, tol=tol, seed=seeds[3])
    return HypothesisProfile(uc=uc, si_a=si_a, si_b=si_b, rc=rc,
                             malus_a=malus_a, malus_b=malus_b)
