"""Hidden-variable model contract and Monte Carlo estimation.

A model consists of a hidden-state distribution mu(lambda | a, b) and a
response kernel P(sigma, tau | lambda, a, b).  Averaging the kernel over
mu must reproduce the singlet table (1 - sigma*tau a.b)/4; everything
else (which Bell-type hypotheses the model breaks to get there) is what
the auditor classifies.

Samplers always receive both settings, even when mu does not depend on
them; models honouring uncorrelated choice must ignore the arguments.
The auditor exploits this by replaying identical random streams under
different settings.

Hidden states are held as struct-of-arrays batches so kernels can be
evaluated vectorized; a single lambda is just a batch of size one.
Estimation shards work across worker streams spawned from one master
seed, and partial sums merge in a fixed order, so results are
bitwise-reproducible for a fixed (seed, workers) pair.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quantum import OUTCOMES, InvalidProbabilityError, JointTable

__all__ = [
    "SATISFIED",
    "VIOLATED",
    "UNDETERMINED",
    "NotAtomicError",
    "UndefinedConditionalError",
    "HiddenBatch",
    "AtomSet",
    "Model",
    "Estimate",
    "EstimatedTable",
    "marginal_a",
    "marginal_b",
    "conditional_b_given_a",
    "estimate_joint",
    "exact_average",
]

_IDX = {1: 0, -1: 1}

# classification verdicts used in declared and audited profiles
SATISFIED = "satisfied"
VIOLATED = "violated"
UNDETERMINED = "undetermined"

# hidden-state array fields a batch may carry: unit vectors and scalars
_VECTOR_FIELDS = ("u", "v")
_SCALAR_FIELDS = ("alpha", "beta", "x", "y")


class NotAtomicError(TypeError):
    """Operation needs a finite-atom mu but the model's is continuous."""


class UndefinedConditionalError(ZeroDivisionError):
    """Conditioning on an outcome of (numerically) zero probability."""


@dataclass
class HiddenBatch:
    """Batch of hidden states; vector fields are (n, 3), scalars (n,)."""

    kind: str
    n: int
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    alpha: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None

    def fields(self) -> dict:
        out = {}
        for name in _VECTOR_FIELDS + _SCALAR_FIELDS:
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        return out

    def item(self, i) -> "HiddenBatch":
        """Single hidden state as a batch of size one."""
        kw = {k: np.asarray(v)[i : i + 1] for k, v in self.fields().items()}
        return HiddenBatch(kind=self.kind, n=1, **kw)

    def describe(self, i=0) -> dict:
        """Plain-python summary of one hidden state (for witnesses)."""
        out = {}
        for k, v in self.fields().items():
            row = np.asarray(v)[i]
            out[k] = row.tolist() if row.ndim else float(row)
        return out


@dataclass(frozen=True)
class AtomSet:
    """Finite support of mu: hidden states with probability weights."""

    batch: HiddenBatch
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) != self.batch.n:
            raise ValueError("weights must be 1-d, one per atom")
        if w.min() < -1e-15:
            raise ValueError(f"negative atom weight: {w.min()}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"atom weights sum to {w.sum()}, not 1")
        object.__setattr__(self, "weights", np.maximum(w, 0.0))


@dataclass(frozen=True)
class Model:
    """A hidden-variable model: sampler, kernel, and declared classification.

    sample(a, b, rng, n) -> HiddenBatch draws n hidden states from
    mu(lambda | a, b).  tables(batch, a, b) -> (n, 2, 2) evaluates the
    kernel per hidden state; it must be a pure function of its
    arguments so the auditor can re-evaluate one lambda under swept
    settings.  atoms(a, b) -> AtomSet enumerates mu's support for
    finite-atom models, else None.
    """

    name: str
    sample: Callable
    tables: Callable
    declared_profile: dict
    atoms: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    # predicate (lam_batch, i, a) -> bool marking directions where the
    # kernel's sign structure degenerates and C(lambda, a, +-a) = 0 is
    # not claimed (used by the admissibility checks)
    exceptional: Optional[Callable] = None

    @property
    def is_atomic(self) -> bool:
        return self.atoms is not None

    def kernel(self, lam: HiddenBatch, a, b) -> JointTable:
        """Joint table for a single hidden state."""
        t = self.tables(lam, a, b)
        return JointTable(np.asarray(t).reshape(2, 2))


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with its standard error."""

    mean: float
    stderr: float
    n: int


@dataclass(frozen=True)
class EstimatedTable:
    """Entrywise estimates of a joint table plus the correlator."""

    mean: np.ndarray      # (2, 2)
    stderr: np.ndarray    # (2, 2)
    corr_mean: float
    corr_stderr: float
    n: int

    def estimate(self, sigma, tau) -> Estimate:
        i, j = _IDX[sigma], _IDX[tau]
        return Estimate(float(self.mean[i, j]), float(self.stderr[i, j]), self.n)

    def correlator(self) -> Estimate:
        return Estimate(self.corr_mean, self.corr_stderr, self.n)

    def table(self) -> JointTable:
        return JointTable(np.clip(self.mean, 0.0, 1.0))


def marginal_a(t: JointTable, sigma) -> float:
    """P(sigma) for Alice: row sum of the joint table."""
    return float(t.p[_IDX[sigma], :].sum())


def marginal_b(t: JointTable, tau) -> float:
    """P(tau) for Bob: column sum of the joint table."""
    return float(t.p[:, _IDX[tau]].sum())


def conditional_b_given_a(t: JointTable, sigma, tau) -> float:
    """Q(tau | sigma) = P(sigma, tau) / P(sigma); error at zero marginal."""
    m = marginal_a(t, sigma)
    if m < 1e-12:
        raise UndefinedConditionalError(
            f"conditioning on sigma={sigma:+d} whose marginal is {m}"
        )
    return t.p[_IDX[sigma], _IDX[tau]] / m


def _validate_tables(tb: np.ndarray):
    """Kernel output sanity: entries in [0,1], rows summing to 1."""
    if not np.all(np.isfinite(tb)):
        bad = int(np.argwhere(~np.isfinite(tb).all(axis=(1, 2)))[0][0])
        raise InvalidProbabilityError(f"non-finite kernel entries at lambda index {bad}")
    sums = tb.sum(axis=(1, 2))
    bad_mask = (
        (tb.min(axis=(1, 2)) < -1e-12)
        | (tb.max(axis=(1, 2)) > 1.0 + 1e-12)
        | (np.abs(sums - 1.0) > 1e-9)
    )
    if bad_mask.any():
        i = int(np.argmax(bad_mask))
        raise InvalidProbabilityError(
            f"kernel produced an invalid table at lambda index {i}: {tb[i].tolist()}"
        )


_BLOCK = 1 << 17


def _chunk_moments(model: Model, a, b, n, seed):
    """First/second moments of table entries and of the per-lambda correlator."""
    rng = np.random.default_rng(seed)
    s = np.array([1.0, -1.0])
    tot = np.zeros((2, 2))
    totsq = np.zeros((2, 2))
    dtot = 0.0
    dtotsq = 0.0
    done = 0
    while done < n:
        k = min(_BLOCK, n - done)
        batch = model.sample(a, b, rng, k)
        tb = np.asarray(model.tables(batch, a, b), dtype=float)
        _validate_tables(tb)
        d = np.einsum("i,nij,j->n", s, tb, s)
        tot += tb.sum(axis=0)
        totsq += (tb * tb).sum(axis=0)
        dtot += d.sum()
        dtotsq += (d * d).sum()
        done += k
    return n, tot, totsq, dtot, dtotsq


def estimate_joint(model: Model, a, b, n_samples, seed, workers=1) -> EstimatedTable:
    """Monte Carlo average of the kernel over mu(lambda | a, b).

    Work is split into ``workers`` shards, one spawned child stream per
    shard; shard partial sums merge in shard order, so the result is a
    deterministic function of (seed, workers) and does not depend on
    thread scheduling.
    """
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError("need at least 2 samples for a variance estimate")
    workers = max(1, int(workers))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = ss.spawn(workers)
    base, extra = divmod(n_samples, workers)
    counts = [base + (1 if i < extra else 0) for i in range(workers)]
    jobs = [(c, s) for c, s in zip(counts, seeds) if c > 0]

    if len(jobs) == 1:
        parts = [_chunk_moments(model, a, b, jobs[0][0], jobs[0][1])]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            futs = [pool.submit(_chunk_moments, model, a, b, c, s) for c, s in jobs]
            parts = [f.result() for f in futs]

    n = sum(p[0] for p in parts)
    tot = sum(p[1] for p in parts)
    totsq = sum(p[2] for p in parts)
    dtot = sum(p[3] for p in parts)
    dtotsq = sum(p[4] for p in parts)

    mean = tot / n
    var = np.maximum(0.0, (totsq - n * mean * mean) / (n - 1))
    dmean = dtot / n
    dvar = max(0.0, (dtotsq - n * dmean * dmean) / (n - 1))
    return EstimatedTable(
        mean=mean,
        stderr=np.sqrt(var / n),
        corr_mean=float(dmean),
        corr_stderr=float(np.sqrt(dvar / n)),
        n=n,
    )


def exact_average(model: Model, a, b) -> JointTable:
    """Atom-weighted average of the kernel; exact for finite-atom mu."""
    if not model.is_atomic:
        raise NotAtomicError(f"model {model.name!r} has continuous mu; use estimate_joint")
    atom_set = model.atoms(a, b)
    tb = np.asarray(model.tables(atom_set.batch, a, b), dtype=float)
    _validate_tables(tb)
    return JointTable(np.einsum("n,nij->ij", atom_set.weights, tb))
