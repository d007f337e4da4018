"""The model zoo: concrete hidden-variable models reproducing the singlet.

Each entry specifies a hidden-state distribution mu(lambda | a, b) and a
response kernel whose mu-average is the singlet table for every pair of
settings.  They differ in which classical plausibility hypotheses they
give up:

    brans         Brans (1988): hidden state carries the predetermined
                  outcomes and the settings; mu is tuned per (a, b).
    toner-bacon   Toner & Bacon (2003): shared uniform vector pair plus
                  one bit of communication folded into Bob's response.
    cerf-full     Cerf, Gisin, Massar & Popescu (2005): shared uniform
                  vectors plus the in/out pair of one nonlocal (PR) box
                  kept as part of the hidden state.
    cerf-reduced  Same statistics with the box pair integrated out;
                  mu is settings-free but Bob's conditional remembers
                  Alice's outcome.
    groblacher    Groblacher et al. (2007) kernel, linear in u.a and
                  v.b; any mu with zero-mean u and v on the admissible
                  support reproduces the singlet.
    hall          Hall (2010): deterministic sign responses with a
                  minimally settings-correlated mu over antipodal pairs.
    dilorenzo     Product of Malus-law responses over a four-atom mu
                  concentrated on the measurement axes.

``quantum`` is the degenerate reference model with no hidden state.

Sign convention throughout: sgn(0) = +1.
"""

from __future__ import annotations

import warnings

import numpy as np

from .geometry import geodesic_from, perp, sample_unit_sphere, sgn, unit
from .models import SATISFIED, UNDETERMINED, VIOLATED, AtomSet, HiddenBatch, Model
from .quantum import qm_joint

__all__ = [
    "DegenerateSettingsError",
    "UnknownModelError",
    "ZOO_NAMES",
    "MODEL_NAMES",
    "make_model",
    "parse_model_name",
    "pr_box",
    "toner_bacon_bit",
    "cerf_inputs",
    "cerf_C",
    "hall_density",
    "hall_sample",
]

_SIG = np.array([1.0, -1.0])


class DegenerateSettingsError(ValueError):
    """Settings are collinear where the construction needs them not to be."""


class UnknownModelError(KeyError):
    """Requested model name is not in the registry."""


def _product_tables(fa, fb):
    """(n,2,2) tables from factorized per-side weights fa, fb of shape (n, 2)."""
    return fa[:, :, None] * fb[:, None, :]


# ----------------------------------------------------------------------
# Brans

def _brans_weights(c):
    # weight of predetermined outcome pair (alpha, beta) is (1 - alpha*beta*c)/4
    return np.array([(1.0 - al * be * c) / 4.0 for al, be in _BRANS_PAIRS])


_BRANS_PAIRS = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]


def _brans_atoms(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    alpha = np.array([p[0] for p in _BRANS_PAIRS])
    beta = np.array([p[1] for p in _BRANS_PAIRS])
    batch = HiddenBatch(
        kind="brans", n=4,
        u=np.tile(a, (4, 1)), v=np.tile(b, (4, 1)),
        alpha=alpha, beta=beta,
    )
    return AtomSet(batch, _brans_weights(float(a @ b)))


def _brans_sample(a, b, rng, n=1):
    w = _brans_weights(float(np.dot(a, b)))
    idx = rng.choice(4, size=n, p=w)
    alpha = np.array([p[0] for p in _BRANS_PAIRS])[idx]
    beta = np.array([p[1] for p in _BRANS_PAIRS])[idx]
    return HiddenBatch(
        kind="brans", n=n,
        u=np.tile(np.asarray(a, float), (n, 1)),
        v=np.tile(np.asarray(b, float), (n, 1)),
        alpha=alpha, beta=beta,
    )


def _brans_tables(batch, a, b):
    # outcomes are predetermined: P = (1 + sigma*alpha)(1 + tau*beta)/4
    fa = (1.0 + _SIG[None, :] * batch.alpha[:, None]) / 2.0
    fb = (1.0 + _SIG[None, :] * batch.beta[:, None]) / 2.0
    return _product_tables(fa, fb)


# ----------------------------------------------------------------------
# Toner-Bacon

def toner_bacon_bit(u, v, a):
    """The communicated bit sgn(u.a) * sgn(v.a)."""
    return sgn(np.dot(u, a)) * sgn(np.dot(v, a))


def _tb_sample(a, b, rng, n=1):
    # mu is two independent uniform vectors; settings are ignored
    return HiddenBatch(kind="toner-bacon", n=n,
                       u=sample_unit_sphere(rng, n), v=sample_unit_sphere(rng, n))


def _tb_tables(batch, a, b):
    """Alice outputs -sgn(u.a); Bob outputs sgn(u.b + sgn(u.a)sgn(v.a) v.b).

    The minus sign on Alice's side follows the original protocol; with
    +sgn(u.a) the model's correlator comes out as +a.b instead of -a.b
    and the singlet is not reproduced.
    """
    u, v = batch.u, batch.v
    sua = sgn(u @ a)
    arg = u @ b + sua * sgn(v @ a) * (v @ b)
    st = sgn(arg)
    fa = (1.0 - _SIG[None, :] * sua[:, None]) / 2.0
    fb = (1.0 + _SIG[None, :] * st[:, None]) / 2.0
    return _product_tables(fa, fb)


# ----------------------------------------------------------------------
# PR box

def pr_box(x, y, rng, n=None):
    """Outcome pair (o_a, o_b) of a Popescu-Rohrlich box with inputs x, y.

    o_a is an unbiased coin; o_b = -o_a when x = y = -1 and o_b = o_a
    otherwise, which realizes 4 - 2|o_a + o_b| = (1 - x)(1 - y).
    With ``n=None`` returns a pair of floats, otherwise a pair of
    (n,) arrays.
    """
    if x not in (1, -1) or y not in (1, -1):
        raise ValueError(f"box inputs must be +-1, got x={x}, y={y}")
    m = 1 if n is None else int(n)
    o_a = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    o_b = -o_a if (x == -1 and y == -1) else o_a.copy()
    if n is None:
        return float(o_a[0]), float(o_b[0])
    return o_a, o_b


# ----------------------------------------------------------------------
# Cerf-Gisin-Massar-Popescu

def cerf_inputs(u, v, a, b):
    """Box inputs x = sgn(u.a)sgn(v.a), y = sgn(n+.b)sgn(n-.b), n+- = u +- v.

    Raises for (numerically) antiparallel or parallel u, v, where the
    diagonal directions n+- degenerate.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    npl = u + v
    nmi = u - v
    if u.ndim == 1:
        if np.linalg.norm(npl) < 1e-12 or np.linalg.norm(nmi) < 1e-12:
            raise DegenerateSettingsError("u and v are (anti)parallel; diagonals vanish")
    else:
        bad = (np.linalg.norm(npl, axis=1) < 1e-12) | (np.linalg.norm(nmi, axis=1) < 1e-12)
        if bad.any():
            raise DegenerateSettingsError("u and v are (anti)parallel; diagonals vanish")
    x = sgn(np.sum(u * a, axis=-1)) * sgn(np.sum(v * a, axis=-1))
    y = sgn(np.sum(npl * b, axis=-1)) * sgn(np.sum(nmi * b, axis=-1))
    return x, y


def cerf_C(u, v, a, b):
    """Deviation of the per-lambda correlator from -a.b for the Cerf kernel.

    C(u, v, a, b) = a.b - sgn(u.a) sgn(n+.b) (1 + x + y - x*y)/2 with x, y
    from :func:`cerf_inputs`.  It vanishes identically at b = +-a except
    on the measure-zero set where a is orthogonal to one of u, v, n+, n-,
    and behaves as a.b -+ 1 near b = +-a.
    """
    x, y = cerf_inputs(u, v, a, b)
    k = (1.0 + x + y - x * y) / 2.0
    su = sgn(np.sum(np.asarray(u) * a, axis=-1))
    sp = sgn(np.sum((np.asarray(u) + np.asarray(v)) * b, axis=-1))
    c = float(np.dot(a, b))
    out = c - su * sp * k
    return float(out) if np.ndim(out) == 0 else out


def _cerf_exceptional(batch, i, a):
    """Directions where the b = +-a zeros of cerf_C are not claimed."""
    u = batch.u[i]
    v = batch.v[i]
    dirs = [u, v, unit(u + v), unit(u - v)]
    return any(
        min(np.linalg.norm(a - d), np.linalg.norm(a + d)) < 1e-6 for d in dirs
    )


def _cerf_full_sample(a, b, rng, n=1):
    u = sample_unit_sphere(rng, n)
    v = sample_unit_sphere(rng, n)
    x, y = cerf_inputs(u, v, a, b)
    return HiddenBatch(kind="cerf-full", n=n, u=u, v=v, x=x, y=y)


def _cerf_reduced_sample(a, b, rng, n=1):
    return HiddenBatch(kind="cerf-reduced", n=n,
                       u=sample_unit_sphere(rng, n), v=sample_unit_sphere(rng, n))


def _cerf_kernel_from_xy(u, v, x, y, a, b):
    k = (1.0 + x + y - x * y) / 2.0
    su = sgn(u @ a)
    sp = sgn((u + v) @ b)
    z = (k * su * sp)[:, None, None]
    st = _SIG[:, None] * _SIG[None, :]
    return (1.0 - z * st[None, :, :]) / 4.0


def _cerf_full_tables(batch, a, b):
    # x, y travel with the hidden state; only the sign factors track settings
    return _cerf_kernel_from_xy(batch.u, batch.v, batch.x, batch.y, a, b)


def _cerf_reduced_tables(batch, a, b):
    x, y = cerf_inputs(batch.u, batch.v, a, b)
    return _cerf_kernel_from_xy(batch.u, batch.v, x, y, a, b)


# ----------------------------------------------------------------------
# Groblacher et al. kernel over an explicit six-atom mu

def _grob_atoms(a, b):
    """Six atoms: the four axis pairs plus an orthogonal pair.

    Axis atoms (n, -n) for n in {+-a, +-b} saturate the support
    constraints |u.a +- v.b| <= 1 -+ a.b; the orthogonal pair
    (p, q), (-p, -q) with p _|_ a, q _|_ b sits at the constraint
    centre and makes the kernel non-factorizable there (the kernel is
    the raw singlet table at those atoms).  Both u- and v-moments
    vanish, which is all the kernel needs to average to the singlet.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    p = perp(a)
    q = perp(b)
    us = np.stack([a, -a, b, -b, p, -p])
    vs = np.stack([-a, a, -b, b, q, -q])
    w = np.array([0.125, 0.125, 0.125, 0.125, 0.25, 0.25])
    c = float(a @ b)
    ua = us @ a
    vb = vs @ b
    if not (np.all(np.abs(ua + vb) <= 1.0 - c + 1e-12)
            and np.all(np.abs(ua - vb) <= 1.0 + c + 1e-12)):
        raise ValueError("atom outside the admissible support")
    if max(np.linalg.norm(w @ us), np.linalg.norm(w @ vs)) > 1e-12:
        raise ValueError("atom set has a nonzero first moment")
    return AtomSet(HiddenBatch(kind="groblacher", n=6, u=us, v=vs), w)


def _grob_sample(a, b, rng, n=1):
    atom_set = _grob_atoms(a, b)
    idx = rng.choice(len(atom_set.weights), size=n, p=atom_set.weights)
    return HiddenBatch(kind="groblacher", n=n,
                       u=atom_set.batch.u[idx], v=atom_set.batch.v[idx])


def _grob_tables(batch, a, b):
    c = float(np.dot(a, b))
    ua = batch.u @ a
    vb = batch.v @ b
    st = _SIG[:, None] * _SIG[None, :]
    return (1.0
            + ua[:, None, None] * _SIG[None, :, None]
            + vb[:, None, None] * _SIG[None, None, :]
            - c * st[None, :, :]) / 4.0


# ----------------------------------------------------------------------
# Hall

def hall_density(u, a, b):
    """mu density over u (with v = -u implied): (1 - f) / (8 arccos f).

    f = sgn(u.a) sgn(v.b) a.b.  The density is constant on each of the
    two regions sgn(u.a)sgn(u.b) = +-1; at a.b = 0 it is the uniform
    1/(4 pi) everywhere.
    """
    c = float(np.dot(a, b))
    if abs(c) >= 1.0 - 1e-12:
        raise DegenerateSettingsError("collinear settings: density degenerates")
    u = np.asarray(u, float)
    f = sgn(np.sum(u * a, axis=-1)) * sgn(np.sum(-u * b, axis=-1)) * c
    out = (1.0 - f) / (8.0 * np.arccos(f))
    return float(out) if np.ndim(out) == 0 else out


def hall_sample(a, b, rng, n=1):
    """Draw antipodal pairs (u, -u) from the Hall distribution.

    Picks the sign region s = sgn(u.a)sgn(u.b) with probability
    (1 + s a.b)/2, then samples u uniformly within the region by
    rejection; the density is constant per region so this is exact.
    Collinear settings are perturbed by 1e-9 along a fixed tangent
    (with a warning) since the region construction degenerates there.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = float(a @ b)
    if abs(c) >= 1.0 - 1e-12:
        warnings.warn("hall_sample: collinear settings perturbed by 1e-9", stacklevel=2)
        b = geodesic_from(b, perp(b), 1e-9)
        c = float(a @ b)
    want = np.where(rng.random(n) < (1.0 + c) / 2.0, 1.0, -1.0)
    u = np.empty((n, 3))
    for s_val in (1.0, -1.0):
        slots = np.flatnonzero(want == s_val)
        filled = 0
        rounds = 0
        while filled < len(slots):
            m = max(4096, 2 * (len(slots) - filled))
            draw = sample_unit_sphere(rng, m)
            ok = draw[sgn(draw @ a) * sgn(draw @ b) == s_val]
            take = min(len(ok), len(slots) - filled)
            if take:
                u[slots[filled:filled + take]] = ok[:take]
                filled += take
            rounds += 1
            if rounds > 10000:
                raise RuntimeError("hall_sample: rejection failed to terminate")
    return HiddenBatch(kind="hall", n=n, u=u, v=-u)


def _hall_sample(a, b, rng, n=1):
    return hall_sample(a, b, rng, n)


def _hall_tables(batch, a, b):
    # deterministic sign responses on both sides
    fa = (1.0 + _SIG[None, :] * sgn(batch.u @ a)[:, None]) / 2.0
    fb = (1.0 + _SIG[None, :] * sgn(batch.v @ b)[:, None]) / 2.0
    return _product_tables(fa, fb)


# ----------------------------------------------------------------------
# Di Lorenzo four-atom model

def _dilorenzo_atoms_for(wa, wb):
    def atoms(a, b):
        a_ = np.asarray(a, float)
        b_ = np.asarray(b, float)
        us = np.stack([a_, -a_, b_, -b_])
        return AtomSet(
            HiddenBatch(kind="dilorenzo", n=4, u=us, v=-us),
            np.array([wa, wa, wb, wb]),
        )

    return atoms


def _dilorenzo_sample_for(wa, wb):
    def sample(a, b, rng, n=1):
        atom_set = _dilorenzo_atoms_for(wa, wb)(a, b)
        idx = rng.choice(4, size=n, p=atom_set.weights)
        return HiddenBatch(kind="dilorenzo", n=n,
                           u=atom_set.batch.u[idx], v=atom_set.batch.v[idx])

    return sample


def _dilorenzo_tables(batch, a, b):
    # Malus-law response on each side: P = (1 + sigma u.a)(1 + tau v.b)/4
    fa = (1.0 + _SIG[None, :] * (batch.u @ a)[:, None]) / 2.0
    fb = (1.0 + _SIG[None, :] * (batch.v @ b)[:, None]) / 2.0
    return _product_tables(fa, fb)


# ----------------------------------------------------------------------
# quantum reference as a degenerate model

def _qm_sample(a, b, rng, n=1):
    return HiddenBatch(kind="quantum", n=n)


def _qm_tables(batch, a, b):
    return np.tile(qm_joint(a, b).p, (batch.n, 1, 1))


def _qm_atoms(a, b):
    return AtomSet(HiddenBatch(kind="quantum", n=1), np.array([1.0]))


# ----------------------------------------------------------------------
# registry

_PROFILES = {
    "brans": dict(uc=VIOLATED, si_a=SATISFIED, si_b=SATISFIED, rc=SATISFIED,
                  malus_a=VIOLATED, malus_b=VIOLATED),
    "toner-bacon": dict(uc=SATISFIED, si_a=SATISFIED, si_b=VIOLATED, rc=SATISFIED,
                        malus_a=VIOLATED, malus_b=VIOLATED),
    "cerf-full": dict(uc=VIOLATED, si_a=SATISFIED, si_b=SATISFIED, rc=VIOLATED,
                      malus_a=VIOLATED, malus_b=VIOLATED),
    "cerf-reduced": dict(uc=SATISFIED, si_a=SATISFIED, si_b=SATISFIED, rc=VIOLATED,
                         malus_a=VIOLATED, malus_b=VIOLATED),
    "groblacher": dict(uc=VIOLATED, si_a=SATISFIED, si_b=SATISFIED, rc=VIOLATED,
                       malus_a=SATISFIED, malus_b=SATISFIED),
    "hall": dict(uc=VIOLATED, si_a=SATISFIED, si_b=SATISFIED, rc=SATISFIED,
                 malus_a=VIOLATED, malus_b=VIOLATED),
    "dilorenzo": dict(uc=VIOLATED, si_a=SATISFIED, si_b=SATISFIED, rc=SATISFIED,
                      malus_a=SATISFIED, malus_b=SATISFIED),
    "quantum": dict(uc=SATISFIED, si_a=SATISFIED, si_b=SATISFIED, rc=VIOLATED,
                    malus_a=UNDETERMINED, malus_b=UNDETERMINED),
}

ZOO_NAMES = (
    "brans",
    "toner-bacon",
    "cerf-full",
    "cerf-reduced",
    "groblacher",
    "hall",
    "dilorenzo",
)

MODEL_NAMES = ZOO_NAMES + ("quantum",)


def parse_model_name(name):
    """Split 'kind' or 'kind:param,param' into (kind, params dict)."""
    if ":" not in name:
        return name, {}
    kind, _, rest = name.partition(":")
    if kind != "dilorenzo":
        raise UnknownModelError(f"model {kind!r} takes no inline parameters")
    try:
        wa_s, wb_s = rest.split(",")
        return kind, {"wa": float(wa_s), "wb": float(wb_s)}
    except ValueError:
        raise UnknownModelError(
            f"bad dilorenzo parameters {rest!r}; expected 'dilorenzo:wa,wb'"
        ) from None


def make_model(name, **params) -> Model:
    """Build a zoo model by canonical name.

    ``dilorenzo`` accepts weights ``wa``, ``wb`` (also inline as
    ``dilorenzo:wa,wb``) for the atom pairs at +-a and +-b; the pairs
    must carry equal weight and satisfy 2*wa + 2*wb = 1, otherwise the
    marginals acquire a spurious outcome bias and the singlet average
    is lost.
    """
    kind, inline = parse_model_name(name)
    inline.update(params)
    params = inline
    if kind != "dilorenzo" and params:
        raise UnknownModelError(f"model {kind!r} takes no parameters, got {sorted(params)}")

    if kind == "brans":
        return Model("brans", _brans_sample, _brans_tables,
                     _PROFILES["brans"], atoms=_brans_atoms)
    if kind == "toner-bacon":
        return Model("toner-bacon", _tb_sample, _tb_tables, _PROFILES["toner-bacon"])
    if kind == "cerf-full":
        return Model("cerf-full", _cerf_full_sample, _cerf_full_tables,
                     _PROFILES["cerf-full"], exceptional=_cerf_exceptional)
    if kind == "cerf-reduced":
        return Model("cerf-reduced", _cerf_reduced_sample, _cerf_reduced_tables,
                     _PROFILES["cerf-reduced"], exceptional=_cerf_exceptional)
    if kind == "groblacher":
        return Model("groblacher", _grob_sample, _grob_tables,
                     _PROFILES["groblacher"], atoms=_grob_atoms)
    if kind == "hall":
        return Model("hall", _hall_sample, _hall_tables, _PROFILES["hall"])
    if kind == "dilorenzo":
        wa = float(params.pop("wa", 0.25))
        wb = float(params.pop("wb", 0.25))
        if params:
            raise UnknownModelError(f"unknown dilorenzo parameters {sorted(params)}")
        if wa < 0 or wb < 0 or abs(2 * wa + 2 * wb - 1.0) > 1e-12:
            raise ValueError(f"weights must be nonnegative with 2*wa + 2*wb = 1, "
                             f"got wa={wa}, wb={wb}")
        display = "dilorenzo" if (wa, wb) == (0.25, 0.25) else f"dilorenzo:{wa:g},{wb:g}"
        return Model(display, _dilorenzo_sample_for(wa, wb), _dilorenzo_tables,
                     _PROFILES["dilorenzo"], atoms=_dilorenzo_atoms_for(wa, wb),
                     params={"wa": wa, "wb": wb})
    if kind == "quantum":
        return Model("quantum", _qm_sample, _qm_tables, _PROFILES["quantum"],
                     atoms=_qm_atoms)
    raise UnknownModelError(
        f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}"
    )
