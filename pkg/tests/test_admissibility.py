import numpy as np
import pytest

from singletzoo.admissibility import (
    InsufficientDataError,
    admissible,
    check_pac_zero,
    correlator_D,
    estimate_frobenius_indices,
    extract_C,
    extract_C_mean,
    frobenius_for_model,
    model_C_function,
    pac_zero_for_model,
)
from singletzoo.geometry import geodesic_from, perp, sample_unit_sphere
from singletzoo.models import HiddenBatch
from singletzoo.quantum import qm_joint
from singletzoo.zoo import ZOO_NAMES, make_model

A0 = np.array([0.0, 0.0, 1.0])


def test_correlator_D_inverts_table():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b = sample_unit_sphere(rng), sample_unit_sphere(rng)
        assert correlator_D(qm_joint(a, b)) == pytest.approx(-float(a @ b), abs=1e-14)
    assert correlator_D(np.full((2, 2), 0.25)) == 0.0
    assert correlator_D(np.array([[0.5, 0.0], [0.0, 0.5]])) == 1.0


def test_extract_C_cerf_reduced():
    m = make_model("cerf-reduced")
    rng = np.random.default_rng(1)
    lam = m.sample(A0, A0, rng, 400)
    c_par = extract_C(m, lam, A0, A0)
    assert np.abs(c_par).max() < 1e-12
    # one geodesic step off the pole, C sits on one of two branches:
    # -eps on the branch attached to the limit, 2 - eps on the flipped one
    eps = 1e-3
    b = geodesic_from(A0, perp(A0), eps)
    vals = extract_C(m, m.sample(A0, b, rng, 2000), A0, b)
    on_limit = np.isclose(vals, -eps, atol=1e-9)
    flipped = np.isclose(vals, 2.0 - eps, atol=1e-9)
    assert np.all(on_limit | flipped)
    assert on_limit.mean() > 0.9


def test_extract_C_scalar_for_single_lambda():
    m = make_model("toner-bacon")
    lam = m.sample(A0, A0, np.random.default_rng(2), 1)
    assert isinstance(extract_C(m, lam, A0, A0), float)


def test_extract_C_mean_vanishes():
    rng = np.random.default_rng(3)
    for name in ("toner-bacon", "cerf-reduced"):
        a, b = sample_unit_sphere(rng), sample_unit_sphere(rng)
        est = extract_C_mean(make_model(name), a, b, n_samples=200000, seed=4)
        assert abs(est.mean) < 4 * est.stderr + 1e-9


# ----------------------------------------------------------------------
# perfect-(anti)correlation zeros

def test_check_pac_zero_catches_broken_C():
    def Cfn(lam, a, b):
        return np.full(lam.n, float(np.dot(a, b)))

    def sampler(a, b, rng, n):
        return HiddenBatch(kind="synthetic", n=n, u=sample_unit_sphere(rng, n))

    report = check_pac_zero(Cfn, sampler, n_lambda=20, n_dirs=5, seed=0)
    assert not report.passed
    assert report.max_parallel == pytest.approx(1.0)
    assert report.witness is not None
    assert report.witness["abs_C"] == pytest.approx(1.0)


def test_pac_zero_all_zoo_models():
    for name in ZOO_NAMES:
        report = pac_zero_for_model(make_model(name), n_lambda=100, n_dirs=8, seed=5)
        assert report.passed, (name, report.witness)
        assert max(report.max_parallel, report.max_antiparallel) < 1e-12
        assert report.n_evaluated > 0


def test_pac_zero_dilorenzo_custom_weights():
    report = pac_zero_for_model(make_model("dilorenzo:0.35,0.15"), seed=6)
    assert report.passed
    # zero-weight atoms would be outside the support; here none are
    assert report.n_excluded == 0


# ----------------------------------------------------------------------
# Frobenius indices

def _planted_sampler(a, b, rng, n):
    return HiddenBatch(kind="synthetic", n=n, alpha=rng.uniform(-1.0, 1.0, n))


def _planted_C(sp, sm):
    def Cfn(lam, a, b):
        c = float(np.dot(a, b))
        g = 0.5 + 0.25 * lam.alpha  # positive, lambda-dependent
        return (1.0 + c) ** sp * (1.0 - c) ** sm * g

    return Cfn


@pytest.mark.parametrize("sp,sm", [(1.0, 1.5), (2.0, 3.0)])
def test_frobenius_recovers_planted_exponents(sp, sm):
    est = estimate_frobenius_indices(_planted_C(sp, sm), _planted_sampler,
                                     n_lambda=50, seed=7)
    assert abs(est.s_plus.mean - sp) < 0.1
    assert abs(est.s_minus.mean - sm) < 0.1
    assert est.s_plus.stderr < 0.05
    assert est.s_minus.n == 50


def test_frobenius_truncates_at_sign_change():
    # the branch away from the limit has a different (shallow) decay and
    # the opposite sign; an untruncated |C| fit would blend the two
    def Cfn(lam, a, b):
        c = float(np.dot(a, b))
        eps_minus = 1.0 - c
        eps_plus = 1.0 + c
        if eps_minus < eps_plus:  # approaching b = a
            return np.where(eps_minus < 1e-3, eps_minus, -eps_minus**0.3
                            ) * np.ones(lam.n)
        return eps_plus * np.ones(lam.n)

    est = estimate_frobenius_indices(Cfn, _planted_sampler, n_lambda=10, seed=8)
    assert est.s_minus.mean == pytest.approx(1.0, abs=1e-6)
    assert est.s_plus.mean == pytest.approx(1.0, abs=1e-6)


def test_frobenius_cerf_reduced_is_one_one():
    fe = frobenius_for_model(make_model("cerf-reduced"), n_lambda=100, seed=9)
    assert 0.9 < fe.s_minus.mean < 1.1
    assert 0.9 < fe.s_plus.mean < 1.1
    # the underlying decay is exactly linear, so the fit is essentially exact
    assert fe.details["rms_residual_minus"] < 1e-8


def test_frobenius_insufficient_data_when_C_vanishes():
    def Cfn(lam, a, b):
        return np.zeros(lam.n)

    with pytest.raises(InsufficientDataError):
        estimate_frobenius_indices(Cfn, _planted_sampler, n_lambda=10, seed=10)


def test_frobenius_groblacher_has_no_exponent():
    # the kernel is linear in u.a and v.b with D = -a.b exactly, so C
    # vanishes identically and no boundary exponent exists
    with pytest.raises(InsufficientDataError):
        frobenius_for_model(make_model("groblacher"), n_lambda=20, seed=11)


def test_model_C_function_matches_extract():
    m = make_model("hall")
    rng = np.random.default_rng(12)
    a, b = sample_unit_sphere(rng), sample_unit_sphere(rng)
    lam = m.sample(a, b, rng, 30)
    assert np.array_equal(model_C_function(m)(lam, a, b), extract_C(m, lam, a, b))


# ----------------------------------------------------------------------
# admissibility of candidate G

def _signs_sampler(rng, n):
    half = n // 2
    alpha = np.concatenate([np.ones(half), -np.ones(n - half)])
    return HiddenBatch(kind="synthetic", n=n, alpha=alpha)


def _const_G(magnitude):
    def Gfn(lam, a, b):
        return magnitude * lam.alpha

    return Gfn


def test_admissible_none_G_is_trivial():
    report = admissible(None, _signs_sampler, 1.0, 1.0)
    assert report.admissible
    assert report.reason() == "admissible"


def test_admissible_accepts_half_magnitude():
    report = admissible(_const_G(0.5), _signs_sampler, 1.0, 1.0,
                        n_lambda=100, n_settings=30, seed=13)
    assert report.admissible, report.reason()
    assert report.checks["positivity_margin"] <= 0.0 + 1e-12


def test_admissible_rejects_unit_magnitude():
    # |G| = 1 with s+- = 1 pushes |D| to 1.25 at a.b = -+1/2: a negative
    # probability of -1/16 even though C vanishes at both boundaries
    report = admissible(_const_G(1.0), _signs_sampler, 1.0, 1.0,
                        n_lambda=100, n_settings=30, seed=14)
    assert not report.admissible
    rules = [f["rule"] for f in report.failures]
    assert rules == ["ii"]
    w = report.failures[0]["witness"]
    assert w["probability"] == pytest.approx(-0.0625, abs=1e-9)
    assert abs(w["c"]) == pytest.approx(0.5, abs=1e-9)


def test_admissible_rejects_small_exponent():
    report = admissible(_const_G(0.5), _signs_sampler, 1.0, 0.5,
                        n_lambda=100, n_settings=30, seed=15)
    assert not report.admissible
    rules = [f["rule"] for f in report.failures]
    assert "i" in rules
    assert "ii" in rules  # sub-linear decay also shows up as negative probability
    for f in report.failures:
        if f["rule"] == "ii":
            assert f["witness"]["probability"] < 0.0


def test_admissible_small_exponent_boundary_witness():
    # with a small |G| the only positivity violations sit right against
    # the eps-boundary, where (1-c)^0.5 dominates the linear margin
    report = admissible(_const_G(0.1), _signs_sampler, 1.0, 0.5,
                        n_lambda=100, n_settings=30, seed=15)
    assert not report.admissible
    for f in report.failures:
        if f["rule"] == "ii":
            assert f["witness"]["probability"] < 0.0
            assert f["witness"]["c"] > 0.98


def test_admissible_exponent_must_be_positive():
    with pytest.raises(ValueError):
        admissible(_const_G(0.5), _signs_sampler, 0.0, 1.0)
    with pytest.raises(ValueError):
        admissible(_const_G(0.5), _signs_sampler, 1.0, -2.0)


def test_admissible_rejects_biased_G():
    def Gfn(lam, a, b):
        return 0.2 + 0.1 * lam.alpha

    report = admissible(Gfn, _signs_sampler, 1.0, 1.0,
                        n_lambda=100, n_settings=30, seed=16)
    assert not report.admissible
    assert [f["rule"] for f in report.failures] == ["iii"]
    assert report.failures[0]["witness"]["mean"] == pytest.approx(0.2, abs=1e-12)


def _vanishing_G(lam, a, b):
    # zero-mean over lambda, small enough to keep |D| <= 1 everywhere,
    # but vanishing at the (anti)parallel boundary
    c = float(np.dot(a, b))
    return 0.25 * lam.alpha * (1.0 - c * c)


def test_admissible_rejects_G_vanishing_at_boundary():
    report = admissible(_vanishing_G, _signs_sampler, 1.0, 1.0,
                        n_lambda=100, n_settings=30, seed=17)
    assert not report.admissible
    assert [f["rule"] for f in report.failures] == ["iv"]
    assert report.failures[0]["witness"]["G"] == 0.0


def test_admissible_exceptional_set_excludes_boundary():
    report = admissible(_vanishing_G, _signs_sampler, 1.0, 1.0,
                        n_lambda=100, n_settings=30, seed=18,
                        exceptional=lambda lam, i, a: True)
    assert report.admissible, report.reason()
    assert report.checks["boundary_lambdas_excluded"] > 0


def test_admissible_report_reason_lists_rules():
    report = admissible(_const_G(0.5), _signs_sampler, 0.5, 0.5,
                        n_lambda=50, n_settings=20, seed=19)
    assert not report.admissible
    assert "rule i" in report.reason()
