import numpy as np
import pytest
import scipy.stats

from singletzoo.audit import (
    AllSkippedError,
    audit_malus,
    audit_rc,
    audit_si,
    audit_uc,
    check_trivial_marginals,
    full_audit,
    ks_2samp,
    ks_critical,
)
from singletzoo.models import SATISFIED, UNDETERMINED, VIOLATED
from singletzoo.zoo import make_model


def test_ks_2samp_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(10):
        x1 = rng.normal(size=rng.integers(50, 400))
        x2 = rng.normal(loc=rng.uniform(-1, 1), size=rng.integers(50, 400))
        ours = ks_2samp(x1, x2)
        ref = scipy.stats.ks_2samp(x1, x2, method="asymp").statistic
        assert ours == pytest.approx(ref, abs=1e-12)


def test_ks_2samp_identical_samples():
    x = np.arange(100.0)
    assert ks_2samp(x, x) == 0.0
    assert ks_2samp(x, x + 1000.0) == 1.0


def test_ks_critical_value():
    # c(alpha) = sqrt(-ln(alpha/2)/2) scaled by sqrt((n1+n2)/(n1 n2))
    got = ks_critical(0.05, 100, 100)
    assert got == pytest.approx(1.3581, abs=1e-4) or got == pytest.approx(
        np.sqrt(-np.log(0.025) / 2) * np.sqrt(0.02), abs=1e-12)
    assert ks_critical(1e-3, 10**4, 10**4) < ks_critical(1e-3, 100, 100)


# ----------------------------------------------------------------------
# setting independence

def test_audit_si_toner_bacon():
    # Bob's response uses Alice's setting; Alice's does not use Bob's
    si_a, si_b = audit_si(make_model("toner-bacon"), seed=1)
    assert si_a.verdict == SATISFIED
    assert si_b.verdict == VIOLATED
    assert si_b.max_deviation > 0.5
    assert si_b.witness is not None
    assert "remote_low" in si_b.witness


def test_audit_si_cerf_reduced_violates_nothing():
    si_a, si_b = audit_si(make_model("cerf-reduced"), seed=2)
    assert si_a.verdict == SATISFIED
    assert si_b.verdict == SATISFIED
    assert si_a.max_deviation <= 1e-9


def test_audit_si_dilorenzo():
    si_a, si_b = audit_si(make_model("dilorenzo"), seed=3)
    assert (si_a.verdict, si_b.verdict) == (SATISFIED, SATISFIED)


# ----------------------------------------------------------------------
# reducibility of correlations

def test_audit_rc_cerf_reduced_violated():
    # Bob's conditional remembers Alice's outcome: Q flips by O(1)
    finding = audit_rc(make_model("cerf-reduced"), seed=4)
    assert finding.verdict == VIOLATED
    assert finding.max_deviation > 0.9
    assert finding.witness is not None


def test_audit_rc_hall_satisfied_with_skips():
    # deterministic responses: only one sigma branch has support, which
    # is compared against Bob's marginal; the other branch is skipped
    finding = audit_rc(make_model("hall"), seed=5)
    assert finding.verdict == SATISFIED
    assert finding.details["skipped_branches"] > 0
    assert finding.details["evaluated"] > 0


def test_audit_rc_brans_satisfied():
    finding = audit_rc(make_model("brans"), seed=6)
    assert finding.verdict == SATISFIED
    assert finding.max_deviation <= 1e-9


def test_audit_rc_all_skipped():
    with pytest.raises(AllSkippedError):
        audit_rc(make_model("hall"), n_settings=0, seed=0)


# ----------------------------------------------------------------------
# uncorrelated choice

def test_audit_uc_brans_caught_by_atoms():
    finding = audit_uc(make_model("brans"), seed=7)
    assert finding.verdict == VIOLATED
    assert finding.witness["layer"] == "atoms"
    assert finding.witness["field"] == "weights"


def test_audit_uc_dilorenzo_caught_by_atoms():
    finding = audit_uc(make_model("dilorenzo"), seed=8)
    assert finding.verdict == VIOLATED
    assert finding.witness["layer"] == "atoms"


def test_audit_uc_cerf_full_needs_stream_replay():
    # mu's one-dimensional marginals are settings-independent, so the
    # KS layer is blind; replaying the same stream under two setting
    # pairs exposes the dependence through the carried box pair
    finding = audit_uc(make_model("cerf-full"), seed=9)
    assert finding.verdict == VIOLATED
    assert finding.witness["layer"] == "stream-replay"
    assert finding.witness["field"] in ("x", "y")


def test_audit_uc_hall_violated():
    finding = audit_uc(make_model("hall"), seed=10)
    assert finding.verdict == VIOLATED


def test_audit_uc_settings_free_models_pass():
    for name in ("toner-bacon", "cerf-reduced", "quantum"):
        finding = audit_uc(make_model(name), seed=11)
        assert finding.verdict == SATISFIED, name
        assert finding.max_deviation <= finding.details["ks_critical"]


def test_audit_uc_needs_enough_samples():
    with pytest.raises(ValueError):
        audit_uc(make_model("toner-bacon"), n_samples=50)


# ----------------------------------------------------------------------
# Malus marginals

def test_audit_malus_verdicts():
    ma, mb = audit_malus(make_model("groblacher"), seed=12)
    assert (ma.verdict, mb.verdict) == (SATISFIED, SATISFIED)
    ma, mb = audit_malus(make_model("hall"), seed=13)
    assert (ma.verdict, mb.verdict) == (VIOLATED, VIOLATED)
    assert ma.max_deviation > 0.4
    ma, mb = audit_malus(make_model("quantum"), seed=14)
    assert (ma.verdict, mb.verdict) == (UNDETERMINED, UNDETERMINED)


def test_audit_malus_dilorenzo():
    ma, mb = audit_malus(make_model("dilorenzo:0.1,0.4"), seed=15)
    assert (ma.verdict, mb.verdict) == (SATISFIED, SATISFIED)


# ----------------------------------------------------------------------
# trivial marginals and the full profile

def test_trivial_marginals_cerf_reduced():
    finding = check_trivial_marginals(make_model("cerf-reduced"), seed=16)
    assert finding.verdict == SATISFIED
    assert finding.max_deviation < 1e-12


def test_trivial_marginals_hall():
    finding = check_trivial_marginals(make_model("hall"), seed=17)
    assert finding.verdict == VIOLATED
    assert finding.max_deviation == pytest.approx(0.5, abs=1e-12)
    assert finding.witness["side"] in ("A", "B")


def test_full_audit_matches_declared():
    for name in ("toner-bacon", "cerf-full", "groblacher"):
        m = make_model(name)
        profile = full_audit(m, seed=0)
        assert profile.matches(m.declared_profile), (name, profile.verdicts())


def test_full_audit_deterministic():
    m = make_model("hall")
    p1 = full_audit(m, seed=42)
    p2 = full_audit(m, seed=42)
    assert p1.verdicts() == p2.verdicts()
    assert p1.rc.max_deviation == p2.rc.max_deviation
    assert p1.uc.max_deviation == p2.uc.max_deviation
