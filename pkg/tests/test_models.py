import numpy as np
import pytest

from singletzoo.geometry import sample_unit_sphere
from singletzoo.models import (
    AtomSet,
    HiddenBatch,
    Model,
    NotAtomicError,
    UndefinedConditionalError,
    conditional_b_given_a,
    estimate_joint,
    exact_average,
    marginal_a,
    marginal_b,
)
from singletzoo.quantum import InvalidProbabilityError, JointTable, qm_joint
from singletzoo.zoo import make_model


def test_hidden_batch_fields_and_item():
    b = HiddenBatch(kind="x", n=3,
                    u=np.eye(3), alpha=np.array([1.0, -1.0, 1.0]))
    f = b.fields()
    assert set(f) == {"u", "alpha"}
    one = b.item(1)
    assert one.n == 1
    assert np.allclose(one.u, [[0.0, 1.0, 0.0]])
    assert one.alpha.tolist() == [-1.0]


def test_hidden_batch_describe_is_plain_python():
    b = HiddenBatch(kind="x", n=2, u=np.eye(3)[:2], alpha=np.array([1.0, -1.0]))
    d = b.describe(0)
    assert d == {"u": [1.0, 0.0, 0.0], "alpha": 1.0}
    assert all(isinstance(v, (list, float)) for v in d.values())


def test_atom_set_validation():
    batch = HiddenBatch(kind="x", n=2, u=np.eye(3)[:2])
    AtomSet(batch, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        AtomSet(batch, np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        AtomSet(batch, np.array([1.2, -0.2]))
    with pytest.raises(ValueError):
        AtomSet(batch, np.array([1.0]))


def test_marginals_and_conditional():
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([1.0, 0.0, 0.0])
    t = qm_joint(a, b)
    assert marginal_a(t, 1) == pytest.approx(0.5, abs=1e-15)
    assert marginal_b(t, -1) == pytest.approx(0.5, abs=1e-15)
    # orthogonal settings: conditionals are flat
    assert conditional_b_given_a(t, 1, 1) == pytest.approx(0.5)
    # b = a: perfect anticorrelation
    t2 = qm_joint(a, a)
    assert conditional_b_given_a(t2, 1, -1) == pytest.approx(1.0)
    assert conditional_b_given_a(t2, 1, 1) == pytest.approx(0.0)


def test_conditional_at_half_overlap():
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([np.sqrt(3) / 2, 0.0, 0.5])  # a.b = 0.5
    t = qm_joint(a, b)
    assert conditional_b_given_a(t, 1, 1) == pytest.approx(0.25, abs=1e-12)
    assert conditional_b_given_a(t, 1, -1) == pytest.approx(0.75, abs=1e-12)


def test_conditional_undefined_at_zero_marginal():
    t = JointTable(np.array([[0.0, 0.0], [0.5, 0.5]]))
    with pytest.raises(UndefinedConditionalError):
        conditional_b_given_a(t, 1, 1)


def test_bayes_consistency():
    rng = np.random.default_rng(2)
    for _ in range(20):
        t = qm_joint(sample_unit_sphere(rng), sample_unit_sphere(rng))
        for sigma in (1, -1):
            m = marginal_a(t, sigma)
            for tau in (1, -1):
                q = conditional_b_given_a(t, sigma, tau)
                assert m * q == pytest.approx(t.prob(sigma, tau), abs=1e-12)


def test_estimate_joint_bitwise_reproducible():
    m = make_model("toner-bacon")
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([1.0, 0.0, 0.0])
    e1 = estimate_joint(m, a, b, 20000, seed=9, workers=3)
    e2 = estimate_joint(m, a, b, 20000, seed=9, workers=3)
    assert np.array_equal(e1.mean, e2.mean)
    assert np.array_equal(e1.stderr, e2.stderr)
    assert e1.corr_mean == e2.corr_mean
    # a different worker count is a different (but still deterministic) stream
    e3 = estimate_joint(m, a, b, 20000, seed=9, workers=2)
    assert not np.array_equal(e1.mean, e3.mean)


def test_estimate_joint_accepts_seed_sequence():
    m = make_model("cerf-reduced")
    a = np.array([0.0, 1.0, 0.0])
    b = np.array([0.0, 0.0, 1.0])
    ss = np.random.SeedSequence(77)
    e1 = estimate_joint(m, a, b, 5000, seed=ss)
    e2 = estimate_joint(m, a, b, 5000, seed=np.random.SeedSequence(77))
    assert np.array_equal(e1.mean, e2.mean)


def test_estimate_joint_needs_two_samples():
    m = make_model("quantum")
    a = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        estimate_joint(m, a, a, 1, seed=0)


def test_estimate_joint_matches_singlet():
    rng = np.random.default_rng(31)
    a = sample_unit_sphere(rng)
    b = sample_unit_sphere(rng)
    ref = qm_joint(a, b)
    for name in ("toner-bacon", "hall"):
        est = estimate_joint(make_model(name), a, b, 100000, seed=5)
        for sigma in (1, -1):
            for tau in (1, -1):
                e = est.estimate(sigma, tau)
                assert abs(e.mean - ref.prob(sigma, tau)) < 4 * e.stderr + 1e-9


def test_estimate_joint_hall_anticorrelation():
    m = make_model("hall")
    a = np.array([0.0, 0.0, 1.0])
    with pytest.warns(UserWarning):
        est = estimate_joint(m, a, a.copy(), 20000, seed=3)
    e = est.estimate(1, 1)
    assert e.mean <= 4 * e.stderr + 1e-9


def test_estimate_joint_tb_orthogonal_correlator():
    m = make_model("toner-bacon")
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 0.0, 1.0])
    c = estimate_joint(m, a, b, 100000, seed=8).correlator()
    assert abs(c.mean) < 4 * c.stderr


def test_exact_average_atomic_models():
    rng = np.random.default_rng(17)
    for name in ("brans", "groblacher", "dilorenzo"):
        m = make_model(name)
        for _ in range(10):
            a = sample_unit_sphere(rng)
            b = sample_unit_sphere(rng)
            got = exact_average(m, a, b)
            assert np.abs(got.p - qm_joint(a, b).p).max() < 1e-12


def test_exact_average_brans_half_overlap():
    m = make_model("brans")
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([np.sqrt(3) / 2, 0.0, 0.5])
    assert exact_average(m, a, b).prob(1, 1) == pytest.approx(0.125, abs=1e-15)


def test_exact_average_rejects_continuous_mu():
    with pytest.raises(NotAtomicError):
        exact_average(make_model("toner-bacon"),
                      np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))


def test_model_kernel_single_lambda():
    m = make_model("dilorenzo")
    a = np.array([0.0, 0.0, 1.0])
    b = np.array([1.0, 0.0, 0.0])
    lam = m.sample(a, b, np.random.default_rng(0), 1)
    t = m.kernel(lam, a, b)
    assert isinstance(t, JointTable)
    assert t.p.sum() == pytest.approx(1.0, abs=1e-12)


def test_invalid_kernel_is_caught():
    def bad_tables(batch, a, b):
        out = np.full((batch.n, 2, 2), 0.25)
        out[0] = [[0.7, 0.7], [-0.2, -0.2]]  # sums to 1 but negative entries
        return out

    def bad_sample(a, b, rng, n=1):
        return HiddenBatch(kind="bad", n=n)

    m = Model("bad", bad_sample, bad_tables, {})
    a = np.array([0.0, 0.0, 1.0])
    with pytest.raises(InvalidProbabilityError):
        estimate_joint(m, a, a, 100, seed=0)
