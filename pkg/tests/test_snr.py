import numpy as np
import pytest

from hullcert import snr
from hullcert.classes import HOLDS, ClassSpec
from hullcert.errors import NotCertified, NotMember, PreconditionError, UnisignedInput
from hullcert.hull import (
    IntervalHull,
    certify_n1,
    certify_n2,
    samples,
    signature,
    test_matrix_iz,
)
from hullcert.snr import (
    ClaimKind,
    SignPatternClaim,
    check_conclusion,
    find_reversal,
    lemma_sign_vector,
    pointwise_bound_check,
    uniform_positivity_index,
    verify_snr_theorem,
)
from matrix_factory import fit, random_hull, random_n1, random_n2, random_p

N2_OK = IntervalHull([[-1, -3], [-3, -1]], [[-1.1, -2.9], [-2.9, -1.1]])


def claim(kind, J=None):
    return SignPatternClaim(ClaimKind(kind), J)


def test_find_reversal_examples():
    assert find_reversal(np.eye(2), 10_000, 0) is None
    w = find_reversal([[-1, -3], [-3, -1]], 1000, 0)
    assert w is not None and np.all(w.products <= 0) and np.any(w.x != 0)
    w = find_reversal([[1, 2], [2, 1]], 1000, 0)
    assert w is not None and np.all(w.products <= 0)
    assert w.products == pytest.approx(w.x * (np.array([[1, 2], [2, 1]]) @ w.x))


def test_find_reversal_deterministic():
    M = [[1.0, 2.0], [2.0, 1.0]]
    a, b = find_reversal(M, 5000, 9), find_reversal(M, 5000, 9)
    assert np.array_equal(a.x, b.x)


def test_check_conclusion_examples():
    assert check_conclusion([1, 2, 3], claim("Unisigned"))
    assert not check_conclusion([1, -1], claim("Unisigned"))
    assert check_conclusion([1, -2], claim("StrictJOrthant", (0,)))
    assert check_conclusion([-1, 2], claim("StrictJOrthant", (0,)))
    assert not check_conclusion([1, 0], claim("StrictJOrthant", (0,)))
    assert check_conclusion([0, 0], claim("MustBeZero"))
    assert not check_conclusion([0, 1e-3], claim("MustBeZero"))
    assert check_conclusion([-1, -2], claim("StrictOrthant"))
    assert not check_conclusion([0, 2], claim("StrictOrthant"))
    assert check_conclusion([1, 0, -2], claim("UnisignedWrtJ", (0,)))
    assert not check_conclusion([1, 0, 2], claim("UnisignedWrtJ", (0,)))


def test_verify_snr_examples():
    r = verify_snr_theorem([[-1, -3], [-3, -1]], ClassSpec("n2"), 10_000, 0)
    assert r.ok and r.witnesses > 0
    r = verify_snr_theorem([[1, 2], [2, 1]], ClassSpec("ap1", (0,)), 10_000, 0)
    assert r.ok and r.null_condition and r.cone_condition
    r = verify_snr_theorem(np.eye(2), ClassSpec("p"), 10_000, 0)
    assert r.ok and r.witnesses == 0
    assert r.to_json() == {"trials": 10_000, "witnesses": 0, "violations": [], "claim": "p"}


def test_verify_snr_precondition():
    with pytest.raises(PreconditionError):
        verify_snr_theorem(np.eye(2), ClassSpec("n2"), 100, 0)
    with pytest.raises(PreconditionError):
        verify_snr_theorem(np.eye(2), ClassSpec("sp"), 100, 0)


def test_violations_are_reported(monkeypatch):
    # bypass the membership gate so a non-P matrix is checked against the P claim
    monkeypatch.setattr(ClassSpec, "predicate", lambda self, tol=None, max_n=None: lambda M: HOLDS)
    r = verify_snr_theorem([[1.0, 2.0], [2.0, 1.0]], ClassSpec("p"), 1000, 1)
    assert not r.ok and r.violations[0]["reason"].startswith("P-matrix")
    r = verify_snr_theorem([[1.0, 2.0], [2.0, 1.0]], ClassSpec("ap2"), 1000, 1)
    assert not r.ok


def test_tiny_vectors_are_not_reversals():
    assert find_reversal([[1.0]], 10_000, 26) is None
    x = np.array([[1e-7, -1e-7]])
    mask, _ = snr._reversed_mask(np.eye(2), x, snr.DEFAULT_TOL)
    assert not mask[0]


def test_random_p_never_reverse():
    rng = np.random.default_rng(0)
    for i in range(100):
        M = random_p(int(rng.integers(1, 6)), rng)
        assert find_reversal(M, 10_000, i) is None


def test_random_n2_witnesses_unisigned():
    rng = np.random.default_rng(1)
    for i in range(100):
        M = random_n2(int(rng.integers(2, 5)), rng)
        X, _ = snr.reversal_witnesses(M, 10_000, i)
        assert X.shape[0] > 0
        assert all(check_conclusion(x, claim("Unisigned")) for x in X)


# hull-level bounds


def test_lemma_sign_rule():
    assert lemma_sign_vector([0.0, -1e-300, 2.0]).tolist() == [1.0, -1.0, 1.0]


def test_pointwise_bound_examples():
    rng = np.random.default_rng(2)
    h = N2_OK
    x = rng.normal(size=2)
    assert pointwise_bound_check(h, test_matrix_iz(h, lemma_sign_vector(x)), x)
    assert pointwise_bound_check(h, h.center, x)
    assert pointwise_bound_check(h, h.upper, [1.0, 0.0])
    with pytest.raises(NotMember):
        pointwise_bound_check(h, h.upper + 1, x)


def test_pointwise_bound_random():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        h = random_hull(rng.uniform(-5, 5, (n, n)), rng)
        for C in samples(h, 200, int(rng.integers(2 ** 31))):
            assert pointwise_bound_check(h, C, rng.standard_cauchy(n))


def _non_unisigned(rng, n, count):
    X = rng.normal(size=(count * 2, n))
    mixed = (X > 0).any(axis=1) & (X < 0).any(axis=1)
    return X[mixed][:count]


def test_uniform_positivity_examples():
    i = uniform_positivity_index(N2_OK, [1.0, -1.0])
    assert i in (0, 1)
    for x in ([1.0, 1.0], [0.0, 0.0], [-1.0, -2.0]):
        with pytest.raises(UnisignedInput):
            uniform_positivity_index(N2_OK, x)
    bad = IntervalHull([[-3, -2], [-2, -3]], [[-1, -1], [-1, -1]])
    with pytest.raises(NotCertified):
        uniform_positivity_index(bad, [1.0, -1.0])


def test_uniform_positivity_holds_on_samples():
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 5:
        n = int(rng.integers(2, 5))
        h = random_hull(fit(random_n2(n, rng), 4.5), rng, max_radius=0.05)
        cert = certify_n2(h)
        if not cert.certified:
            continue
        checked += 1
        Cs = list(samples(h, 20, checked))
        for x in _non_unisigned(rng, n, 1000):
            i = uniform_positivity_index(h, x, certificate=cert)
            for C in Cs:
                assert x[i] * (C @ x)[i] > 0


def test_first_category_analogue_heuristic():
    """Uniform positivity for N1(J) hulls with x not unisigned w.r.t. J.

    Not a library guarantee; the evident analogue of the second-category
    statement is probed empirically.
    """
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 10:
        n = int(rng.integers(2, 5))
        J = tuple(range(int(rng.integers(1, n))))
        h = random_hull(fit(random_n1(n, J, rng), 4.5), rng, max_radius=0.05)
        if not np.all(np.diag(h.upper) < 0) or not certify_n1(h, J).certified:
            continue
        checked += 1
        e = signature(J, n)
        Cs = list(samples(h, 20, checked))
        for x in _non_unisigned(rng, n, 300):
            if check_conclusion(x, claim("UnisignedWrtJ", J)):
                continue
            z = lemma_sign_vector(x)
            assert not (np.array_equal(z, e) or np.array_equal(z, -e))
            p = x * (test_matrix_iz(h, z) @ x)
            i = int(np.argmax(p))
            assert p[i] > 0
            for C in Cs:
                assert x[i] * (C @ x)[i] > 0
