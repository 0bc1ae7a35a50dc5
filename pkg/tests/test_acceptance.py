"""Acceptance criteria, each at its stated tolerance and runtime bound."""

import time

import numpy as np
import pytest

from hullcert import classes, lpfeas
from hullcert.classes import ClassSpec, Status
from hullcert.hull import (
    CertStatus,
    IntervalHull,
    certify_n2,
    contains,
    enumerate_test_signs,
    sample_validate,
    samples,
    test_matrix_ipj,
    test_matrix_iz,
)
from hullcert.matcore import principal_minors
from hullcert.snr import lemma_sign_vector, pointwise_bound_check, verify_snr_theorem
from matrix_factory import (
    fit,
    hull_for_class,
    member,
    proper_subsets,
    random_hull,
    random_inverse_nonneg,
    random_n2,
    random_proper_subset,
)

CLASS_KINDS = ("p", "n2", "n1", "ap2", "ap1", "sp", "msp")


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.criterion(1, "N2 fixture certifies; 1000 samples pass brute-force minors; < 1 s")
def test_fixture_certification_positive():
    with Timer() as t:
        h = IntervalHull([[-1, -3], [-3, -1]], [[-1.1, -2.9], [-2.9, -1.1]])
        cert = certify_n2(h)
        assert cert.certified and cert.tested == ("z=+-",)
        minors = [v for _, v in principal_minors(test_matrix_iz(h, [1, -1]))]
        assert minors == pytest.approx([-1.1, -1.1, -7.2], abs=1e-9)
        report = sample_validate(h, ClassSpec("n2"), 1000, 2024, certificate=cert)
        assert report.passed == 1000 and report.failed == 0 and report.undecided == 0
        for C in samples(h, 1000, 2024):
            assert all(v < 0 for _, v in principal_minors(C))
    assert t.elapsed < 1.0


@pytest.mark.criterion(2, "N2 fixture refuted by [[-3,-1],[-1,-3]] (det 8), re-verified; < 1 s")
def test_fixture_certification_negative():
    with Timer() as t:
        h = IntervalHull([[-3, -2], [-2, -3]], [[-1, -1], [-1, -1]])
        cert = certify_n2(h)
        assert cert.status is CertStatus.REFUTED
        member_ = cert.refuting_member
        assert member_.tolist() == [[-3, -1], [-1, -3]]
        assert dict(principal_minors(member_))[(0, 1)] == 8.0
        assert contains(h, member_)
        assert classes.is_n_matrix(member_).fails
        assert sample_validate(h, ClassSpec("n2"), 100, 7, certificate=cert).refutation_checked
    assert t.elapsed < 1.0


@pytest.mark.criterion(3, "200 hulls per class x 500 samples: no certified hull with a failing "
                          "sample; refuting members fail; < 2 min")
def test_iff_cross_validation():
    rng = np.random.default_rng(20240601)
    tally = {}
    with Timer() as t:
        for kind in CLASS_KINDS:
            for _ in range(200):
                n = int(rng.integers(2, 5))
                J = random_proper_subset(n, rng) if kind in ("n1", "ap1") else None
                h = hull_for_class(kind, n, rng, J)
                spec = ClassSpec(kind, J)
                assert np.all(np.abs(h.lower) <= 5) and np.all(np.abs(h.upper) <= 5)
                assert np.all(h.radius <= 0.5)
                # raises OracleDisagreement on any certified-with-failing-sample
                report = sample_validate(h, spec, 500, int(rng.integers(2 ** 31)))
                cert = report.certificate
                assert not (cert.certified and report.failed)
                if cert.status is CertStatus.REFUTED:
                    assert contains(h, cert.refuting_member)
                    assert spec.predicate()(cert.refuting_member).status is Status.FAILS
                key = (kind, cert.status.value)
                tally[key] = tally.get(key, 0) + 1
    for kind in CLASS_KINDS:
        # both directions of each iff are exercised
        assert tally.get((kind, "Certified"), 0) >= 10, tally
        assert tally.get((kind, "Refuted"), 0) >= 10, tally
    assert t.elapsed < 120.0


@pytest.mark.criterion(4, "SNR suites: 100 members per class x 1e4 trials, zero violations, "
                          "AP conditions (a)/(c); < 2 min")
def test_sign_non_reversal_suites():
    rng = np.random.default_rng(77)
    with Timer() as t:
        for kind in ("p", "n2", "n1", "ap2", "ap1"):
            for i in range(100):
                n = int(rng.integers(2, 5))
                J = random_proper_subset(n, rng) if kind in ("n1", "ap1") else None
                M = member(kind, n, rng, J)
                spec = ClassSpec(kind, J)
                assert spec.predicate()(M).holds
                report = verify_snr_theorem(M, spec, 10_000, i)
                assert report.violations == [], (kind, M.tolist(), report.violations[:2])
                if kind in ("ap2", "ap1"):
                    assert report.null_condition is True
                    assert report.cone_condition is True
    assert t.elapsed < 120.0


@pytest.mark.criterion(5, "lemma bound on 20 hulls x 1e4 (C, x) pairs within 1e-8; < 30 s")
def test_lemma_bound():
    rng = np.random.default_rng(5)
    with Timer() as t:
        for _ in range(20):
            n = int(rng.integers(1, 6))
            h = random_hull(rng.uniform(-5, 5, (n, n)), rng)
            X = rng.standard_normal((10_000, n)) * rng.choice([0.0, 1.0], (10_000, n), p=[0.1, 0.9])
            for C, x in zip(samples(h, 10_000, int(rng.integers(2 ** 31))), X):
                assert pointwise_bound_check(h, C, x, 1e-8)
            # the bound is tight at C = I_z
            x = X[0]
            assert pointwise_bound_check(h, test_matrix_iz(h, lemma_sign_vector(x)), x, 0.0)
    assert t.elapsed < 30.0


@pytest.mark.criterion(6, "structural identities exact over n = 1..6, 50 hulls each")
def test_structural_identities():
    rng = np.random.default_rng(6)
    for n in range(1, 7):
        for _ in range(50):
            h = random_hull(rng.uniform(-5, 5, (n, n)), rng, max_radius=rng.uniform(0, 3))
            assert contains(h, h.lower) and contains(h, h.upper)
            for z in enumerate_test_signs(n):
                Iz = test_matrix_iz(h, z)
                assert np.array_equal(Iz, test_matrix_iz(h, -z))
                assert np.array_equal(np.diag(Iz), np.diag(h.lower))
                assert contains(h, Iz)
            for J in proper_subsets(n):
                M = test_matrix_ipj(h, J)
                Jc = [i for i in range(n) if i not in J]
                assert np.array_equal(M[np.ix_(J, J)], h.upper[np.ix_(J, J)])
                assert np.array_equal(M[np.ix_(Jc, Jc)], h.upper[np.ix_(Jc, Jc)])
                assert np.array_equal(M[np.ix_(J, Jc)], h.lower[np.ix_(J, Jc)])
                assert np.array_equal(M[np.ix_(Jc, J)], h.lower[np.ix_(Jc, J)])
                assert contains(h, M)


@pytest.mark.criterion(7, "semipositivity stack: alternatives 500, MSP crosscheck 500, "
                          "inverse-nonnegativity property 100; < 1 min")
def test_semipositivity_stack():
    rng = np.random.default_rng(7)
    with Timer() as t:
        for _ in range(500):
            A = rng.normal(size=(3, 3)) + rng.uniform(-1, 1)
            r = lpfeas.strict_feasible_nonneg(A)
            assert (r.primal is None) != (r.dual is None)
            assert r.verify(1e-7)

        decided = 0
        for i in range(500):
            n = int(rng.integers(1, 6))
            M = random_inverse_nonneg(n, rng, density=0.6) if i % 2 else rng.normal(size=(n, n))
            a = classes.is_minimally_semipositive(M)
            b = classes.msp_square_crosscheck(M)
            if Status.INDETERMINATE in (a.status, b.status):
                continue
            decided += 1
            assert a.status is b.status, M.tolist()
        assert decided >= 490

        outcomes = {True: 0, False: 0}
        for _ in range(100):
            n = int(rng.integers(2, 5))
            B = random_inverse_nonneg(n, rng)
            C = B - rng.uniform(0, 1, (n, n)) * rng.uniform(0, 2) * np.abs(B).max()
            assert np.all(C <= B)
            inv_nonneg = classes.msp_square_crosscheck(C).holds
            assert inv_nonneg == lpfeas.strict_feasible_nonneg(C).feasible, C.tolist()
            outcomes[inv_nonneg] += 1
        assert min(outcomes.values()) >= 10, outcomes
    assert t.elapsed < 60.0


@pytest.mark.criterion(8, "certify_n2 at n = 10 (511 test matrices, +-e excluded, x 1023 minors) certifies; < 60 s")
def test_scaling_gate():
    rng = np.random.default_rng(8)
    h = random_hull(fit(random_n2(10, rng), 4.5), rng, max_radius=0.05)
    with Timer() as t:
        cert = certify_n2(h)
    assert cert.certified and len(cert.tested) == 2 ** 9 - 1
    assert t.elapsed < 60.0
