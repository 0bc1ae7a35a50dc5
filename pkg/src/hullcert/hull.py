"""Interval hulls, their finite test matrices, and hull certification.

``IntervalHull(A, B)`` is the set of matrices whose ``(i, j)`` entry lies
between ``a_ij`` and ``b_ij``.  No ordering between ``A`` and ``B`` is
assumed; all derived matrices use the entrywise min/max corners.

Test matrices are assembled by *selecting* corner entries rather than by
evaluating ``center -/+ radius``: ``I_z`` takes the lower corner where
``z_i z_j = 1`` and the upper corner where ``z_i z_j = -1``.  This equals
the arithmetic definition mathematically and keeps every test matrix an
exact hull member in floating point.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from hullcert import classes
from hullcert.classes import ClassSpec, ClassVerdict, Status
from hullcert.errors import (
    ComplexityError,
    DiagonalPreconditionViolated,
    DimensionError,
    OracleDisagreement,
)
from hullcert.matcore import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    complement,
    matrix_from_json,
    matrix_to_json,
    max_abs,
    one_based,
    proper_index_set,
    sign_array,
)

CERTIFY_CAP = 12


@dataclass(frozen=True)
class IntervalHull:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A, B = as_matrix(self.A), as_matrix(self.B)
        if A.shape != B.shape:
            raise DimensionError(f"A has shape {A.shape} but B has shape {B.shape}")
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_center_radius(cls, center, radius) -> "IntervalHull":
        c, r = as_matrix(center), as_matrix(radius)
        if np.any(r < 0):
            raise DimensionError("radius must be entrywise nonnegative")
        return cls(c - r, c + r)

    @classmethod
    def from_json(cls, obj) -> "IntervalHull":
        if not isinstance(obj, dict):
            raise DimensionError("hull JSON must be an object")
        if "A" in obj and "B" in obj:
            return cls(matrix_from_json(obj["A"]), matrix_from_json(obj["B"]))
        if "center" in obj and "radius" in obj:
            return cls.from_center_radius(matrix_from_json(obj["center"]),
                                          matrix_from_json(obj["radius"]))
        raise DimensionError('hull JSON needs "A" and "B" (or "center" and "radius")')

    def to_json(self) -> dict:
        return {"A": matrix_to_json(self.A), "B": matrix_to_json(self.B)}

    @property
    def shape(self):
        return self.A.shape

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def is_square(self):
        return self.A.shape[0] == self.A.shape[1]

    @cached_property
    def lower(self) -> np.ndarray:
        return np.minimum(self.A, self.B)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.maximum(self.A, self.B)

    @cached_property
    def center(self) -> np.ndarray:
        return (self.A + self.B) / 2

    @cached_property
    def radius(self) -> np.ndarray:
        return (self.upper - self.lower) / 2

    def _require_square(self):
        if not self.is_square:
            raise DimensionError(f"hull must be square, got shape {self.shape}")
        return self.n


# --------------------------------------------------------------------------
# Test matrices
# --------------------------------------------------------------------------

def _as_signs(z, n) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (n,) or not np.all(np.abs(z) == 1):
        raise DimensionError(f"sign vector must have length {n} with entries +1/-1")
    return z


def test_matrix_iz(h: IntervalHull, z) -> np.ndarray:
    """``I_z``: lower corner where ``z_i z_j = 1``, upper corner elsewhere."""
    n = h._require_square()
    z = _as_signs(z, n)
    return np.where(np.outer(z, z) > 0, h.lower, h.upper)


def iz_formula(h: IntervalHull, z) -> np.ndarray:
    """``center - D_z radius D_z`` evaluated arithmetically (cross-check only)."""
    z = _as_signs(z, h._require_square())
    return h.center - z[:, None] * h.radius * z[None, :]


def signature(J, n) -> np.ndarray:
    """``e^J``: +1 on ``J``, -1 off ``J``."""
    e = -np.ones(n)
    e[list(J)] = 1.0
    return e


def test_matrix_ipj(h: IntervalHull, J) -> np.ndarray:
    """``I_{P_J}``: upper corner on the ``JJ`` and ``J^c J^c`` blocks, lower off them."""
    n = h._require_square()
    J = proper_index_set(J, n)
    e = signature(J, n)
    selected = np.where(np.outer(e, e) > 0, h.upper, h.lower)

    Jc = complement(J, n)
    blocks = np.empty((n, n))
    blocks[np.ix_(J, J)] = h.upper[np.ix_(J, J)]
    blocks[np.ix_(Jc, Jc)] = h.upper[np.ix_(Jc, Jc)]
    blocks[np.ix_(J, Jc)] = h.lower[np.ix_(J, Jc)]
    blocks[np.ix_(Jc, J)] = h.lower[np.ix_(Jc, J)]
    assert np.array_equal(selected, blocks), "I_PJ block assembly disagrees with selection"
    formula = h.center + e[:, None] * h.radius * e[None, :]
    assert np.allclose(formula, selected, rtol=1e-12, atol=1e-12 * max(1.0, max_abs(selected)))
    return selected


# keep pytest from collecting these when imported into test modules
test_matrix_iz.__test__ = False
test_matrix_ipj.__test__ = False


def contains(h: IntervalHull, C, tol: float = 0.0) -> bool:
    C = np.asarray(C, dtype=float)
    if C.shape != h.shape:
        raise DimensionError(f"matrix shape {C.shape} does not match hull shape {h.shape}")
    return bool(np.all(C >= h.lower - tol) and np.all(C <= h.upper + tol))


def sample(h: IntervalHull, rng_seed) -> np.ndarray:
    """One uniform draw from the hull; deterministic in ``rng_seed``."""
    rng = np.random.default_rng(rng_seed)
    return _draw(h, rng)


def _draw(h: IntervalHull, rng) -> np.ndarray:
    t = rng.random(h.shape)
    C = h.lower + t * (h.upper - h.lower)
    return np.clip(C, h.lower, h.upper)


def samples(h: IntervalHull, k: int, rng_seed) -> Iterator[np.ndarray]:
    rng = np.random.default_rng(rng_seed)
    for _ in range(k):
        yield _draw(h, rng)


class Exclude(enum.Enum):
    NONE = "none"
    PLUS_MINUS_E = "pm_e"
    PLUS_MINUS_EJ = "pm_eJ"


def enumerate_test_signs(n: int, exclude: Exclude = Exclude.NONE,
                         J: Sequence[int] = ()) -> Iterator[np.ndarray]:
    """Canonical sign vectors (``z_1 = +1``) in lexicographic order, ``+`` before ``-``."""
    if n < 1:
        raise DimensionError("n must be >= 1")
    skip = None
    if exclude is Exclude.PLUS_MINUS_E:
        skip = np.ones(n)
    elif exclude is Exclude.PLUS_MINUS_EJ:
        J = proper_index_set(J, n)
        skip = signature(J, n)
        if skip[0] < 0:
            skip = -skip
    for tail in itertools.product((1.0, -1.0), repeat=n - 1):
        z = np.array((1.0,) + tail)
        if skip is not None and np.array_equal(z, skip):
            continue
        yield z


def sign_label(z) -> str:
    return "z=" + "".join("+" if v > 0 else "-" for v in z)


# --------------------------------------------------------------------------
# Certificates
# --------------------------------------------------------------------------

class CertStatus(str, enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Certificate:
    target_class: ClassSpec
    status: CertStatus
    refuting_member: Optional[np.ndarray] = None
    failing_test: Optional[str] = None
    tested: tuple[str, ...] = ()
    verdict: Optional[ClassVerdict] = None
    feasible_x: Optional[np.ndarray] = None

    @property
    def certified(self):
        return self.status is CertStatus.CERTIFIED

    def to_json(self) -> dict:
        out = {"class": str(self.target_class), "status": self.status.value,
               "failing_test": self.failing_test, "tested": list(self.tested)}
        if self.refuting_member is not None:
            out["refuting_member"] = matrix_to_json(self.refuting_member)
        if self.verdict is not None and not self.verdict.holds:
            out["witness"] = self.verdict.to_json()
        if self.feasible_x is not None:
            out["x"] = np.asarray(self.feasible_x).tolist()
        return out


def _run_tests(spec: ClassSpec, tests, predicate) -> Certificate:
    """Evaluate ``(label, matrix)`` pairs in order.

    The first decisive failure refutes; a Zero-band test makes the result
    Indeterminate only if no later test fails decisively.
    """
    tested = []
    undecided = None
    for label, T in tests:
        tested.append(label)
        v = predicate(T)
        if v.status is Status.FAILS:
            return Certificate(spec, CertStatus.REFUTED, refuting_member=T, failing_test=label,
                               tested=tuple(tested), verdict=v)
        if v.status is Status.INDETERMINATE and undecided is None:
            undecided = (label, T, v)
    if undecided is not None:
        label, T, v = undecided
        return Certificate(spec, CertStatus.INDETERMINATE, failing_test=label,
                           tested=tuple(tested), verdict=v)
    return Certificate(spec, CertStatus.CERTIFIED, tested=tuple(tested))


def _check_cap(h: IntervalHull, max_n: int):
    n = h._require_square()
    if n > max_n:
        raise ComplexityError(f"hull certification capped at n={max_n}, got n={n}")
    return n


def _require_negative_diagonal(h: IntervalHull, tol: Tolerance):
    d = np.diag(h.upper)
    signs = sign_array(d, max(1.0, max_abs(h.upper)), tol)
    if np.any(signs >= 0):
        i = int(np.flatnonzero(signs >= 0)[0])
        raise DiagonalPreconditionViolated(
            f"max(a_ii, b_ii) must be < 0 for all i; fails at i={i + 1} ({d[i]:.6g})")


def _iz_tests(h, signs):
    for z in signs:
        yield sign_label(z), test_matrix_iz(h, z)


def certify_n2(h: IntervalHull, tol: Tolerance = DEFAULT_TOL,
               max_n: int = CERTIFY_CAP) -> Certificate:
    n = _check_cap(h, max_n)
    _require_negative_diagonal(h, tol)
    spec = ClassSpec("n2")
    tests = _iz_tests(h, enumerate_test_signs(n, Exclude.PLUS_MINUS_E))
    return _run_tests(spec, tests, spec.predicate(tol, max(max_n, n)))


def certify_n1(h: IntervalHull, J, tol: Tolerance = DEFAULT_TOL,
               max_n: int = CERTIFY_CAP) -> Certificate:
    n = _check_cap(h, max_n)
    J = proper_index_set(J, n)
    _require_negative_diagonal(h, tol)
    spec = ClassSpec("n1", J)
    tests = _iz_tests(h, enumerate_test_signs(n, Exclude.PLUS_MINUS_EJ, J))
    return _run_tests(spec, tests, spec.predicate(tol, max(max_n, n)))


def certify_ap2(h: IntervalHull, tol: Tolerance = DEFAULT_TOL,
                max_n: int = CERTIFY_CAP) -> Certificate:
    n = _check_cap(h, max_n)
    if n < 2:
        raise DimensionError("almost P-matrices need n >= 2")
    spec = ClassSpec("ap2")

    def tests():
        yield "corner=I_u", h.upper
        yield from _iz_tests(h, enumerate_test_signs(n))

    return _run_tests(spec, tests(), spec.predicate(tol, max(max_n, n)))


def certify_ap1(h: IntervalHull, J, tol: Tolerance = DEFAULT_TOL,
                max_n: int = CERTIFY_CAP) -> Certificate:
    n = _check_cap(h, max_n)
    J = proper_index_set(J, n)
    spec = ClassSpec("ap1", J)

    def tests():
        yield "J=" + ",".join(map(str, one_based(J))), test_matrix_ipj(h, J)
        yield from _iz_tests(h, enumerate_test_signs(n))

    return _run_tests(spec, tests(), spec.predicate(tol, max(max_n, n)))


def certify_p(h: IntervalHull, tol: Tolerance = DEFAULT_TOL,
              max_n: int = CERTIFY_CAP) -> Certificate:
    n = _check_cap(h, max_n)
    spec = ClassSpec("p")
    tests = _iz_tests(h, enumerate_test_signs(n))
    return _run_tests(spec, tests, spec.predicate(tol, max(max_n, n)))


def certify_sp(h: IntervalHull, tol: Tolerance = DEFAULT_TOL) -> Certificate:
    """Semipositivity of the lower corner; its ``x`` works for every member."""
    spec = ClassSpec("sp")
    v = classes.is_semipositive(h.lower, tol)
    if v.holds:
        return Certificate(spec, CertStatus.CERTIFIED, tested=("corner=I_l",),
                           feasible_x=v.witness["x"])
    return Certificate(spec, CertStatus.REFUTED, refuting_member=h.lower,
                       failing_test="corner=I_l", tested=("corner=I_l",), verdict=v)


def certify_msp(h: IntervalHull, tol: Tolerance = DEFAULT_TOL) -> Certificate:
    spec = ClassSpec("msp")
    sp = classes.is_semipositive(h.lower, tol)
    if not sp.holds:
        return Certificate(spec, CertStatus.REFUTED, refuting_member=h.lower,
                           failing_test="corner=I_l", tested=("corner=I_l",), verdict=sp)
    msp = classes.is_minimally_semipositive(h.upper, tol)
    tested = ("corner=I_l", "corner=I_u")
    if not msp.holds:
        return Certificate(spec, CertStatus.REFUTED, refuting_member=h.upper,
                           failing_test="corner=I_u", tested=tested, verdict=msp)
    return Certificate(spec, CertStatus.CERTIFIED, tested=tested, feasible_x=sp.witness["x"])


def certify(h: IntervalHull, spec: ClassSpec, tol: Tolerance = DEFAULT_TOL,
            max_n: int = CERTIFY_CAP) -> Certificate:
    """Dispatch on the class spec."""
    kind = spec.kind
    if kind == "p":
        return certify_p(h, tol, max_n)
    if kind == "n2":
        return certify_n2(h, tol, max_n)
    if kind == "n1":
        return certify_n1(h, spec.J, tol, max_n)
    if kind == "ap2":
        return certify_ap2(h, tol, max_n)
    if kind == "ap1":
        return certify_ap1(h, spec.J, tol, max_n)
    if kind == "sp":
        return certify_sp(h, tol)
    return certify_msp(h, tol)


# --------------------------------------------------------------------------
# Sampling oracle
# --------------------------------------------------------------------------

@dataclass
class SampleReport:
    certificate: Certificate
    samples: int
    passed: int = 0
    failed: int = 0
    undecided: int = 0
    failing_samples: list = field(default_factory=list)
    refutation_checked: bool = False

    @property
    def agreement(self) -> bool:
        if self.certificate.certified:
            return self.failed == 0
        return self.certificate.status is not CertStatus.REFUTED or self.refutation_checked

    def to_json(self) -> dict:
        return {"certificate": self.certificate.to_json(), "samples": self.samples,
                "passed": self.passed, "failed": self.failed, "undecided": self.undecided,
                "refutation_checked": self.refutation_checked, "agreement": self.agreement}


def sample_validate(h: IntervalHull, spec: ClassSpec, k: int, rng_seed: int,
                    tol: Tolerance = DEFAULT_TOL, max_n: int = CERTIFY_CAP,
                    certificate: Optional[Certificate] = None,
                    predicate: Optional[Callable[[np.ndarray], ClassVerdict]] = None,
                    ) -> SampleReport:
    """Certify, then test ``k`` seeded hull samples with the class predicate.

    ``predicate`` replaces the class predicate as the sampling oracle, e.g.
    :func:`~hullcert.classes.msp_square_crosscheck` for square ``msp`` hulls.

    Raises :class:`OracleDisagreement` when a certified hull yields a failing
    sample, or when a refuting member is not a failing hull member.
    """
    cert = certificate if certificate is not None else certify(h, spec, tol, max_n)
    override = predicate
    if predicate is None:
        predicate = spec.predicate(tol, max(max_n, h.n))
    report = SampleReport(cert, k)
    if cert.status is CertStatus.REFUTED:
        member = cert.refuting_member
        if not contains(h, member) or predicate(member).status is not Status.FAILS:
            raise OracleDisagreement(f"refuting member for {spec} does not re-verify")
        report.refutation_checked = True
    stack = np.array(list(samples(h, k, rng_seed))).reshape((k,) + h.shape)
    if override is None:
        codes = classes.batch_status(spec, stack, tol, max(max_n, h.n))
    else:
        codes = np.array([classes._CODES[predicate(C).status] for C in stack], dtype=np.int8)
    report.passed = int(np.sum(codes == classes.HOLDS_CODE))
    report.failed = int(np.sum(codes == classes.FAILS_CODE))
    report.undecided = int(np.sum(codes == classes.UNDECIDED_CODE))
    report.failing_samples = [int(i) for i in np.flatnonzero(codes == classes.FAILS_CODE)[:10]]
    if cert.certified and report.failed:
        raise OracleDisagreement(
            f"hull certified {spec} but {report.failed}/{k} samples fail "
            f"(first at sample {report.failing_samples[0]})")
    return report
