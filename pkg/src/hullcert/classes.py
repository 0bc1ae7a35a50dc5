"""Single-matrix class predicates.

Each predicate returns a :class:`ClassVerdict`.  A decisive violation
anywhere beats a Zero-band decision, so ``FAILS`` always means the matrix
is outside the class for every perturbation inside the tolerance band.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from hullcert import lpfeas
from hullcert.errors import (
    DimensionError,
    IndeterminateError,
    InvalidIndexSet,
    NoValidPartition,
    NotAlmostP,
    NotNMatrix,
    SingularMatrix,
)
from hullcert.matcore import (
    DEFAULT_TOL,
    MINOR_CAP,
    Tolerance,
    complement,
    inverse,
    max_abs,
    one_based,
    parse_index_list,
    principal_minors_by_size,
    principal_minors_stack,
    proper_index_set,
    require_square,
    sign_array,
)


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ClassVerdict:
    """Tri-state decision with a witness for ``FAILS`` and ``INDETERMINATE``.

    Witness dicts use 0-based indices internally; :meth:`to_json` renders
    them 1-based.
    """

    status: Status
    witness: Optional[dict] = None

    @property
    def holds(self):
        return self.status is Status.HOLDS

    @property
    def fails(self):
        return self.status is Status.FAILS

    def to_json(self) -> dict:
        return {"status": self.status.value, "witness": _witness_json(self.witness)}


HOLDS = ClassVerdict(Status.HOLDS)


def _witness_json(w):
    if w is None:
        return None
    out = {}
    for key, val in w.items():
        if key in ("minor", "entry", "J"):
            out[key] = one_based(val)
        elif key == "column":
            out[key] = int(val) + 1
        elif isinstance(val, np.ndarray):
            out[key] = val.tolist()
        elif isinstance(val, ClassVerdict):
            out[key] = val.to_json()
        else:
            out[key] = val
    return out


def combine(*verdicts: ClassVerdict) -> ClassVerdict:
    """Conjunction: first FAILS, else first INDETERMINATE, else HOLDS."""
    for v in verdicts:
        if v.status is Status.FAILS:
            return v
    for v in verdicts:
        if v.status is Status.INDETERMINATE:
            return v
    return HOLDS


# --------------------------------------------------------------------------
# Minor-sign predicates
# --------------------------------------------------------------------------

def _minor_sign_verdict(M, want, tol, max_n, det_want=None):
    """Check every principal minor decides ``want`` (+1 or -1).

    ``det_want`` overrides the required sign of the full determinant.
    """
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    base = max(1.0, max_abs(M))
    pending = None
    for subsets, values in principal_minors_by_size(M, max_n):
        k = subsets.shape[1]
        target = det_want if (k == n and det_want is not None) else want
        band = tol.band(base ** k)
        # decided with the wrong sign: |v| > band and sign(v) != target
        bad = target * values < -band
        if bad.any():
            i = int(bad.argmax())
            return ClassVerdict(Status.FAILS, {"minor": tuple(int(j) for j in subsets[i]),
                                               "value": float(values[i])})
        if pending is None:
            zero = np.abs(values) <= band
            if zero.any():
                i = int(zero.argmax())
                pending = ClassVerdict(Status.INDETERMINATE,
                                       {"minor": tuple(int(j) for j in subsets[i]),
                                        "value": float(values[i])})
    return pending or HOLDS


def is_p_matrix(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> ClassVerdict:
    return _minor_sign_verdict(M, 1, tol, max_n)


def is_n_matrix(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> ClassVerdict:
    return _minor_sign_verdict(M, -1, tol, max_n)


def is_almost_p(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> ClassVerdict:
    M = np.asarray(M, dtype=float)
    if require_square(M) < 2:
        raise DimensionError("almost P-matrices need n >= 2")
    return _minor_sign_verdict(M, 1, tol, max_n, det_want=-1)


# --------------------------------------------------------------------------
# Entry sign patterns and categories
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NCategory:
    """``second`` or ``first`` with a canonical ``J`` (contains index 0)."""

    kind: str
    J: Optional[tuple[int, ...]] = None

    @classmethod
    def first(cls, J, n):
        J = proper_index_set(J, n)
        if 0 not in J:
            J = complement(J, n)
        return cls("first", J)

    def __str__(self):
        if self.kind == "second":
            return "SecondCategory"
        return "FirstCategory({" + ",".join(map(str, one_based(self.J))) + "})"

    def to_json(self):
        return {"category": self.kind, "J": None if self.J is None else one_based(self.J)}


SECOND_CATEGORY = NCategory("second")


def _pattern(n, J):
    """+1 where an N1(J) matrix must be positive (cross blocks), -1 elsewhere."""
    e = -np.ones(n)
    e[list(J)] = 1.0
    return -np.outer(e, e)


def _entry_pattern_verdict(M, pattern, tol):
    """Every entry must decide the sign given in ``pattern``."""
    band = tol.band(max_abs(M))
    bad = pattern * M < -band
    if bad.any():
        i, j = divmod(int(bad.argmax()), M.shape[1])
        return ClassVerdict(Status.FAILS, {"entry": (i, j), "value": float(M[i, j])})
    zero = np.abs(M) <= band
    if zero.any():
        i, j = divmod(int(zero.argmax()), M.shape[1])
        return ClassVerdict(Status.INDETERMINATE, {"entry": (i, j), "value": float(M[i, j])})
    return HOLDS


def _require_n(M, tol, max_n):
    v = is_n_matrix(M, tol, max_n)
    if v.status is Status.FAILS:
        raise NotNMatrix(f"not an N-matrix: minor {one_based(v.witness['minor'])} "
                         f"= {v.witness['value']:.6g}")
    if v.status is Status.INDETERMINATE:
        # a Zero-band minor (e.g. a singular matrix) does not meet the precondition
        raise NotNMatrix(f"not certified as an N-matrix: minor {one_based(v.witness['minor'])} "
                         f"= {v.witness['value']:.6g} is in the Zero band")


def n_category(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> NCategory:
    """Category of an N-matrix, with ``J`` read off row 1's signs."""
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    _require_n(M, tol, max_n)
    signs = sign_array(M, max_abs(M), tol)
    if np.any(signs == 0):
        i, j = (int(t) for t in np.argwhere(signs == 0)[0])
        raise IndeterminateError("entry in the Zero band", {"entry": (i, j)})
    if np.all(signs < 0):
        return SECOND_CATEGORY
    J = tuple(int(j) for j in np.flatnonzero(signs[0] < 0))
    if len(J) == n:
        raise NoValidPartition("row 1 is entirely negative but the matrix has a positive entry")
    v = _entry_pattern_verdict(M, _pattern(n, J), tol)
    if not v.holds:
        raise NoValidPartition(f"block sign pattern for J={one_based(J)} fails at entry "
                               f"{one_based(v.witness['entry'])}")
    return NCategory.first(J, n)


def is_n_second(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> ClassVerdict:
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    return combine(_entry_pattern_verdict(M, -np.ones((n, n)), tol), is_n_matrix(M, tol, max_n))


def is_n_first_wrt(M, J, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> ClassVerdict:
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    J = proper_index_set(J, n)
    return combine(_entry_pattern_verdict(M, _pattern(n, J), tol), is_n_matrix(M, tol, max_n))


def almost_p_category(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> NCategory:
    M = np.asarray(M, dtype=float)
    v = is_almost_p(M, tol, max_n)
    if v.status is Status.FAILS:
        raise NotAlmostP(f"not an almost P-matrix: minor {one_based(v.witness['minor'])} "
                         f"= {v.witness['value']:.6g}")
    if v.status is Status.INDETERMINATE:
        raise NotAlmostP(f"not certified as almost P: minor {one_based(v.witness['minor'])} "
                         f"= {v.witness['value']:.6g} is in the Zero band")
    return n_category(inverse(M, tol), tol, max_n)


def _inverse_verdict(M, tol, check):
    try:
        inv = inverse(M, tol)
    except SingularMatrix as exc:
        return ClassVerdict(Status.FAILS, {"singular": str(exc)})
    v = check(inv)
    if v.holds:
        return v
    return ClassVerdict(v.status, {"inverse": v})


def is_almost_p_second(M, tol: Tolerance = DEFAULT_TOL, max_n: int = MINOR_CAP) -> ClassVerdict:
    v = is_almost_p(M, tol, max_n)
    if not v.holds:
        return v
    return _inverse_verdict(M, tol, lambda inv: is_n_second(inv, tol, max_n))


def is_almost_p_first_wrt(M, J, tol: Tolerance = DEFAULT_TOL,
                          max_n: int = MINOR_CAP) -> ClassVerdict:
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    J = proper_index_set(J, n)
    v = is_almost_p(M, tol, max_n)
    if not v.holds:
        return v
    return _inverse_verdict(M, tol, lambda inv: is_n_first_wrt(inv, J, tol, max_n))


# --------------------------------------------------------------------------
# Semipositivity
# --------------------------------------------------------------------------

def is_semipositive(M, tol: Tolerance = DEFAULT_TOL) -> ClassVerdict:
    res = lpfeas.strict_feasible_nonneg(M)
    if res.feasible:
        return ClassVerdict(Status.HOLDS, {"x": res.primal})
    return ClassVerdict(Status.FAILS, {"y": res.dual})


def is_minimally_semipositive(M, tol: Tolerance = DEFAULT_TOL) -> ClassVerdict:
    M = np.asarray(M, dtype=float)
    sp = is_semipositive(M, tol)
    if not sp.holds:
        return sp
    n = M.shape[1]
    for j in range(n):
        # one column of a 1-column matrix leaves an m x 0 matrix: never semipositive
        res = lpfeas.strict_feasible_nonneg(np.delete(M, j, axis=1))
        if res.feasible:
            x = np.insert(res.primal, j, 0.0)
            return ClassVerdict(Status.FAILS, {"column": j, "x": x})
    return sp


def msp_square_crosscheck(M, tol: Tolerance = DEFAULT_TOL) -> ClassVerdict:
    """Square MSP test through inverse nonnegativity."""
    M = np.asarray(M, dtype=float)
    require_square(M)
    try:
        inv = inverse(M, tol)
    except SingularMatrix as exc:
        return ClassVerdict(Status.FAILS, {"singular": str(exc)})
    signs = sign_array(inv, max(1.0, max_abs(inv)), tol)
    bad = np.argwhere(signs < 0)
    if bad.size:
        i, j = (int(t) for t in bad[0])
        return ClassVerdict(Status.FAILS, {"entry": (i, j), "value": float(inv[i, j])})
    return HOLDS


# --------------------------------------------------------------------------
# Batched statuses (sampling oracle)
# --------------------------------------------------------------------------

HOLDS_CODE, FAILS_CODE, UNDECIDED_CODE = 1, -1, 0
_CODES = {Status.HOLDS: HOLDS_CODE, Status.FAILS: FAILS_CODE,
          Status.INDETERMINATE: UNDECIDED_CODE}


def _combine_codes(*codes):
    out = np.full(codes[0].shape, HOLDS_CODE, dtype=np.int8)
    for c in codes:
        out[(c == UNDECIDED_CODE) & (out == HOLDS_CODE)] = UNDECIDED_CODE
    for c in codes:
        out[c == FAILS_CODE] = FAILS_CODE
    return out


def _minor_codes(S, want, tol, max_n, det_want=None):
    n = S.shape[1]
    bases = [max(1.0, b) for b in np.abs(S).max(axis=(1, 2)).tolist()]
    bad = np.zeros(len(S), dtype=bool)
    zero = np.zeros(len(S), dtype=bool)
    for subsets, values in principal_minors_stack(S, max_n):
        k = subsets.shape[1]
        target = det_want if (k == n and det_want is not None) else want
        band = tol.band(np.array([b ** k for b in bases]))[:, None]
        bad |= (target * values < -band).any(axis=1)
        zero |= (np.abs(values) <= band).any(axis=1)
    out = np.where(zero, UNDECIDED_CODE, HOLDS_CODE).astype(np.int8)
    out[bad] = FAILS_CODE
    return out


def _pattern_codes(S, pattern, tol):
    band = tol.band(np.abs(S).max(axis=(1, 2)))[:, None, None]
    bad = (pattern * S < -band).any(axis=(1, 2))
    zero = (np.abs(S) <= band).any(axis=(1, 2))
    out = np.where(zero, UNDECIDED_CODE, HOLDS_CODE).astype(np.int8)
    out[bad] = FAILS_CODE
    return out


def _n_codes(S, pattern, tol, max_n):
    return _combine_codes(_pattern_codes(S, pattern, tol), _minor_codes(S, -1, tol, max_n))


def batch_status(spec: "ClassSpec", S, tol: Tolerance = DEFAULT_TOL,
                 max_n: int = MINOR_CAP) -> np.ndarray:
    """Status codes (1 Holds, -1 Fails, 0 Indeterminate) for a stack ``(s, m, n)``.

    Agrees entry by entry with ``spec.predicate(tol, max_n)`` applied to each
    matrix; the minor conditions are evaluated across the whole stack at once.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 3:
        raise DimensionError(f"expected a stack of matrices, got shape {S.shape}")
    kind, J = spec.kind, spec.J
    if kind in ("sp", "msp"):
        pred = spec.predicate(tol, max_n)
        return np.array([_CODES[pred(M).status] for M in S], dtype=np.int8)
    n = S.shape[1]
    if S.shape[2] != n:
        raise DimensionError(f"class {spec} needs square matrices, got shape {S.shape[1:]}")
    if kind == "p":
        return _minor_codes(S, 1, tol, max_n)
    pattern = -np.ones((n, n)) if J is None else _pattern(n, proper_index_set(J, n))
    if kind in ("n2", "n1"):
        return _n_codes(S, pattern, tol, max_n)
    if n < 2:
        raise DimensionError("almost P-matrices need n >= 2")
    out = _minor_codes(S, 1, tol, max_n, det_want=-1)
    idx = np.flatnonzero(out == HOLDS_CODE)
    invs = []
    for i in idx:
        try:
            invs.append(inverse(S[i], tol))
        except SingularMatrix:
            invs.append(None)
    ok = [j for j, inv in zip(idx, invs) if inv is not None]
    out[[j for j, inv in zip(idx, invs) if inv is None]] = FAILS_CODE
    if ok:
        out[ok] = _n_codes(np.array([inv for inv in invs if inv is not None]), pattern, tol, max_n)
    return out


# --------------------------------------------------------------------------
# Class specs: p | n2 | n1:J | ap2 | ap1:J | sp | msp
# --------------------------------------------------------------------------

_SPEC_RE = re.compile(r"^(p|n2|ap2|sp|msp|n1|ap1)(?::(.+))?$")


@dataclass(frozen=True)
class ClassSpec:
    kind: str
    J: Optional[tuple[int, ...]] = field(default=None)

    @classmethod
    def parse(cls, text: str) -> "ClassSpec":
        m = _SPEC_RE.match(text.strip().lower())
        if not m:
            raise InvalidIndexSet(f"bad class spec {text!r}; expected p|n2|n1:J|ap2|ap1:J|sp|msp")
        kind, jtext = m.groups()
        if kind in ("n1", "ap1"):
            if not jtext:
                raise InvalidIndexSet(f"class {kind} needs an index list, e.g. {kind}:1,3")
            return cls(kind, parse_index_list(jtext))
        if jtext:
            raise InvalidIndexSet(f"class {kind} takes no index list")
        return cls(kind)

    def validate(self, n: int) -> "ClassSpec":
        if self.J is not None:
            proper_index_set(self.J, n)
        return self

    def __str__(self):
        if self.J is None:
            return self.kind
        return f"{self.kind}:{','.join(map(str, one_based(self.J)))}"

    @property
    def needs_square(self):
        return self.kind not in ("sp", "msp")

    def predicate(self, tol: Tolerance = DEFAULT_TOL,
                  max_n: int = MINOR_CAP) -> Callable[[np.ndarray], ClassVerdict]:
        kind, J = self.kind, self.J
        if kind == "p":
            return lambda M: is_p_matrix(M, tol, max_n)
        if kind == "n2":
            return lambda M: is_n_second(M, tol, max_n)
        if kind == "n1":
            return lambda M: is_n_first_wrt(M, J, tol, max_n)
        if kind == "ap2":
            return lambda M: is_almost_p_second(M, tol, max_n)
        if kind == "ap1":
            return lambda M: is_almost_p_first_wrt(M, J, tol, max_n)
        if kind == "sp":
            return lambda M: is_semipositive(M, tol)
        return lambda M: is_minimally_semipositive(M, tol)
