"""Sign non-reversal harnesses.

A vector ``x`` is *reversed* by ``M`` when every product ``x_i (M x)_i`` is
``<= 0``.  The minor-based predicates in :mod:`hullcert.classes` decide
class membership; the functions here probe the matching sign non-reversal
characterizations by random search and check that every reversed vector
has the sign pattern the class dictates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hullcert import hull, lpfeas
from hullcert.classes import ClassSpec
from hullcert.errors import (
    NotCertified,
    NotMember,
    PreconditionError,
    UnisignedInput,
)
from hullcert.matcore import (
    DEFAULT_TOL,
    Tolerance,
    max_abs,
    one_based,
    proper_index_set,
    require_square,
    sign_array,
)

BATCH = 4096
BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class ReversalWitness:
    x: np.ndarray
    products: np.ndarray


class ClaimKind(enum.Enum):
    MUST_BE_ZERO = "MustBeZero"
    UNISIGNED = "Unisigned"
    UNISIGNED_WRT_J = "UnisignedWrtJ"
    STRICT_ORTHANT = "StrictOrthant"
    STRICT_J_ORTHANT = "StrictJOrthant"


@dataclass(frozen=True)
class SignPatternClaim:
    kind: ClaimKind
    J: Optional[tuple[int, ...]] = None


# --------------------------------------------------------------------------
# Vectorized sign helpers
# --------------------------------------------------------------------------

def _vector_signs(X, tol):
    """Row-wise Sign3 of each entry, scaled by the row's max magnitude."""
    X = np.atleast_2d(X)
    scale = np.max(np.abs(X), axis=1, keepdims=True)
    return sign_array(X, scale, tol)


def products(M, X) -> np.ndarray:
    """``x_i (M x)_i`` for each row ``x`` of ``X``."""
    X = np.atleast_2d(X)
    return X * (X @ np.asarray(M, dtype=float).T)


def _reversed_mask(M, X, tol):
    """Rows ``x != 0`` whose products all decide <= 0, with the raw products.

    Reversal is invariant under positive scaling of ``x``, so signs are
    decided on ``x / max|x|`` against the scale ``max|M|``.
    """
    P = products(M, X)
    norm = np.max(np.abs(X), axis=1, keepdims=True)
    nonzero = norm[:, 0] > 0
    Xn = X / np.where(norm > 0, norm, 1.0)
    signs = sign_array(products(M, Xn), max_abs(M), tol)
    return nonzero & np.all(signs <= 0, axis=1), P


def _conclusion_mask(X, claim: SignPatternClaim, tol) -> np.ndarray:
    S = _vector_signs(X, tol)
    kind = claim.kind
    if kind is ClaimKind.MUST_BE_ZERO:
        return np.all(S == 0, axis=1)
    if kind is ClaimKind.UNISIGNED:
        return np.all(S >= 0, axis=1) | np.all(S <= 0, axis=1)
    if kind is ClaimKind.STRICT_ORTHANT:
        return np.all(S > 0, axis=1) | np.all(S < 0, axis=1)
    if claim.J is None:
        raise ValueError(f"{kind.value} needs J")
    e = hull.signature(claim.J, S.shape[1]).astype(np.int8)
    T = S * e  # flips the J^c coordinates
    if kind is ClaimKind.UNISIGNED_WRT_J:
        return np.all(T >= 0, axis=1) | np.all(T <= 0, axis=1)
    return np.all(T > 0, axis=1) | np.all(T < 0, axis=1)


def check_conclusion(x, claim: SignPatternClaim, tol: Tolerance = DEFAULT_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if claim.J is not None:
        proper_index_set(claim.J, x.shape[0])
    return bool(_conclusion_mask(x[None, :], claim, tol)[0])


# --------------------------------------------------------------------------
# Random search for reversed vectors
# --------------------------------------------------------------------------

def _candidates(M, count, rng) -> np.ndarray:
    """Mixed-strategy trial vectors, interleaved by strategy.

    Reversed vectors often live in thin cones, so besides dense Gaussian and
    heavy-tailed draws the mix includes sparse, sign, coordinate vectors and
    preimages ``M^{-1} y`` for coordinate, unisigned and Gaussian ``y``.
    """
    n = M.shape[0]
    try:
        Minv = np.linalg.inv(M) if np.linalg.cond(M) < 1e12 else None
    except np.linalg.LinAlgError:
        Minv = None
    per = -(-count // 8)

    def coordinate():
        X = np.zeros((per, n))
        X[np.arange(per), rng.integers(0, n, per)] = rng.choice((-1.0, 1.0), per)
        return X

    gauss = rng.standard_normal((per, n))
    heavy = rng.standard_cauchy((per, n))
    sparse = rng.standard_normal((per, n)) * (rng.random((per, n)) < 0.5)
    pm = rng.choice((-1.0, 1.0), (per, n))
    coord = coordinate()
    if Minv is not None:
        pre_coord = coordinate() @ Minv.T
        uni = np.abs(rng.standard_normal((per, n))) * rng.choice((-1.0, 1.0), (per, 1))
        pre_uni = uni @ Minv.T
        pre_gauss = rng.standard_normal((per, n)) @ Minv.T
    else:
        pre_coord = rng.standard_normal((per, n))
        pre_uni = rng.standard_normal((per, n))
        pre_gauss = rng.standard_normal((per, n))
    blocks = np.stack([gauss, heavy, sparse, pm, coord, pre_coord, pre_uni, pre_gauss])
    return blocks.transpose(1, 0, 2).reshape(-1, n)[:count]


def _batches(M, trials, rng_seed):
    """Yield candidate batches; batch ``b`` draws from seed ``(rng_seed, b)``."""
    done, b = 0, 0
    while done < trials:
        count = min(BATCH, trials - done)
        rng = np.random.default_rng([int(rng_seed), b])
        yield _candidates(M, count, rng)
        done += count
        b += 1


def reversal_witnesses(M, trials: int, rng_seed: int,
                       tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """All reversed vectors found in ``trials`` samples, with their products."""
    M = np.asarray(M, dtype=float)
    require_square(M)
    xs, ps = [], []
    for X in _batches(M, trials, rng_seed):
        mask, P = _reversed_mask(M, X, tol)
        xs.append(X[mask])
        ps.append(P[mask])
    n = M.shape[0]
    return (np.concatenate(xs) if xs else np.zeros((0, n)),
            np.concatenate(ps) if ps else np.zeros((0, n)))


def find_reversal(M, trials: int, rng_seed: int,
                  tol: Tolerance = DEFAULT_TOL) -> Optional[ReversalWitness]:
    M = np.asarray(M, dtype=float)
    require_square(M)
    for X in _batches(M, trials, rng_seed):
        mask, P = _reversed_mask(M, X, tol)
        hits = np.flatnonzero(mask)
        if hits.size:
            i = int(hits[0])
            return ReversalWitness(X[i].copy(), P[i].copy())
    return None


# --------------------------------------------------------------------------
# Theorem verification
# --------------------------------------------------------------------------

@dataclass
class SnrReport:
    claim: str
    trials: int
    witnesses: int = 0
    violations: list = field(default_factory=list)
    null_condition: Optional[bool] = None
    cone_condition: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        out = {"trials": self.trials, "witnesses": self.witnesses,
               "violations": self.violations, "claim": self.claim}
        if self.null_condition is not None:
            out["null_space_condition"] = self.null_condition
            out["open_cone_condition"] = self.cone_condition
        return out


_SNR_KINDS = ("p", "n2", "n1", "ap2", "ap1")


def verify_snr_theorem(M, spec: ClassSpec, trials: int, rng_seed: int,
                       tol: Tolerance = DEFAULT_TOL, max_violations: int = 20) -> SnrReport:
    """Check the sign non-reversal characterization of ``spec`` on ``M``.

    ``M`` must already belong to the class according to the minor/inverse
    predicates.  Every reversed vector found must match the class's sign
    pattern; for almost-P classes the null-space and open-cone conditions
    are decided by LP as well.
    """
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    if spec.kind not in _SNR_KINDS:
        raise PreconditionError(f"no sign non-reversal characterization for class {spec}")
    spec.validate(n)
    membership = spec.predicate(tol)(M)
    if not membership.holds:
        raise PreconditionError(f"matrix is not certified {spec}: {membership.status.value}")

    report = SnrReport(str(spec), trials)
    X, P = reversal_witnesses(M, trials, rng_seed, tol)
    report.witnesses = int(X.shape[0])

    def flag(rows, reason):
        for i in np.flatnonzero(rows)[:max_violations - len(report.violations)]:
            report.violations.append({"x": X[i].tolist(), "products": P[i].tolist(),
                                      "reason": reason})

    kind, J = spec.kind, spec.J
    if X.shape[0]:
        if kind == "p":
            flag(np.ones(X.shape[0], bool), "P-matrix reversed a nonzero vector")
        elif kind == "n2":
            ok = _conclusion_mask(X, SignPatternClaim(ClaimKind.UNISIGNED), tol)
            flag(~ok, "reversed vector is not unisigned")
        elif kind == "n1":
            ok = _conclusion_mask(X, SignPatternClaim(ClaimKind.UNISIGNED_WRT_J, J), tol)
            flag(~ok, f"reversed vector is not unisigned w.r.t. J={one_based(J)}")
        else:
            strict = (SignPatternClaim(ClaimKind.STRICT_ORTHANT) if kind == "ap2"
                      else SignPatternClaim(ClaimKind.STRICT_J_ORTHANT, J))
            has_zero = np.any(_vector_signs(X, tol) == 0, axis=1)
            zero_ok = _conclusion_mask(X, SignPatternClaim(ClaimKind.MUST_BE_ZERO), tol)
            strict_ok = _conclusion_mask(X, strict, tol)
            flag(has_zero & ~zero_ok, "reversed vector has a zero entry but is nonzero")
            flag(~has_zero & ~strict_ok, f"reversed vector not in the {strict.kind.value} set")

    if kind in ("ap2", "ap1"):
        sigma = np.ones(n) if kind == "ap2" else hull.signature(J, n)
        null = lpfeas.signed_null_vector_exists(M, sigma)
        cone = lpfeas.signed_open_cone_feasible(M, sigma, -sigma)
        report.null_condition = not null.feasible
        report.cone_condition = cone.feasible
        if null.feasible:
            report.violations.append({"x": null.primal.tolist(),
                                      "reason": "null space meets the open orthant"})
        if not cone.feasible:
            report.violations.append({"reason": "open-cone condition infeasible"})
    return report


# --------------------------------------------------------------------------
# Hull-level bounds
# --------------------------------------------------------------------------

def lemma_sign_vector(x) -> np.ndarray:
    """``z_i = +1`` if ``x_i >= 0`` else ``-1`` (raw comparison, no tolerance)."""
    return np.where(np.asarray(x, dtype=float) >= 0, 1.0, -1.0)


def pointwise_bound_check(h: hull.IntervalHull, C, x, tol: float = BOUND_SLACK) -> bool:
    """``x_i (C x)_i >= x_i (I_z x)_i - tol`` for all ``i``, with ``z`` derived from ``x``."""
    C = np.asarray(C, dtype=float)
    if not hull.contains(h, C):
        raise NotMember("C is not a member of the hull")
    x = np.asarray(x, dtype=float)
    Iz = hull.test_matrix_iz(h, lemma_sign_vector(x))
    return bool(np.all(x * (C @ x) >= x * (Iz @ x) - tol))


def uniform_positivity_index(h: hull.IntervalHull, x, tol: Tolerance = DEFAULT_TOL,
                             certificate: Optional[hull.Certificate] = None) -> int:
    """Index ``i`` (0-based) with ``x_i (C x)_i > 0`` for every hull member ``C``.

    Requires an N2-certified hull and a non-unisigned ``x``.  Pass an
    existing ``certificate`` to skip recertification.
    """
    x = np.asarray(x, dtype=float)
    if check_conclusion(x, SignPatternClaim(ClaimKind.UNISIGNED), tol):
        raise UnisignedInput("x must have both a positive and a negative entry")
    cert = certificate
    if cert is None or cert.target_class.kind != "n2":
        cert = hull.certify_n2(h, tol)
    if not cert.certified:
        raise NotCertified(f"hull is not certified n2 ({cert.status.value})")
    Iz = hull.test_matrix_iz(h, lemma_sign_vector(x))
    p = x * (Iz @ x)
    signs = sign_array(p, max_abs(Iz) * max_abs(x) ** 2, tol)
    hits = np.flatnonzero(signs > 0)
    if not hits.size:
        raise NotCertified("no uniformly positive index; certificate is unsound")
    return int(hits[0])
