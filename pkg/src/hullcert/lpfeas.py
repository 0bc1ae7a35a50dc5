"""Open-cone feasibility through phase-1 simplex and theorem-of-alternatives certificates.

Every system handled here is positively homogeneous, so a strict system
``G u > 0`` (with ``u >= 0``) is solvable iff the closed system ``G u >= 1``
is.  All public functions reduce to the core problem

    find u >= 0 with  G u >= b,   b in {0, 1}^m

whose alternative is ``y >= 0, G^T y <= 0, b^T y > 0``.  The phase-1
tableau yields ``u`` when feasible and the simplex multipliers ``y`` when
not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hullcert.matcore import as_matrix

PIVOT_TOL = 1e-10
CERT_TOL = 1e-7


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of one feasibility query.

    ``primal`` is expressed in the caller's variables (``x``); ``dual`` is
    the alternative-system certificate over the rows of the homogenized
    system ``system_matrix @ u >= system_rhs``, and ``u`` is the
    homogenized solution behind ``primal``.
    """

    feasible: bool
    primal: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None
    system_matrix: Optional[np.ndarray] = field(default=None, repr=False)
    system_rhs: Optional[np.ndarray] = field(default=None, repr=False)
    u: Optional[np.ndarray] = field(default=None, repr=False)

    def __bool__(self):
        return self.feasible

    def verify(self, tol: float = CERT_TOL) -> bool:
        """Re-check whichever certificate is present by direct substitution."""
        G, b = self.system_matrix, self.system_rhs
        if self.feasible:
            return self.dual is None and self.primal is not None and _primal_ok(G, b, self.u, tol)
        return self.primal is None and _dual_ok(G, b, self.dual, tol)


def _primal_ok(G, b, u, tol=CERT_TOL):
    if u is None:
        return False
    return bool(np.all(u >= -tol) and np.all(G @ u >= b - tol))


def _dual_ok(G, b, y, tol=CERT_TOL):
    if y is None:
        return False
    return bool(np.all(y >= -tol) and np.all(G.T @ y <= tol) and b @ y > tol)


def _phase_one(G: np.ndarray, b: np.ndarray):
    """Dense phase-1 simplex under Bland's rule.

    Solves ``min 1^T a`` over ``G u - s + a = b`` with ``u, s, a >= 0``.
    Returns ``(u, y, value)`` with ``y`` the simplex multipliers of the final
    basis.

    The tableaux here are tiny, so rows are Python lists: per-pivot numpy
    call overhead would dominate the arithmetic.
    """
    m, n = G.shape
    ncol = n + m + m
    art = n + m
    # columns: u (n) | surplus s (m) | artificial a (m) | rhs
    T = []
    for i, (g, bi) in enumerate(zip(G.tolist(), b.tolist())):
        row = g + [0.0] * (2 * m) + [bi]
        row[n + i] = -1.0
        row[art + i] = 1.0
        T.append(row)
    # reduced-cost row for objective sum(a) with the artificial basis
    cost = [-sum(r[j] for r in T) for j in range(art)] + [0.0] * m + [-sum(b.tolist())]
    T.append(cost)
    basis = list(range(art, ncol))
    tol = PIVOT_TOL

    for _ in range(50 * (ncol + m) + 1000):
        col = next((j for j in range(ncol) if cost[j] < -tol), -1)
        if col < 0:
            break
        row, best = -1, 0.0
        for i in range(m):
            a = T[i][col]
            if a > tol:
                r = T[i][-1] / a
                if row < 0 or r < best - tol * max(1.0, abs(best)):
                    row, best = i, r
                elif r <= best + tol * max(1.0, abs(best)) and basis[i] < basis[row]:
                    row = i
        if row < 0:
            # phase-1 objective is bounded below by 0; cannot happen exactly
            break
        prow = T[row]
        inv = 1.0 / prow[col]
        prow = [v * inv for v in prow]
        prow[col] = 1.0
        T[row] = prow
        for i in range(m + 1):
            if i == row:
                continue
            r = T[i]
            f = r[col]
            if f != 0.0:
                T[i] = [v - f * w for v, w in zip(r, prow)]
                T[i][col] = 0.0
        cost = T[m]
        basis[row] = col

    u = np.zeros(ncol)
    u[basis] = [T[i][-1] for i in range(m)]
    A = np.array([r[art:ncol] for r in T[:m]])
    c_basis = np.array([1.0 if j >= art else 0.0 for j in basis])
    return u[:n], c_basis @ A, -T[m][-1]


def solve_homogenized(G, b) -> tuple[bool, Optional[np.ndarray], Optional[np.ndarray]]:
    """Decide ``exists u >= 0 : G u >= b``; return ``(feasible, u, y)``.

    Exactly one of ``u`` and ``y`` is returned, and it has been verified.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = G.shape
    if n == 0:
        # no variables: feasible iff b <= 0; alternative y picks a row with b_i > 0
        if np.all(b <= 0):
            return True, np.zeros(0), None
        y = (b > 0).astype(float)
        return False, None, y
    u, y, value = _phase_one(G, b)
    u = np.maximum(u, 0.0)
    if _primal_ok(G, b, u):
        return True, u, None
    y = np.maximum(y, 0.0)
    if _dual_ok(G, b, y):
        return False, None, y
    # numerically degenerate basis: solve the alternative system directly,
    # y >= 0 with -G^T y >= 0 and b^T y >= 1
    alt_G = np.vstack([-G.T, b[None, :]])
    alt_b = np.concatenate([np.zeros(n), [1.0]])
    y2, _, _ = _phase_one(alt_G, alt_b)
    y2 = np.maximum(y2, 0.0)
    if _dual_ok(G, b, y2):
        return False, None, y2
    if value <= 1e-9 * max(1.0, float(np.abs(b).sum())):
        return True, u, None
    return False, None, y


def _result(G, b, feasible, u, y, primal=None) -> FeasibilityResult:
    if feasible:
        return FeasibilityResult(True, primal=u if primal is None else primal,
                                 system_matrix=G, system_rhs=b, u=u)
    return FeasibilityResult(False, dual=y, system_matrix=G, system_rhs=b)


def strict_feasible_nonneg(A) -> FeasibilityResult:
    """Is there ``x >= 0`` with ``A x > 0``?

    Infeasible results carry ``y >= 0, y != 0`` with ``A^T y <= 0``.
    A matrix with zero columns is never semipositive.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be 2-D")
    if A.shape[1] > 0:
        as_matrix(A)
    b = np.ones(A.shape[0])
    feasible, u, y = solve_homogenized(A, b)
    return _result(A, b, feasible, u, y)


def _signs(sigma, length, name):
    s = np.asarray(sigma, dtype=float)
    if s.shape != (length,) or not np.all(np.abs(s) == 1):
        raise ValueError(f"{name} must be a length-{length} vector over {{+1, -1}}")
    return s


def signed_open_cone_feasible(A, sigma_dom, sigma_img) -> FeasibilityResult:
    """Is there ``x`` with ``sigma_dom * x > 0`` and ``sigma_img * (A x) > 0``?

    With ``u = sigma_dom * x >= 0`` this is semipositivity of the stacked
    matrix ``[I ; D_img A D_dom]``.
    """
    A = as_matrix(A)
    m, n = A.shape
    sd = _signs(sigma_dom, n, "sigma_dom")
    si = _signs(sigma_img, m, "sigma_img")
    G = np.vstack([np.eye(n), si[:, None] * A * sd[None, :]])
    b = np.ones(n + m)
    feasible, u, y = solve_homogenized(G, b)
    return _result(G, b, feasible, u, y, primal=None if u is None else sd * u)


def signed_null_vector_exists(A, sigma) -> FeasibilityResult:
    """Is there ``x`` with ``A x = 0`` and ``sigma * x > 0``?"""
    A = as_matrix(A)
    m, n = A.shape
    s = _signs(sigma, n, "sigma")
    AD = A * s[None, :]
    G = np.vstack([AD, -AD, np.eye(n)])
    b = np.concatenate([np.zeros(2 * m), np.ones(n)])
    feasible, u, y = solve_homogenized(G, b)
    return _result(G, b, feasible, u, y, primal=None if u is None else s * u)
