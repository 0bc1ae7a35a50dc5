"""Dense small-matrix linear algebra with tolerance-aware sign decisions.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 and shape
``(rows, cols)``; :func:`as_matrix` is the single validation gate.  Index
sets are sorted tuples of 0-based indices and are rendered 1-based only at
the I/O boundary (:func:`one_based`).
"""

from __future__ import annotations

import enum
import functools
import itertools
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.linalg

from hullcert.errors import (
    ComplexityError,
    DimensionError,
    InvalidIndexSet,
    SingularMatrix,
)

MINOR_CAP = 16
INVERSE_RESIDUAL = 1e-6


@dataclass(frozen=True)
class Tolerance:
    """Two-parameter Zero band: ``|x| <= abs_eps + rel_eps * scale``."""

    abs_eps: float = 1e-9
    rel_eps: float = 1e-9

    def __post_init__(self):
        if not (self.abs_eps >= 0 and self.rel_eps >= 0):
            raise ValueError("tolerances must be nonnegative")

    def band(self, scale):
        return self.abs_eps + self.rel_eps * scale


DEFAULT_TOL = Tolerance()


class Sign3(enum.IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class IllConditionedWarning(RuntimeWarning):
    pass


def sign_of(x: float, scale: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> Sign3:
    if abs(x) <= tol.band(scale):
        return Sign3.ZERO
    return Sign3.POSITIVE if x > 0 else Sign3.NEGATIVE


def sign_array(x, scale=1.0, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Vectorized :func:`sign_of`; ``scale`` broadcasts against ``x``.

    Returns an int8 array with entries in {-1, 0, 1}.
    """
    x = np.asarray(x, dtype=float)
    band = tol.abs_eps + tol.rel_eps * np.asarray(scale, dtype=float)
    out = np.sign(x).astype(np.int8)
    out[np.abs(x) <= band] = 0
    return out


def max_abs(M) -> float:
    M = np.asarray(M, dtype=float)
    return float(np.max(np.abs(M))) if M.size else 0.0


# --------------------------------------------------------------------------
# Matrix validation and JSON
# --------------------------------------------------------------------------

def as_matrix(data) -> np.ndarray:
    """Return ``data`` as a validated float64 2-D array (copy)."""
    try:
        M = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"matrix data is ragged or non-numeric: {exc}") from None
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"expected a nonempty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError("matrix entries must be finite")
    return M


def require_square(M: np.ndarray, what: str = "matrix") -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {M.shape}")
    return M.shape[0]


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"rows": m, "cols": n, "data": [[...], ...]}``."""
    if not isinstance(obj, dict) or "data" not in obj:
        raise DimensionError('matrix JSON must be an object with a "data" field')
    data = obj["data"]
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise DimensionError('"data" must be a nonempty list of rows')
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise DimensionError("ragged matrix rows")
    M = as_matrix(data)
    rows, cols = obj.get("rows", M.shape[0]), obj.get("cols", M.shape[1])
    if (rows, cols) != M.shape:
        raise DimensionError(f"declared shape {(rows, cols)} does not match data {M.shape}")
    return M


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=float)
    return {"rows": M.shape[0], "cols": M.shape[1], "data": M.tolist()}


# --------------------------------------------------------------------------
# Index sets
# --------------------------------------------------------------------------

def index_set(indices: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate 0-based indices against ``range(n)``; return the sorted tuple."""
    idx = tuple(sorted(set(int(i) for i in indices)))
    if any(i < 0 or i >= n for i in idx):
        raise InvalidIndexSet(f"index out of range for dimension {n}: {one_based(idx)}")
    return idx


def proper_index_set(indices: Iterable[int], n: int) -> tuple[int, ...]:
    idx = index_set(indices, n)
    if not idx or len(idx) == n:
        raise InvalidIndexSet(f"J must be a nonempty proper subset of <{n}>, got {one_based(idx)}")
    return idx


def complement(J: Sequence[int], n: int) -> tuple[int, ...]:
    js = set(J)
    return tuple(i for i in range(n) if i not in js)


def one_based(idx: Iterable[int]) -> list[int]:
    return [int(i) + 1 for i in idx]


def parse_index_list(text: str) -> tuple[int, ...]:
    """Parse a 1-based comma list such as ``"1,3"`` into 0-based indices."""
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidIndexSet(f"bad index list {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise InvalidIndexSet(f"indices must be positive integers, got {text!r}")
    return tuple(sorted(set(v - 1 for v in vals)))


def submatrix(M, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    r = index_set(rows, M.shape[0])
    c = index_set(cols, M.shape[1])
    return M[np.ix_(r, c)]


# --------------------------------------------------------------------------
# Determinants and principal minors
# --------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _subsets(n: int, k: int) -> np.ndarray:
    out = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)
    out.flags.writeable = False
    return out


def _det_stack(S: np.ndarray) -> np.ndarray:
    """Determinants of a stack ``(b, k, k)``.

    LAPACK ``getrf`` (LU with partial pivoting) factors each matrix of the
    stack independently, so a matrix gets the same value alone or inside a
    larger stack. Sizes 1 and 2 use the closed form, which is exact on
    small integer entries.
    """
    k = S.shape[-1]
    if k == 1:
        return S[..., 0, 0].copy()
    if k == 2:
        return S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
    return np.linalg.det(S)


def determinant(M) -> float:
    M = np.asarray(M, dtype=float)
    require_square(M)
    return float(_det_stack(M[None, :, :])[0])


def principal_minors_by_size(M, max_n: int = MINOR_CAP):
    """Yield ``(subsets, values)`` per size ``k = 1..n``.

    ``subsets`` is an int array ``(C(n,k), k)`` in lexicographic order and
    ``values`` the matching determinants.  Consumers that short-circuit stop
    iterating early and skip the larger sizes.
    """
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    if n > max_n:
        raise ComplexityError(f"principal-minor enumeration capped at n={max_n}, got n={n}")
    for k in range(1, n + 1):
        subsets = _subsets(n, k)
        stack = M[subsets[:, :, None], subsets[:, None, :]]
        yield subsets, _det_stack(stack)


def principal_minors_stack(S, max_n: int = MINOR_CAP):
    """:func:`principal_minors_by_size` over a stack ``(s, n, n)``.

    Yields ``(subsets, values)`` with ``values`` of shape ``(s, C(n,k))``;
    row ``i`` equals the single-matrix result for ``S[i]`` exactly.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {S.shape}")
    n = S.shape[1]
    if n > max_n:
        raise ComplexityError(f"principal-minor enumeration capped at n={max_n}, got n={n}")
    for k in range(1, n + 1):
        subsets = _subsets(n, k)
        stack = S[:, subsets[:, :, None], subsets[:, None, :]]
        yield subsets, _det_stack(stack)


def principal_minors(M, max_n: int = MINOR_CAP) -> Iterator[tuple[tuple[int, ...], float]]:
    """All ``2**n - 1`` principal minors, by increasing size then lexicographic."""
    for subsets, values in principal_minors_by_size(M, max_n):
        for s, v in zip(subsets, values):
            yield tuple(int(i) for i in s), float(v)


# --------------------------------------------------------------------------
# LU, inverse, null space
# --------------------------------------------------------------------------

def lu_factor(M, tol: Tolerance = DEFAULT_TOL):
    """Packed LU with partial pivoting; raises :class:`SingularMatrix`.

    Singular means some pivot satisfies ``|u_jj| <= abs_eps + rel_eps*max|M|``.
    """
    M = np.asarray(M, dtype=float)
    require_square(M)
    with warnings.catch_warnings():
        # exact singularity is reported through the pivot check below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    threshold = tol.band(max_abs(M))
    bad = np.flatnonzero(pivots <= threshold)
    if bad.size:
        j = int(bad[0])
        raise SingularMatrix(f"pivot {lu[j, j]:.3e} in column {j + 1} below {threshold:.3e}")
    return lu, piv


def lu_solve(lu, piv, rhs) -> np.ndarray:
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def inverse(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    n = require_square(M)
    lu, piv = lu_factor(M, tol)
    inv = lu_solve(lu, piv, np.eye(n))
    residual = max_abs(M @ inv - np.eye(n))
    if residual > INVERSE_RESIDUAL * max(1.0, max_abs(M)):
        warnings.warn(
            f"inverse residual {residual:.2e} exceeds bound; matrix is ill-conditioned",
            IllConditionedWarning,
            stacklevel=2,
        )
    return inv


def null_space_basis(M, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Kernel basis from reduced row-echelon form.

    One vector per free column, with a 1 in that column.  Columns whose best
    remaining pivot lies in the Zero band are treated as free.
    """
    R = np.array(M, dtype=float, copy=True)
    m, n = R.shape
    threshold = tol.band(max_abs(R))
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        p = row + int(np.argmax(np.abs(R[row:, col])))
        if abs(R[p, col]) <= threshold:
            R[row:, col] = 0.0
            continue
        R[[row, p]] = R[[p, row]]
        R[row] /= R[row, col]
        others = np.arange(m) != row
        R[others] -= np.outer(R[others, col], R[row])
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(n)
        v[f] = 1.0
        for r, pc in enumerate(pivots):
            v[pc] = -R[r, f]
        basis.append(v)
    return basis
