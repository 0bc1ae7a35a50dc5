"""Seeded generators of class members and hulls for the test suite.

Constructions (all certified afterwards by the predicates under test):

* P: strictly row diagonally dominant with positive diagonal.
* N2: ``eps*I - a b^T`` with ``a, b > 0`` and ``eps < min a_i b_i``; every
  principal minor is ``eps^(k-1) (eps - sum_S a_i b_i) < 0``.
* N1(J): ``D N2 D`` with ``D = diag(e^J)``; minors are unchanged and the
  entry signs flip on the cross blocks.
* AP2 / AP1(J): inverses of N2 / N1(J).
* inverse-nonnegative: inverse of an entrywise nonnegative matrix; a
  strictly positive one keeps nearby hulls inverse-nonnegative too.
"""

import itertools

import numpy as np

from hullcert import classes
from hullcert.hull import IntervalHull, signature


def random_p(n, rng):
    M = rng.uniform(-1, 1, (n, n))
    np.fill_diagonal(M, 0.0)
    M[np.diag_indices(n)] = np.abs(M).sum(axis=1) + rng.uniform(0.1, 1.0, n)
    return M


def random_n2(n, rng, noise=0.05):
    while True:
        a = rng.uniform(0.5, 2.0, n)
        b = rng.uniform(0.5, 2.0, n)
        eps = rng.uniform(0.05, 0.9) * np.min(a * b)
        M = eps * np.eye(n) - np.outer(a, b)
        M += noise * rng.uniform(-1, 1, (n, n)) * np.abs(M)
        if classes.is_n_second(M).holds:
            return M


def random_n1(n, J, rng, noise=0.05):
    e = signature(J, n)
    return e[:, None] * random_n2(n, rng, noise) * e[None, :]


def random_ap2(n, rng):
    while True:
        M = np.linalg.inv(random_n2(n, rng))
        if classes.is_almost_p_second(M).holds:
            return M


def random_ap1(n, J, rng):
    while True:
        M = np.linalg.inv(random_n1(n, J, rng))
        if classes.is_almost_p_first_wrt(M, J).holds:
            return M


def random_inverse_nonneg(n, rng, density=1.0):
    """Inverse of ``N >= 0``; with ``density < 1`` some off-diagonal entries of N are 0."""
    while True:
        N = rng.uniform(0.1, 1, (n, n)) * (rng.random((n, n)) < density) + np.diag(rng.uniform(0.5, 2.0, n))
        if abs(np.linalg.det(N)) > 1e-3:
            return np.linalg.inv(N)


def random_proper_subset(n, rng):
    while True:
        mask = rng.random(n) < 0.5
        if 0 < mask.sum() < n:
            return tuple(int(i) for i in np.flatnonzero(mask))


def proper_subsets(n):
    for k in range(1, n):
        yield from itertools.combinations(range(n), k)


def member(kind, n, rng, J=None):
    if kind == "p":
        return random_p(n, rng)
    if kind == "n2":
        return random_n2(n, rng)
    if kind == "n1":
        return random_n1(n, J, rng)
    if kind == "ap2":
        return random_ap2(n, rng)
    if kind == "ap1":
        return random_ap1(n, J, rng)
    if kind == "sp":
        return rng.uniform(-1, 1, (n, n)) + rng.uniform(0, 1.5)
    if kind == "msp":
        return random_inverse_nonneg(n, rng)
    raise ValueError(kind)


def fit(M, bound):
    """Positive rescaling into [-bound, bound]; every class here is scale invariant."""
    return M * (bound / max(np.max(np.abs(M)), 1e-300))


def random_hull(center, rng, max_radius=0.5):
    """Hull around ``center`` with entrywise radius in [0, max_radius].

    Corners are assigned to A and B at random so ``A <= B`` does not hold.
    """
    r = rng.uniform(0, max_radius) * rng.random(center.shape)
    lo, hi = center - r, center + r
    swap = rng.random(center.shape) < 0.5
    return IntervalHull(np.where(swap, hi, lo), np.where(swap, lo, hi))


def hull_for_class(kind, n, rng, J=None):
    """Random hull with entries in [-5, 5]: half centred on a class member, half uniform.

    N-class hulls are resampled until max(a_ii, b_ii) < 0.
    """
    while True:
        if rng.random() < 0.5:
            center = fit(member(kind, n, rng, J), 4.5)
        else:
            center = rng.uniform(-4.5, 4.5, (n, n))
        h = random_hull(center, rng)
        if kind in ("n1", "n2") and not np.all(np.diag(h.upper) < 0):
            continue
        return h
