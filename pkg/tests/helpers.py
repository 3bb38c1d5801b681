"""Independent oracles and random generators shared by the test modules."""

import itertools
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from hypobergman.bergman_op import CoeffSequence
from hypobergman.symbols import BlockSymbol, Circulant


def radial_moment(alpha, k):
    """``||z^k||^2 = (alpha+1) int_0^1 u^k (1-u)^alpha du`` by adaptive quadrature."""
    val, _ = quad(lambda u: u**k, 0.0, 1.0, weight="alg", wvar=(0.0, alpha), epsabs=0.0, epsrel=1e-13, limit=200)
    return (alpha + 1.0) * val


def lambda_pq_quad(alpha, p, q):
    # P(conj(z)^q z^p) = (m(p) / m(p-q)) z^(p-q), so lambda_pq = m(p)^2 / m(p-q)
    return radial_moment(alpha, p) ** 2 / radial_moment(alpha, p - q)


def lambda_pq_exact0(p, q):
    """Exact ``lambda_pq`` at ``alpha = 0``: ``(p-q+1) / (p+1)^2``."""
    return Fraction(p - q + 1, (p + 1) ** 2)


def w_ratio_exact0(p, q, t, s, i):
    num = lambda_pq_exact0(t + i, s) - lambda_pq_exact0(s + i, t)
    den = lambda_pq_exact0(p + i, q) - lambda_pq_exact0(q + i, p)
    return num / den


def cgauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_coeff(rng, n, circulant=False):
    if circulant:
        return Circulant(cgauss(rng, n)).matrix()
    return cgauss(rng, (n, n))


def random_symbol(rng, n=None, kind=None, circulant=None, max_exp=5):
    """A random symbol with one of the shapes that have series expansions."""
    n = int(rng.integers(1, 4)) if n is None else n
    kind = ["single", "same", "mixed"][int(rng.integers(0, 3))] if kind is None else kind
    circ = bool(rng.integers(0, 2)) if circulant is None else circulant
    p, q = (int(x) for x in rng.integers(0, max_exp + 1, 2))
    A = random_coeff(rng, n, circ)
    if kind == "single":
        return BlockSymbol.single(A, p, q)
    d = p - q
    B = random_coeff(rng, n, circ)
    if kind == "same":
        t = int(rng.integers(max(0, -d), max_exp + 1))
        return BlockSymbol.pair(A, p, q, B, t + d, t)
    s = int(rng.integers(max(0, -d), max_exp + 1))
    return BlockSymbol.pair(A, p, q, B, s, s + d)


def random_sequence(rng, n, max_levels=6, max_start=2):
    L = int(rng.integers(1, max_levels + 1))
    return CoeffSequence(int(rng.integers(0, max_start + 1)), cgauss(rng, (L, n)))


def generalized_min(Ma, Mb):
    w, V = np.linalg.eigh(Mb)
    R = V / np.sqrt(w)
    return float(np.linalg.eigvalsh(R.T @ Ma @ R)[0])


def subset_family_holds(A, B, lam, rng, samples=500):
    n = A.shape[0]
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            C = rng.standard_normal((samples, r))
            lhs = np.sum(np.abs(C @ A[:, S].T) ** 2, axis=1)
            rhs = np.sum(np.abs(C @ B[:, S].T) ** 2, axis=1)
            if np.any(lhs < lam * rhs - 1e-10 * (lhs + lam * rhs)):
                return False
    return True
