"""Finite truncations of block Toeplitz operators on the weighted Bergman space.

Operators are written in the orthonormal basis ``z**i / sqrt(lambda_p(i))``
tensored with the standard basis of ``C^n``; the flat index of
``(level i, component l)`` is ``i * n + l``. In that basis the operator
adjoint is the matrix conjugate transpose.

A symbol whose terms change degree by at most ``d`` maps polynomials of
degree ``<= N`` into degree ``<= N + d``, so the rectangular truncation
captures ``T f`` exactly and the Gram form of the self-commutator on
degree ``<= N`` polynomials carries no truncation error.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .moments import check_alpha, lambda_p, lambda_pq, log_lambda_p, log_lambda_pq
from .symbols import BlockSymbol, Convention, adjoint_matrix, adjoint_symbol, circulant_row_of

__all__ = [
    "CoeffSequence",
    "TruncatedToeplitz",
    "CommutatorForm",
    "OracleVerdict",
    "project_monomial_coeff",
    "build_truncated",
    "commutator_form",
    "numeric_hypo_test",
    "series_form",
    "grouped_circulant_inner",
]

NOT_HYPONORMAL = "not-hyponormal"
CONSISTENT = "consistent-up-to-N"


@dataclass(frozen=True, eq=False)
class CoeffSequence:
    """Finitely supported ``K_j(z) = sum_i z**(j+i) c_i`` with ``c_i`` in ``C^n``.

    ``coeffs[i]`` is the raw (monomial-basis) coefficient vector ``c_i``.
    """

    start: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[1] < 1:
            raise ValueError("coeffs must be a (levels, n) array")
        if self.start < 0:
            raise ValueError("start must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return self.coeffs.shape[1]

    @property
    def degree(self):
        """Largest degree carrying a coefficient slot."""
        return self.start + self.coeffs.shape[0] - 1

    def dense(self, levels=None):
        """Raw coefficients indexed by degree ``0 .. levels-1``."""
        levels = self.degree + 1 if levels is None else levels
        out = np.zeros((max(levels, self.degree + 1), self.n), dtype=complex)
        out[self.start : self.degree + 1] = self.coeffs
        return out[:levels]

    def orthonormal_coords(self, alpha, levels):
        """Flat coordinates in the orthonormal basis for degrees ``< levels``."""
        if self.degree >= levels:
            raise ValueError(f"sequence reaches degree {self.degree}, outside {levels} levels")
        raw = self.dense(levels)
        scale = np.sqrt(lambda_p(alpha, np.arange(levels)))
        return (raw * scale[:, None]).ravel()

    @classmethod
    def from_orthonormal(cls, alpha, n, vec):
        vec = np.asarray(vec, dtype=complex).reshape(-1, n)
        scale = np.sqrt(lambda_p(alpha, np.arange(vec.shape[0])))
        return cls(0, vec / scale[:, None])


@dataclass(frozen=True, eq=False)
class TruncatedToeplitz:
    alpha: float
    phi: BlockSymbol
    n_levels: int
    out_levels: int
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class CommutatorForm:
    """Hermitian matrix of ``f -> ||T f||^2 - ||T' f||^2`` on degree ``<= N``.

    ``T'`` is the Toeplitz operator of the adjoint symbol formed under
    ``convention``; with the conjugate-transpose convention this is
    ``<[T*, T] f, f>``.
    """

    alpha: float
    phi: BlockSymbol
    n_levels: int
    convention: Convention
    gram: np.ndarray
    pos: np.ndarray
    neg: np.ndarray
    hermitian_defect: float

    @property
    def scale(self):
        """Magnitude of the two Gram pieces (max absolute row sum)."""
        a = np.abs(self.pos).sum(axis=1).max(initial=0.0)
        b = np.abs(self.neg).sum(axis=1).max(initial=0.0)
        return float(max(a, b))

    def block(self, N):
        """Leading block acting on degree ``<= N``."""
        k = (N + 1) * self.phi.n
        return self.gram[:k, :k]

    def quadratic(self, K):
        """``<gram k, k>`` for a coefficient sequence ``K`` inside the truncation."""
        v = K.orthonormal_coords(self.alpha, self.n_levels + 1)
        return float(np.real(np.vdot(v, self.gram @ v)))


@dataclass(frozen=True, eq=False)
class OracleVerdict:
    status: str
    min_eigenvalue: float
    scale: float
    levels_checked: int
    convention: Convention
    trajectory: tuple = field(default_factory=tuple)
    witness: np.ndarray | None = None

    @property
    def relative_min_eigenvalue(self):
        return self.min_eigenvalue / self.scale if self.scale > 0 else 0.0

    @property
    def not_hyponormal(self):
        return self.status == NOT_HYPONORMAL

    def witness_sequence(self, alpha, n):
        if self.witness is None:
            return None
        return CoeffSequence.from_orthonormal(alpha, n, self.witness)

    def to_dict(self):
        out = {
            "status": self.status,
            "min_eigenvalue": self.min_eigenvalue,
            "relative_min_eigenvalue": self.relative_min_eigenvalue,
            "scale": self.scale,
            "levels_checked": self.levels_checked,
            "convention": self.convention.value,
            "trajectory": list(self.trajectory),
        }
        if self.witness is not None:
            out["witness"] = [[float(z.real), float(z.imag)] for z in self.witness]
        return out


def project_monomial_coeff(alpha, p, q):
    """Coefficient of ``z**(p-q)`` in ``P(conj(z)**q z**p)``; zero when ``p < q``."""
    if p < q:
        return 0.0
    return float(np.exp(log_lambda_pq(alpha, p, q) - log_lambda_p(alpha, p)))


def build_truncated(alpha, phi, N):
    """Matrix of ``T_phi`` from degree ``<= N`` into degree ``<= N + d``."""
    alpha = check_alpha(alpha)
    if N < 0:
        raise ValueError("N must be nonnegative")
    n, d = phi.n, phi.shift_bound
    rows = N + d + 1
    M = np.zeros((rows * n, (N + 1) * n), dtype=complex)
    log_lam = log_lambda_p(alpha, np.arange(rows + max((t.p for t in phi.terms), default=0) + 1))
    for term in phi.terms:
        p, q = term.p, term.q
        for i in range(max(0, q - p), N + 1):
            m = p - q + i
            coef = np.exp(
                log_lambda_pq(alpha, p + i, q) - log_lam[p + i] + 0.5 * (log_lam[m] - log_lam[i])
            )
            M[m * n : (m + 1) * n, i * n : (i + 1) * n] += coef * term.coeff
    M.setflags(write=False)
    return TruncatedToeplitz(alpha, phi, N, N + d, M)


def commutator_form(alpha, phi, N, conv=Convention.CONJUGATE_TRANSPOSE):
    """Exact Gram matrix of ``||T_phi f||^2 - ||T_phi' f||^2`` for ``deg f <= N``."""
    conv = Convention.parse(conv)
    T = build_truncated(alpha, phi, N).matrix
    S = build_truncated(alpha, adjoint_symbol(phi, conv), N).matrix
    pos = T.conj().T @ T
    neg = S.conj().T @ S
    G = pos - neg
    defect = float(np.max(np.abs(G - G.conj().T), initial=0.0))
    G = 0.5 * (G + G.conj().T)
    for a in (G, pos, neg):
        a.setflags(write=False)
    return CommutatorForm(check_alpha(alpha), phi, N, conv, G, pos, neg, defect)


def numeric_hypo_test(alpha, phi, N_max=30, tol=1e-10, conv=Convention.CONJUGATE_TRANSPOSE):
    """Search the degree-``<= N`` compressions, ``N = 0 .. N_max``, for a negative direction.

    Returns an :class:`OracleVerdict`. ``not-hyponormal`` comes with the
    eigenvector of the offending minimum eigenvalue as a certificate; the
    quadratic form is exact, so the certificate is genuine. Otherwise the
    verdict is only ``consistent-up-to-N``.
    """
    if N_max < 0 or not tol > 0:
        raise ValueError("need N_max >= 0 and tol > 0")
    form = commutator_form(alpha, phi, N_max, conv)
    scale = form.scale
    threshold = -tol * scale
    traj = []
    prev = np.inf
    lam, vec, N = 0.0, None, 0
    for N in range(N_max + 1):
        w, V = np.linalg.eigh(form.block(N))
        lam, vec = float(w[0]), V[:, 0]
        # nested compressions: Cauchy interlacing forces a non-increasing minimum
        if lam > prev + 1e-12 * max(scale, 1e-300):
            raise RuntimeError(f"minimum eigenvalue increased from {prev} to {lam} at N={N}")
        prev = lam
        traj.append(lam)
        if lam < threshold:
            return OracleVerdict(NOT_HYPONORMAL, lam, scale, N, form.convention, tuple(traj), vec)
    return OracleVerdict(CONSISTENT, lam, scale, N, form.convention, tuple(traj), None)


# -- series expansions ------------------------------------------------------


def _matrix_inner(X, c, Y, c2):
    # <X c, Y c2> = sum_k (X c)_k conj((Y c2)_k)
    return complex(np.vdot(Y @ c2, X @ c))


def grouped_circulant_inner(x, c, y, c2):
    """``<cir[x] c, cir[y] c2>`` in the grouped form

    ``sum_k x_k conj(y_k) <c, c2> + (sum_{k1!=k2} conj(y_k1) x_k2) (sum_l c_l conj(sum_l c2_l) - <c, c2>)``.

    This agrees with the matrix inner product for ``n <= 2`` only; for
    larger ``n`` the off-diagonal autocorrelations of a circulant are not
    all equal.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    diag = complex(np.sum(x * np.conj(y)))
    off = complex(np.conj(np.sum(y)) * np.sum(x)) - diag
    cc = complex(np.vdot(c2, c))
    return diag * cc + off * (complex(np.sum(c) * np.conj(np.sum(c2))) - cc)


@functools.lru_cache(maxsize=4096)
def _lam(alpha, p):
    return lambda_p(alpha, p)


@functools.lru_cache(maxsize=4096)
def _lampq(alpha, p, q):
    return lambda_pq(alpha, p, q)


def _classify(phi):
    ts = phi.terms
    if len(ts) == 1:
        return "single", ts
    if len(ts) == 2:
        a, b = ts
        if a.shift == b.shift:
            return ("same", ts) if a.shift >= 0 else ("same-reversed", ts)
        if a.shift == -b.shift:
            return "mixed", (a, b) if a.shift > 0 else (b, a)
    raise ShapeError(
        "no series expansion for this exponent pattern: "
        + ", ".join(f"(p={t.p}, q={t.q})" for t in ts)
    )


def _series_value(alpha, regime, mats, exps, c, inner):
    L = c.shape[0]
    zero = np.zeros(c.shape[1], dtype=complex)

    def cv(i):
        return c[i] if 0 <= i < L else zero

    def sq(X, v):
        return inner(X, v, X, v).real

    total = 0.0
    if regime == "single":
        (A, Ah), ((p, q),) = mats, exps
        for i in range(L):
            if p + i >= q:
                total += _lampq(alpha, p + i, q) * sq(A, cv(i))
            if q + i >= p:
                total -= _lampq(alpha, q + i, p) * sq(Ah, cv(i))
        return total

    (A, Ah, B, Bh), ((p, q), (s, t)) = mats, exps
    d = p - q
    if regime == "same":
        for i in range(L):
            v = cv(i)
            X = _lam(alpha, p + i) * _lam(alpha, s + i) / _lam(alpha, d + i)
            total += _lampq(alpha, p + i, q) * sq(A, v) + _lampq(alpha, s + i, t) * sq(B, v)
            total += 2.0 * inner(A, v, B, v).real * X
            if i >= d:
                Y = _lam(alpha, q + i) * _lam(alpha, t + i) / _lam(alpha, i - d)
                total -= _lampq(alpha, q + i, p) * sq(Ah, v) + _lampq(alpha, t + i, s) * sq(Bh, v)
                total -= 2.0 * inner(Ah, v, Bh, v).real * Y
        return total

    # mixed: A raises degree by d, B lowers it by d (t - s == d)
    for i in range(L):
        v = cv(i)
        total += _lampq(alpha, p + i, q) * sq(A, v) - _lampq(alpha, t + i, s) * sq(Bh, v)
        if i >= d:
            total += _lampq(alpha, s + i, t) * sq(B, v) - _lampq(alpha, q + i, p) * sq(Ah, v)
        if i + 2 * d < L:
            w = cv(i + 2 * d)
            X = _lam(alpha, p + i) * _lam(alpha, d + t + i) / _lam(alpha, d + i)
            Y = _lam(alpha, t + i) * _lam(alpha, d + p + i) / _lam(alpha, d + i)
            total += 2.0 * inner(A, v, B, w).real * X
            total -= 2.0 * inner(Ah, w, Bh, v).real * Y
    return total


def series_form(alpha, phi, K, conv=Convention.ENTRYWISE, check_grouped=True):
    """Evaluate ``||T_phi K||^2 - ||T_phi' K||^2`` from the monomial series.

    Uses only moment weights and coefficient sums, never the operator
    matrices. Supported shapes: one term; two terms with equal degree
    shifts; two terms with opposite degree shifts. Other shapes raise
    :class:`ShapeError`.

    When every coefficient is a circulant with ``n <= 2`` the grouped
    circulant expansion is evaluated too and must agree.
    """
    alpha = check_alpha(alpha)
    conv = Convention.parse(conv)
    if K.n != phi.n:
        raise ValueError(f"sequence has n={K.n}, symbol has n={phi.n}")
    regime, terms = _classify(phi)
    if regime == "same-reversed":
        # ||T f||^2 - ||T' f||^2 is antisymmetric under phi -> phi'
        return -series_form(alpha, adjoint_symbol(phi, conv), K, conv, check_grouped)
    c = K.dense()
    exps = tuple((t.p, t.q) for t in terms)
    mats = []
    for t in terms:
        mats += [t.coeff, adjoint_matrix(t.coeff, conv)]
    value = _series_value(alpha, regime, tuple(mats), exps, c, _matrix_inner)

    if check_grouped and phi.n <= 2:
        rows = [circulant_row_of(M) for M in mats]
        if all(r is not None for r in rows):
            grouped = _series_value(alpha, regime, tuple(rows), exps, c, grouped_circulant_inner)
            scale = sum(float(np.sum(np.abs(c @ M.T) ** 2)) for M in mats)
            if abs(grouped - value) > 1e-9 * max(scale, abs(value)):
                raise ArithmeticError(f"grouped circulant series {grouped} != entrywise series {value}")
    return float(value)
