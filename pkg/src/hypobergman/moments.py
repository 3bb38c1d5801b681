"""Weighted Bergman moments and the supremum functional built from them.

Everything here is evaluated in log space through ``scipy.special.gammaln``
so that exponents up to ~1e6 never overflow. The monomial norms are taken
with respect to ``(alpha + 1) (1 - |z|^2)^alpha dA`` where ``dA`` is area
measure normalised to total mass one, so ``lambda_p(alpha, 0) == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, HypothesisError

__all__ = [
    "check_alpha",
    "log_lambda_p",
    "log_lambda_pq",
    "lambda_p",
    "lambda_pq",
    "LemmaCheck",
    "lemma22_holds",
    "WAlphaConfig",
    "WAlphaResult",
    "w_alpha",
    "w_alpha_ratio",
    "w_alpha_terms",
]


def check_alpha(alpha):
    """Return ``alpha`` as a float, raising :class:`DomainError` if ``alpha <= -1``."""
    alpha = float(alpha)
    if not alpha > -1.0 or not np.isfinite(alpha):
        raise DomainError(f"alpha must exceed -1 (got {alpha})")
    return alpha


def _as_exponent(x, name):
    arr = np.asarray(x)
    if arr.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise DomainError(f"{name} must be a nonnegative integer")
        arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise DomainError(f"{name} must be a nonnegative integer")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def log_lambda_p(alpha, p):
    """``log Gamma(p+1) + log Gamma(alpha+2) - log Gamma(p+alpha+2)``."""
    alpha = check_alpha(alpha)
    p = _as_exponent(p, "p")
    return _scalar_or_array(gammaln(p + 1.0) + gammaln(alpha + 2.0) - gammaln(p + alpha + 2.0))


def log_lambda_pq(alpha, p, q):
    """Logarithm of :func:`lambda_pq`; requires ``p >= q`` elementwise."""
    alpha = check_alpha(alpha)
    p = _as_exponent(p, "p")
    q = _as_exponent(q, "q")
    if np.any(p < q):
        raise DomainError("lambda_pq requires p >= q (the projection vanishes otherwise)")
    d = p - q
    out = (
        2.0 * gammaln(p + 1.0)
        + gammaln(d + alpha + 2.0)
        + gammaln(alpha + 2.0)
        - 2.0 * gammaln(p + alpha + 2.0)
        - gammaln(d + 1.0)
    )
    return _scalar_or_array(out)


def lambda_p(alpha, p):
    """Squared norm of ``z**p``: ``Gamma(p+1) Gamma(alpha+2) / Gamma(p+alpha+2)``.

    Accepts an integer or an integer array for ``p``.

    >>> lambda_p(0, 2)
    0.3333333333333333
    """
    return _scalar_or_array(np.exp(log_lambda_p(alpha, p)))


def lambda_pq(alpha, p, q):
    """Squared norm of ``P(conj(z)**q z**p)`` for ``p >= q``.

    Equals ``lambda_p(p)**2 / lambda_p(p - q)``; computed from the gamma
    expression directly rather than through that identity.
    """
    return _scalar_or_array(np.exp(log_lambda_pq(alpha, p, q)))


@dataclass(frozen=True)
class LemmaCheck:
    holds: bool
    lhs: float
    rhs: float


def lemma22_holds(case, alpha, p, q, s=0, t=0, i=0, slack=1e-12):
    """Evaluate one instance of the moment inequalities used by the criteria.

    ``case`` is one of

    ``"i"``
        ``lambda_pq(p+i, q) >= lambda_pq(q+i, p)`` for ``p >= q``, ``i >= p-q``.
    ``"ii"``
        ``L(p+i) L(s+i) / L(p-q+i) >= L(q+i) L(t+i) / L(q-p+i)`` for
        ``i >= p-q == s-t > 0`` where ``L = lambda_p``.
    ``"iii-compare"``
        for ``0 <= i < i+1 < p-q == t-s`` compares
        ``r(i) = lambda_pq(t+i, s) / lambda_pq(p+i, q)`` with ``r(i+1)``:
        non-decreasing when ``t >= p``, non-increasing when ``t < p``.
        ``lhs`` is ``r(i)`` and ``rhs`` is ``r(i+1)``.

    ``slack`` is relative to the larger side. Raises :class:`HypothesisError`
    when the case's precondition fails.
    """
    if case == "i":
        if p < q or i < p - q:
            raise HypothesisError("case i needs p >= q and i >= p - q")
        lhs = lambda_pq(alpha, p + i, q)
        rhs = lambda_pq(alpha, q + i, p)
        return LemmaCheck(bool(lhs >= rhs - slack * max(lhs, rhs)), lhs, rhs)
    if case == "ii":
        d = p - q
        if not (d > 0 and s - t == d and i >= d):
            raise HypothesisError("case ii needs i >= p - q == s - t > 0")
        lhs = np.exp(log_lambda_p(alpha, p + i) + log_lambda_p(alpha, s + i) - log_lambda_p(alpha, d + i))
        rhs = np.exp(log_lambda_p(alpha, q + i) + log_lambda_p(alpha, t + i) - log_lambda_p(alpha, i - d))
        return LemmaCheck(bool(lhs >= rhs - slack * max(lhs, rhs)), float(lhs), float(rhs))
    if case == "iii-compare":
        d = p - q
        if not (d > 0 and t - s == d and 0 <= i and i + 1 < d):
            raise HypothesisError("case iii-compare needs 0 <= i < i + 1 < p - q == t - s")
        r0 = np.exp(log_lambda_pq(alpha, t + i, s) - log_lambda_pq(alpha, p + i, q))
        r1 = np.exp(log_lambda_pq(alpha, t + i + 1, s) - log_lambda_pq(alpha, p + i + 1, q))
        tol = slack * max(r0, r1)
        holds = r1 >= r0 - tol if t >= p else r1 <= r0 + tol
        return LemmaCheck(bool(holds), float(r0), float(r1))
    raise ValueError(f"unknown case {case!r}")


@dataclass(frozen=True)
class WAlphaConfig:
    """Scan controls for :func:`w_alpha`.

    ``denom_floor`` is relative: a point is excluded when its denominator
    ``lambda_pq(p+i, q) - lambda_pq(q+i, p)`` is below ``denom_floor`` times
    the subtracted moment ``lambda_pq(q+i, p)``.
    """

    i_max: int = 10_000
    denom_floor: float = 1e-14
    tail_probe: int = 5
    tail_max: int = 10**6

    def __post_init__(self):
        if self.i_max < 0 or self.tail_probe < 0:
            raise ValueError("i_max and tail_probe must be nonnegative")
        if not self.denom_floor > 0:
            raise ValueError("denom_floor must be positive")


@dataclass(frozen=True)
class WAlphaResult:
    value: float
    source: str  # "scan", "tail" or "constant"
    attained_at: int
    scan_max: float
    tail_max: float
    excluded: tuple = field(default_factory=tuple)
    unbounded: bool = False

    def to_dict(self):
        return {
            "value": self.value,
            "source": self.source,
            "attained_at": self.attained_at,
            "scan_max": self.scan_max,
            "tail_max": self.tail_max,
            "excluded": list(self.excluded),
            "unbounded": self.unbounded,
        }


def _log1p_sum(delta, y, k):
    # sum_{j<k} log1p(delta / (y + j)) for integer k >= 0
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    for j in range(k):
        out += np.log1p(delta / (y + j))
    return out


def _log_moment_gap(alpha, hi, lo, i):
    # log(lambda_pq(hi+i, lo) / lambda_pq(lo+i, hi)) for i >= hi - lo > 0;
    # every gamma difference has an integer shift, so it collapses to log1p terms
    d = hi - lo
    base = np.asarray(i, dtype=float)
    a1 = alpha + 1.0
    return 2.0 * _log1p_sum(-a1, lo + base + alpha + 2.0, d) + _log1p_sum(a1, base - d + 1.0, 2 * d)


def _log_lower_ratio(alpha, s, q, i):
    # log(lambda_pq(s+i, s+d) / lambda_pq(q+i, q+d)); the (i-d) factors cancel
    base = np.asarray(i, dtype=float)
    a1 = alpha + 1.0
    if s >= q:
        return 2.0 * _log1p_sum(-a1, q + base + alpha + 2.0, s - q)
    return -2.0 * _log1p_sum(-a1, s + base + alpha + 2.0, q - s)


def w_alpha_terms(alpha, p, q, t, s, i):
    """Pieces of the ratio inside :func:`w_alpha` at integer(s) ``i >= p - q``.

    Returns ``(num, den, rel_num, rel_den, ratio)`` where ``num``/``den`` are
    the two moment differences, ``rel_*`` are those differences divided by
    the subtracted moment, and ``ratio = num / den`` evaluated without
    cancellation.
    """
    alpha = check_alpha(alpha)
    i = np.asarray(i, dtype=np.int64)
    rel_num = np.expm1(_log_moment_gap(alpha, t, s, i))
    rel_den = np.expm1(_log_moment_gap(alpha, p, q, i))
    num = lambda_pq(alpha, s + i, t) * rel_num
    den = lambda_pq(alpha, q + i, p) * rel_den
    ratio = np.exp(_log_lower_ratio(alpha, s, q, i)) * rel_num / rel_den
    return num, den, rel_num, rel_den, ratio


def w_alpha_ratio(alpha, p, q, t, s, i):
    """The ratio inside :func:`w_alpha` at integer(s) ``i >= p - q``."""
    return _scalar_or_array(w_alpha_terms(alpha, p, q, t, s, i)[4])


def w_alpha(alpha, p, q, t, s, cfg=None):
    """Supremum over integers ``i >= p - q`` of

    ``(lambda_pq(t+i, s) - lambda_pq(s+i, t)) / (lambda_pq(p+i, q) - lambda_pq(q+i, p))``.

    The integer range ``[p-q, cfg.i_max]`` is scanned exhaustively and
    ``cfg.tail_probe`` geometrically spaced points up to ``cfg.tail_max``
    are probed beyond it. Requires ``p - q == t - s > 0``.
    """
    cfg = cfg or WAlphaConfig()
    alpha = check_alpha(alpha)
    d = p - q
    if not (d > 0 and t - s == d):
        raise HypothesisError(f"w_alpha needs p - q == t - s > 0 (got p={p}, q={q}, t={t}, s={s})")
    if cfg.i_max < d:
        raise HypothesisError(f"scan range empty: i_max={cfg.i_max} < p - q = {d}")

    idx = np.arange(d, cfg.i_max + 1, dtype=np.int64)
    _, _, rel_num, rel_den, ratio = w_alpha_terms(alpha, p, q, t, s, idx)
    bad = rel_den < cfg.denom_floor
    excluded = tuple(int(k) for k in idx[bad])
    unbounded = bool(np.any(rel_num[bad] > cfg.denom_floor))
    ratios = np.where(bad, -np.inf, ratio)
    k = int(np.argmax(ratios))
    scan_max = float(ratios[k])

    tail_max = -np.inf
    tail_at = -1
    if cfg.tail_probe and cfg.tail_max > cfg.i_max:
        probes = np.unique(
            np.round(np.geomspace(cfg.i_max + 1, cfg.tail_max, cfg.tail_probe)).astype(np.int64)
        )
        _, _, tn, td, tr = w_alpha_terms(alpha, p, q, t, s, probes)
        tbad = td < cfg.denom_floor
        unbounded = unbounded or bool(np.any(tn[tbad] > cfg.denom_floor))
        excluded += tuple(int(k) for k in probes[tbad])
        tr = np.where(tbad, -np.inf, tr)
        if np.any(~tbad):
            j = int(np.argmax(tr))
            tail_max, tail_at = float(tr[j]), int(probes[j])

    finite = ratios[np.isfinite(ratios)]
    if finite.size and np.ptp(finite) <= 1e-12 * max(abs(scan_max), 1e-300) and (
        not np.isfinite(tail_max) or abs(tail_max - scan_max) <= 1e-12 * abs(scan_max)
    ):
        source, value, at = "constant", scan_max, d
    elif tail_max > scan_max:
        source, value, at = "tail", tail_max, tail_at
    else:
        source, value, at = "scan", scan_max, int(idx[k])
    if unbounded:
        value = float("inf")
    return WAlphaResult(
        value=float(value),
        source=source,
        attained_at=at,
        scan_max=scan_max,
        tail_max=float(tail_max),
        excluded=excluded,
        unbounded=unbounded,
    )
