"""Closed-form hyponormality criteria for monomial block symbols.

Every checker returns a :class:`CriterionVerdict` carrying the quantities it
compared, so a verdict can be audited without re-running anything.

Coefficient arguments are either square complex matrices or
:class:`~hypobergman.symbols.Circulant` rows; passing a ``Circulant``
selects the circulant form of a criterion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, ShapeError
from .moments import WAlphaConfig, check_alpha, log_lambda_pq, w_alpha
from .symbols import BlockSymbol, Circulant, circulant_row_of, circulant_sums

__all__ = [
    "CriterionVerdict",
    "IFF_HYPONORMAL",
    "IFF_NOT_HYPONORMAL",
    "SUFFICIENT_HOLDS",
    "SUFFICIENT_FAILS",
    "NECESSARY_HOLDS",
    "NECESSARY_VIOLATED",
    "NORMAL",
    "common_phase_defect",
    "lambda_star_bound",
    "check_single_term",
    "check_two_term_sufficient",
    "check_two_term_necessary",
    "check_opposite_pair",
    "check_normal",
]

IFF_HYPONORMAL = "iff-hyponormal"
IFF_NOT_HYPONORMAL = "iff-not-hyponormal"
SUFFICIENT_HOLDS = "sufficient-holds"
SUFFICIENT_FAILS = "sufficient-fails"
NECESSARY_HOLDS = "necessary-holds"
NECESSARY_VIOLATED = "necessary-violated"
NORMAL = "normal"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of one criterion.

    ``kind`` only carries meaning when ``hypothesis_ok`` is true; otherwise
    the criterion's hypotheses were not met and it makes no claim.
    """

    kind: str
    detail: dict = field(default_factory=dict)
    hypothesis_ok: bool = True
    criterion: str = ""

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "kind": self.kind,
            "hypothesis_ok": self.hypothesis_ok,
            "detail": _jsonable(self.detail),
        }


def _as_matrix(A):
    if isinstance(A, Circulant):
        return A.matrix()
    M = np.asarray(A, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"coefficient must be square, got shape {M.shape}")
    return M


def common_phase_defect(A):
    """Largest ``|Im(a_i conj(a_j))| / ||row||^2`` over the rows of ``A``.

    Zero exactly when each row is a real vector times one unimodular scalar,
    which is when the row's outer-product difference ``a a^H - conj(a) a^T``
    vanishes (that difference is skew-Hermitian, so it is PSD only if zero).
    """
    A = _as_matrix(A)
    worst = 0.0
    for row in A:
        nrm = float(np.vdot(row, row).real)
        if nrm == 0.0:
            continue
        skew = np.imag(np.outer(row, row.conj()))
        worst = max(worst, float(np.max(np.abs(skew))) / nrm)
    return worst


def _log_ratio(alpha, hi_p, hi_q, lo_p, lo_q):
    return float(log_lambda_pq(alpha, hi_p, hi_q) - log_lambda_pq(alpha, lo_p, lo_q))


# -- one term ---------------------------------------------------------------


def check_single_term(A, p, q, tol=1e-10):
    """Criterion for ``A z^p conj(z)^q``.

    When each row of ``A`` has common phase (or, for a circulant ``A``,
    ``S >= (n-1)|C|``), the operator is hyponormal exactly when ``p >= q``.
    Otherwise the criterion is silent and ``hypothesis_ok`` is false.
    A zero coefficient gives the zero operator, reported as ``normal``.
    """
    circ = isinstance(A, Circulant)
    M = _as_matrix(A)
    name = "single-term"
    base = {"p": int(p), "q": int(q), "n": M.shape[0]}
    if not np.any(M):
        return CriterionVerdict(NORMAL, {**base, "zero": True}, True, name)
    if circ:
        S, C = circulant_sums(A)
        n = A.n
        margin = S - (n - 1) * abs(C)
        ok = margin >= -tol * S
        detail = {**base, "S": S, "C": C, "margin": margin}
    else:
        defect = common_phase_defect(M)
        ok = defect <= tol
        detail = {**base, "phase_defect": defect, "real": bool(np.all(np.abs(M.imag) <= tol * np.abs(M).max()))}
    if not ok:
        return CriterionVerdict(SUFFICIENT_FAILS, detail, False, name)
    kind = IFF_HYPONORMAL if p >= q else IFF_NOT_HYPONORMAL
    return CriterionVerdict(kind, detail, True, name)


# -- two terms, same orientation -------------------------------------------


def _check_same_orientation(p, q, s, t):
    if not (p - q == s - t and p > q):
        raise HypothesisError(f"need p - q == s - t > 0 (got p={p}, q={q}, s={s}, t={t})")


def check_two_term_sufficient(A, B, p, q, s, t, tol=1e-10):
    """Sufficient condition for ``A z^p conj(z)^q + B z^s conj(z)^t`` with ``p-q = s-t > 0``.

    Matrix form: ``Re(a_ij conj(b_ij)) >= 0`` entrywise, common-phase rows
    in ``A`` and ``B``, and every row outer product ``a_k b_k^H`` diagonal.
    A second matrix route accepts real ``A``, ``B`` whose row outer products
    ``a_k b_k^T`` are positive semidefinite forms. Circulant form compares
    the three sums ``S``, ``C`` of ``a``, of ``b`` and of the pair.
    """
    _check_same_orientation(p, q, s, t)
    name = "two-term-sufficient"
    base = {"p": int(p), "q": int(q), "s": int(s), "t": int(t)}
    if isinstance(A, Circulant) and isinstance(B, Circulant):
        if A.n != B.n:
            raise ValueError("circulants differ in size")
        n = A.n
        Sa, Ca = circulant_sums(A)
        Sb, Cb = circulant_sums(B)
        a, b = A.row, B.row
        Sab = float(np.sum(np.real(np.conj(a) * b)))
        Cab = float(np.real(np.sum(b) * np.conj(np.sum(a)))) - Sab
        margins = {
            "a": Sa - (n - 1) * abs(Ca),
            "b": Sb - (n - 1) * abs(Cb),
            "ab": Sab - (n - 1) * abs(Cab),
        }
        scale = max(Sa, Sb, 1e-300)
        ok = all(m >= -tol * scale for m in margins.values())
        detail = {**base, "S_a": Sa, "C_a": Ca, "S_b": Sb, "C_b": Cb, "S_ab": Sab, "C_ab": Cab, "margins": margins}
        return CriterionVerdict(SUFFICIENT_HOLDS if ok else SUFFICIENT_FAILS, detail, True, name)

    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape != B.shape:
        raise ValueError("coefficients differ in shape")
    amax = float(np.abs(A).max(initial=0.0))
    bmax = float(np.abs(B).max(initial=0.0))
    re_prod = float(np.min(np.real(A * B.conj()), initial=0.0))
    cond_re = re_prod >= -tol * amax * bmax
    pa, pb = common_phase_defect(A), common_phase_defect(B)
    off = 0.0
    for a, b in zip(A, B):
        outer = np.abs(np.outer(a, b.conj()))
        np.fill_diagonal(outer, 0.0)
        nrm = float(np.linalg.norm(a) * np.linalg.norm(b))
        if nrm > 0:
            off = max(off, float(outer.max()) / nrm)
    diag_ok = cond_re and pa <= tol and pb <= tol and off <= tol

    # real coefficients with row outer products that are PSD forms
    real = bool(np.all(np.abs(A.imag) <= tol * max(amax, 1e-300)) and np.all(np.abs(B.imag) <= tol * max(bmax, 1e-300)))
    psd_min = None
    if real:
        psd_min = 0.0
        for a, b in zip(A.real, B.real):
            nrm = float(np.linalg.norm(a) * np.linalg.norm(b))
            if nrm == 0:
                continue
            sym = 0.5 * (np.outer(a, b) + np.outer(b, a))
            psd_min = min(psd_min, float(np.linalg.eigvalsh(sym)[0]) / nrm)
    real_ok = real and psd_min >= -tol

    detail = {
        **base,
        "min_re_product": re_prod,
        "phase_defect_a": pa,
        "phase_defect_b": pb,
        "offdiag_outer": off,
        "diagonal_route": diag_ok,
        "real": real,
        "real_outer_min_eig": psd_min,
        "real_route": real_ok,
    }
    ok = diag_ok or real_ok
    return CriterionVerdict(SUFFICIENT_HOLDS if ok else SUFFICIENT_FAILS, detail, True, name)


# -- two terms, opposite orientation ---------------------------------------


def lambda_star_bound(alpha, p, q, s, t, cfg=None):
    """``lambda* = max(endpoint ratio, W)`` for ``p - q = t - s > 0``.

    The endpoint ratio is ``lambda_pq(t+i, s) / lambda_pq(p+i, q)`` at
    ``i = p-q-1`` when ``t >= p`` and at ``i = 0`` otherwise. Returns
    ``(lambda_star, info)``.
    """
    alpha = check_alpha(alpha)
    d = p - q
    if not (d > 0 and t - s == d):
        raise HypothesisError(f"need p - q == t - s > 0 (got p={p}, q={q}, s={s}, t={t})")
    i_end = d - 1 if t >= p else 0
    ratio = float(np.exp(_log_ratio(alpha, t + i_end, s, p + i_end, q)))
    W = w_alpha(alpha, p, q, t, s, cfg)
    lam = max(ratio, W.value)
    info = {
        "endpoint_index": i_end,
        "endpoint_ratio": ratio,
        "w_alpha": W.to_dict(),
        "lambda_star": lam,
        "lambda_source": "endpoint" if ratio >= W.value else "w_alpha",
    }
    return lam, info


def check_two_term_necessary(A, B, p, q, s, t, alpha, cfg=None, tol=1e-10):
    """Necessary condition for ``A z^p conj(z)^q + B z^s conj(z)^t`` with ``p-q = t-s > 0``.

    Hyponormality forces ``Re(A^H A) - lambda* Re(B^H B)`` to be positive
    semidefinite; this one matrix test covers the whole family of
    column-subset inequalities with real weights, because those are the
    quadratic forms of its principal submatrices.
    """
    lam, info = lambda_star_bound(alpha, p, q, s, t, cfg if cfg is not None else WAlphaConfig())
    circ = isinstance(A, Circulant) and isinstance(B, Circulant)
    rowA = A.row if isinstance(A, Circulant) else None
    rowB = B.row if isinstance(B, Circulant) else None
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape != B.shape:
        raise ValueError("coefficients differ in shape")
    Ma = np.real(A.conj().T @ A)
    Mb = np.real(B.conj().T @ B)
    Ma = 0.5 * (Ma + Ma.T)
    Mb = 0.5 * (Mb + Mb.T)
    if np.isinf(lam):
        bad = bool(np.any(Mb))
        w, V = np.linalg.eigh(-Mb)
        cond_min = -np.inf if bad else 0.0
        vec = V[:, 0]
        scale = 1.0
    else:
        w, V = np.linalg.eigh(Ma - lam * Mb)
        cond_min, vec = float(w[0]), V[:, 0]
        scale = max(float(np.linalg.norm(Ma, 2)), lam * float(np.linalg.norm(Mb, 2)), 1e-300)
        bad = cond_min < -tol * scale
    detail = {
        "p": int(p),
        "q": int(q),
        "s": int(s),
        "t": int(t),
        "alpha": float(alpha),
        **info,
        "min_eigenvalue": cond_min,
        "scale": scale,
        "eigenvector": vec.real,
    }
    if circ:
        n = A.shape[0]
        Sa, Ca = circulant_sums(rowA)
        Sb, Cb = circulant_sums(rowB)
        c = np.ones(n)
        c[-1] = 1 - n
        detail["example"] = {
            "S_a": Sa,
            "C_a": Ca,
            "S_b": Sb,
            "C_b": Cb,
            "lhs": Sa - Ca,
            "rhs": lam * (Sb - Cb),
            "holds": bool(Sa - Ca >= lam * (Sb - Cb) - tol * max(Sa, lam * Sb, 1e-300)),
            "sum_zero_form": float(c @ Ma @ c - lam * (c @ Mb @ c)) if np.isfinite(lam) else None,
        }
    kind = NECESSARY_VIOLATED if bad else NECESSARY_HOLDS
    return CriterionVerdict(kind, detail, True, "two-term-necessary")


def _fourier(row):
    # eigenvalues of cir[row]: sum_k row_k w^(k m)
    return np.fft.ifft(row) * row.size


def check_opposite_pair(a_coeff, b_coeff, p, q, tol=1e-10):
    """Criterion for ``a z^p conj(z)^q + b z^q conj(z)^p`` with ``p > q``.

    Scalar coefficients (multiples of the identity): hyponormal iff
    ``|a| >= |b|``. Circulant coefficients: with ``D = C_a - C_b`` the
    test is ``(S_a - S_b) + (n-1) D >= 0`` when ``D <= 0`` and
    ``(S_a - S_b) - D >= 0`` when ``D > 0``.
    """
    if not p > q:
        raise HypothesisError(f"need p > q (got p={p}, q={q})")
    name = "opposite-pair"
    base = {"p": int(p), "q": int(q)}
    if isinstance(a_coeff, Circulant) or isinstance(b_coeff, Circulant):
        if not (isinstance(a_coeff, Circulant) and isinstance(b_coeff, Circulant)):
            raise ValueError("both coefficients must be circulants")
        if a_coeff.n != b_coeff.n:
            raise ValueError("circulants differ in size")
        n = a_coeff.n
        Sa, Ca = circulant_sums(a_coeff)
        Sb, Cb = circulant_sums(b_coeff)
        delta = Ca - Cb
        if delta <= 0:
            branch, margin = "D<=0", (Sa - Sb) + (n - 1) * delta
        else:
            branch, margin = "D>0", (Sa - Sb) - delta
        fa, fb = _fourier(a_coeff.row), _fourier(b_coeff.row)
        detail = {
            **base,
            "n": n,
            "S_a": Sa,
            "C_a": Ca,
            "S_b": Sb,
            "C_b": Cb,
            "delta": delta,
            "branch": branch,
            "margin": margin,
            "fourier_margin_min": float(np.min(np.abs(fa) ** 2 - np.abs(fb) ** 2)),
        }
        ok = margin >= -tol * max(Sa, Sb, 1e-300)
    else:
        a, b = complex(a_coeff), complex(b_coeff)
        margin = abs(a) ** 2 - abs(b) ** 2
        detail = {**base, "abs_a": abs(a), "abs_b": abs(b), "margin": margin}
        ok = margin >= -tol * max(abs(a) ** 2, abs(b) ** 2, 1e-300)
    return CriterionVerdict(IFF_HYPONORMAL if ok else IFF_NOT_HYPONORMAL, detail, True, name)


# -- normal shapes -------------------------------------------------------------


def check_normal(phi, tol=1e-10):
    """Recognize ``A |z|^(2p) + B |z|^(2s)`` with Hermitian or circulant coefficients.

    Such symbols give normal operators (circulants commute with their
    adjoints and with each other). Raises :class:`ShapeError` for any
    other symbol.
    """
    if not isinstance(phi, BlockSymbol):
        raise TypeError("check_normal expects a BlockSymbol")
    if any(t.p != t.q for t in phi.terms):
        raise ShapeError("every term must have p == q")
    mats = [t.coeff for t in phi.terms]
    scale = max((float(np.abs(M).max(initial=0.0)) for M in mats), default=0.0)
    herm = max((float(np.abs(M - M.conj().T).max(initial=0.0)) for M in mats), default=0.0)
    circ = all(circulant_row_of(M, tol * max(scale, 1e-300)) is not None for M in mats)
    detail = {"exponents": [t.p for t in phi.terms], "hermitian_defect": herm, "circulant": circ}
    if herm <= tol * max(scale, 1e-300):
        detail["route"] = "hermitian"
    elif circ:
        detail["route"] = "circulant"
    else:
        raise ShapeError("coefficients must all be Hermitian or all circulant")
    return CriterionVerdict(NORMAL, detail, True, "normal")
