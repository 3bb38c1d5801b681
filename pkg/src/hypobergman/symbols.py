"""Matrix-valued monomial symbols ``sum_j A_j z**p_j conj(z)**q_j``.

Symbols are immutable. Terms sharing an exponent pair are merged on
construction, in order of first appearance, so two symbols describing the
same function compare equal.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Convention",
    "MonomialTerm",
    "BlockSymbol",
    "Circulant",
    "make_circulant",
    "circulant_row_of",
    "adjoint_symbol",
    "adjoint_matrix",
    "circulant_sums",
    "parse_symbol",
    "symbol_to_json",
]


class Convention(enum.Enum):
    """How the coefficient of an adjoint symbol is formed.

    ``CONJUGATE_TRANSPOSE`` gives the true Hilbert-space adjoint.
    ``ENTRYWISE`` conjugates entries in place, which is what the series
    expansions with coefficients ``conj(a_kl)`` in unchanged index order use.
    """

    CONJUGATE_TRANSPOSE = "ct"
    ENTRYWISE = "ew"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {
            "ct": cls.CONJUGATE_TRANSPOSE,
            "conjugate-transpose": cls.CONJUGATE_TRANSPOSE,
            "ew": cls.ENTRYWISE,
            "entrywise": cls.ENTRYWISE,
            "entrywise-conjugate": cls.ENTRYWISE,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown adjoint convention {value!r}") from None


def adjoint_matrix(A, conv):
    conv = Convention.parse(conv)
    A = np.asarray(A, dtype=complex)
    return A.conj().T.copy() if conv is Convention.CONJUGATE_TRANSPOSE else A.conj()


def _freeze(A):
    A = np.array(A, dtype=complex)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class MonomialTerm:
    coeff: np.ndarray
    p: int
    q: int

    def __post_init__(self):
        A = np.asarray(self.coeff, dtype=complex)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ValueError(f"coefficient must be a nonempty square matrix, got shape {A.shape}")
        if int(self.p) != self.p or int(self.q) != self.q or self.p < 0 or self.q < 0:
            raise ValueError("exponents must be nonnegative integers")
        object.__setattr__(self, "coeff", _freeze(A))
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))

    @property
    def n(self):
        return self.coeff.shape[0]

    @property
    def shift(self):
        """Degree change ``p - q`` applied to analytic monomials."""
        return self.p - self.q

    def __eq__(self, other):
        if not isinstance(other, MonomialTerm):
            return NotImplemented
        return (self.p, self.q) == (other.p, other.q) and np.array_equal(self.coeff, other.coeff)

    def __hash__(self):
        return hash((self.p, self.q, self.coeff.tobytes()))


class BlockSymbol:
    """A finite sum of matrix monomials with a common block size ``n``."""

    __slots__ = ("n", "terms", "shift_bound")

    def __init__(self, terms, n=None):
        merged = {}
        for term in terms:
            if not isinstance(term, MonomialTerm):
                term = MonomialTerm(*term)
            key = (term.p, term.q)
            if key in merged:
                merged[key] = merged[key] + term.coeff
            else:
                merged[key] = np.array(term.coeff)
        sizes = {A.shape[0] for A in merged.values()}
        if n is not None:
            sizes.add(int(n))
        if len(sizes) != 1:
            raise ValueError(f"terms disagree on block size: {sorted(sizes)}")
        object.__setattr__(self, "n", sizes.pop())
        ts = tuple(MonomialTerm(A, p, q) for (p, q), A in merged.items())
        object.__setattr__(self, "terms", ts)
        object.__setattr__(self, "shift_bound", max((abs(t.shift) for t in ts), default=0))

    def __setattr__(self, name, value):
        raise AttributeError("BlockSymbol is immutable")

    @classmethod
    def single(cls, A, p, q):
        return cls([MonomialTerm(A, p, q)])

    @classmethod
    def pair(cls, A, p, q, B, s, t):
        return cls([MonomialTerm(A, p, q), MonomialTerm(B, s, t)])

    def __eq__(self, other):
        if not isinstance(other, BlockSymbol):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.terms))

    def __repr__(self):
        parts = ", ".join(f"(p={t.p}, q={t.q})" for t in self.terms)
        return f"BlockSymbol(n={self.n}, terms=[{parts}])"

    def scaled_term(self, index, factor):
        """Copy of the symbol with term ``index`` multiplied by ``factor``."""
        ts = list(self.terms)
        t = ts[index]
        ts[index] = MonomialTerm(t.coeff * factor, t.p, t.q)
        return BlockSymbol(ts, n=self.n)

    def is_zero(self):
        return all(not np.any(t.coeff) for t in self.terms)


@dataclass(frozen=True, eq=False)
class Circulant:
    """Circulant matrix stored by its first row ``(c_1, ..., c_n)``."""

    row: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.row, dtype=complex).ravel()
        if r.size == 0:
            raise ValueError("circulant row must be nonempty")
        object.__setattr__(self, "row", _freeze(r))

    @property
    def n(self):
        return self.row.size

    def matrix(self):
        n = self.n
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return self.row[idx]

    def __eq__(self, other):
        return isinstance(other, Circulant) and np.array_equal(self.row, other.row)

    def __hash__(self):
        return hash(self.row.tobytes())


def make_circulant(row):
    """Return ``(Circulant(row), M)`` with ``M[i, j] = row[(j - i) % n]``."""
    c = Circulant(row)
    return c, c.matrix()


def circulant_row_of(A, tol=0.0):
    """First row of ``A`` if ``A`` is circulant within ``tol`` (max-abs), else ``None``."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return None
    row = A[0].copy()
    if np.max(np.abs(Circulant(row).matrix() - A), initial=0.0) <= tol:
        return row
    return None


def adjoint_symbol(phi, conv):
    """Map every term ``A z^p conj(z)^q`` to ``A' z^q conj(z)^p``.

    ``A'`` is the conjugate transpose or the entrywise conjugate of ``A``
    according to ``conv``. Both choices are involutions.
    """
    conv = Convention.parse(conv)
    return BlockSymbol([MonomialTerm(adjoint_matrix(t.coeff, conv), t.q, t.p) for t in phi.terms], n=phi.n)


def circulant_sums(c):
    """``(S, C)`` with ``S = sum |c_k|^2`` and ``C = sum_{k1 != k2} conj(c_k1) c_k2``.

    ``C`` is obtained as ``|sum c_k|^2 - S`` and is therefore real.
    """
    row = c.row if isinstance(c, Circulant) else np.asarray(c, dtype=complex).ravel()
    S = float(np.sum(np.abs(row) ** 2))
    C = float(abs(np.sum(row)) ** 2 - S)
    return S, C


# -- JSON literal format ---------------------------------------------------


def _parse_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex entries are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool):
        raise ValueError("boolean is not a number")
    return complex(float(v))


def _parse_term(obj, n):
    if not isinstance(obj, dict):
        raise ValueError("each term must be a JSON object")
    try:
        p, q = obj["p"], obj["q"]
    except KeyError as exc:
        raise ValueError(f"term is missing {exc.args[0]!r}") from None
    if not isinstance(p, int) or not isinstance(q, int) or isinstance(p, bool) or isinstance(q, bool):
        raise ValueError("exponents must be integers")
    if "circulant" in obj:
        row = [_parse_complex(v) for v in obj["circulant"]]
        A = Circulant(row).matrix()
    elif "coeff" in obj:
        A = np.array([[_parse_complex(v) for v in r] for r in obj["coeff"]], dtype=complex)
    else:
        raise ValueError("term needs 'coeff' or 'circulant'")
    if A.ndim != 2 or A.shape != (n, n):
        raise ValueError(f"coefficient has shape {A.shape}, expected ({n}, {n})")
    return MonomialTerm(A, p, q)


def parse_symbol(text_or_obj):
    """Build a :class:`BlockSymbol` from the JSON literal format.

    ``{"n": 2, "terms": [{"p": 1, "q": 0, "coeff": [[[1, 0], [0, 0]], ...]},
    {"p": 0, "q": 1, "circulant": [[1, 0], [0.5, 0]]}]}``

    Entries are ``[re, im]`` pairs or plain reals. A bare circulant term
    object (``{"circulant": ..., "p": .., "q": ..}``) is accepted as a
    one-term symbol. Raises ``ValueError`` on malformed input.
    """
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, (str, bytes)) else text_or_obj
    if not isinstance(obj, dict):
        raise ValueError("symbol literal must be a JSON object")
    if "terms" not in obj:
        if "circulant" in obj:
            n = len(obj["circulant"])
            return BlockSymbol([_parse_term(obj, n)], n=n)
        raise ValueError("symbol literal needs 'terms'")
    n = obj.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError("'n' must be a positive integer")
    terms = obj["terms"]
    if not isinstance(terms, list):
        raise ValueError("'terms' must be a list")
    return BlockSymbol([_parse_term(t, n) for t in terms], n=n)


def symbol_to_json(phi):
    """Inverse of :func:`parse_symbol` (always emits explicit ``coeff`` matrices)."""
    return {
        "n": phi.n,
        "terms": [
            {
                "p": t.p,
                "q": t.q,
                "coeff": [[[float(z.real), float(z.imag)] for z in r] for r in t.coeff],
            }
            for t in phi.terms
        ],
    }
