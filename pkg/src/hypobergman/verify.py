"""Randomized cross-validation of the criteria against the spectral oracle.

Instances are generated from a :class:`InstanceSpec` whose seed fixes
everything. For each instance the criterion verdict is compared with
:func:`~hypobergman.bergman_op.numeric_hypo_test` under both adjoint
conventions, so the report shows under which convention each criterion
is empirically sound.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bergman_op import CoeffSequence, commutator_form, numeric_hypo_test
from .criteria import (
    IFF_HYPONORMAL,
    IFF_NOT_HYPONORMAL,
    NECESSARY_VIOLATED,
    NORMAL,
    SUFFICIENT_HOLDS,
    check_normal,
    check_opposite_pair,
    check_single_term,
    check_two_term_necessary,
    check_two_term_sufficient,
    lambda_star_bound,
)
from .errors import HypothesisError, SamplingBudgetError
from .moments import WAlphaConfig, check_alpha, lambda_pq, w_alpha_ratio
from .symbols import BlockSymbol, Circulant, Convention, circulant_sums

__all__ = [
    "FAMILIES",
    "CRITERIA",
    "InstanceSpec",
    "Instance",
    "CrossReport",
    "gen_instance",
    "evaluate_criterion",
    "thm33_witness",
    "local_ratio_max",
    "cross_validate",
    "bisect_boundary",
]

BASE_FAMILIES = (
    "single-term",
    "two-term-same-orientation",
    "two-term-mixed",
    "opposite-pair",
    "normal-shape",
)
FAMILIES = BASE_FAMILIES + tuple(f + "-circulant" for f in BASE_FAMILIES)

# criterion id -> (logical strength, default family)
CRITERIA = {
    "single-term": ("iff", "single-term"),
    "two-term-sufficient": ("sufficient", "two-term-same-orientation"),
    "two-term-necessary": ("necessary", "two-term-mixed"),
    "opposite-pair": ("iff", "opposite-pair"),
    "normal": ("normal", "normal-shape"),
}

SAMPLING_BUDGET = 10_000
NORMAL_GRAM_TOL = 1e-11
_CLIP = (1e-3, 1e3)


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one random instance.

    ``orientation`` applies to the single-term family (``"ge"`` for
    ``p >= q``, ``"lt"`` for ``p < q``, ``"any"``). ``target`` is
    ``"satisfy"`` (coefficients meet the criterion's hypothesis) or
    ``"violate"`` (used by the mixed family to break the necessary
    inequality) or ``"any"``.
    """

    family: str
    n: int = 2
    max_exp: int = 8
    alpha_range: tuple = (-0.5, 3.0)
    orientation: str = "any"
    target: str = "satisfy"
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1 or self.max_exp < 1:
            raise ValueError("need n >= 1 and max_exp >= 1")
        lo, hi = self.alpha_range
        if not (-1 < lo <= hi):
            raise ValueError("alpha_range must lie above -1")
        if self.orientation not in ("ge", "lt", "any"):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if self.target not in ("satisfy", "violate", "any"):
            raise ValueError(f"unknown target {self.target!r}")


@dataclass(frozen=True, eq=False)
class Instance:
    spec: InstanceSpec
    symbol: BlockSymbol
    alpha: float
    exponents: tuple  # (p, q) or (p, q, s, t)
    coeffs: tuple  # matrices, scalars or Circulant rows, in term order
    meta: dict = field(default_factory=dict)

    @property
    def circulant(self):
        return self.spec.family.endswith("-circulant")


def _cgauss(rng, shape):
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    mag = np.abs(z)
    clipped = np.clip(mag, *_CLIP)
    return np.where(mag > 0, z * (clipped / np.where(mag > 0, mag, 1.0)), _CLIP[0])


def _phase_rows(rng, n):
    real = rng.standard_normal((n, n))
    real = np.sign(real) * np.clip(np.abs(real), *_CLIP)
    return real * np.exp(1j * rng.uniform(0, 2 * np.pi, size=(n, 1)))


def _reject(family, seed, draw, accept):
    for _ in range(SAMPLING_BUDGET):
        x = draw()
        if accept(x):
            return x
    raise SamplingBudgetError(family, seed, SAMPLING_BUDGET)


def _single_ok(row):
    S, C = circulant_sums(row)
    return S >= (row.size - 1) * abs(C) * (1 + 1e-9)


def _pair_ok(a, b):
    n = a.size
    Sab = float(np.sum(np.real(np.conj(a) * b)))
    Cab = float(np.real(np.sum(b) * np.conj(np.sum(a)))) - Sab
    return _single_ok(a) and _single_ok(b) and Sab >= (n - 1) * abs(Cab) * (1 + 1e-9)


def local_ratio_max(alpha, p, q, s, t, levels):
    """Largest single-level ratio the form can exploit on degrees ``< levels``.

    At level ``i < p-q`` this is ``lambda_pq(t+i, s) / lambda_pq(p+i, q)``;
    at ``i >= p-q`` it is the ratio inside ``w_alpha``. Returns
    ``(ratio, i)``.
    """
    d = p - q
    best, at = -np.inf, -1
    for i in range(levels):
        if i < d:
            r = lambda_pq(alpha, t + i, s) / lambda_pq(alpha, p + i, q)
        else:
            r = w_alpha_ratio(alpha, p, q, t, s, i)
        if r > best:
            best, at = float(r), i
    return best, at


def _gen_mixed(spec, rng, alpha):
    n, m = spec.n, spec.max_exp
    d = int(rng.integers(1, m + 1))
    q = int(rng.integers(0, m - d + 1))
    s = int(rng.integers(0, m - d + 1))
    p, t = q + d, s + d
    circ = spec.family.endswith("-circulant")
    if circ:
        ra, rb = _cgauss(rng, n), _cgauss(rng, n)
        A, B = Circulant(ra).matrix(), Circulant(rb).matrix()
    else:
        A, B = _cgauss(rng, (n, n)), _cgauss(rng, (n, n))
    Ma, Mb = np.real(A.conj().T @ A), np.real(B.conj().T @ B)
    lam, _ = lambda_star_bound(alpha, p, q, s, t)
    # smallest generalized eigenvalue of (Ma, Mb); Mb is PD almost surely
    w, V = np.linalg.eigh(Mb)
    w = np.maximum(w, 1e-300)
    R = V / np.sqrt(w)
    rho = float(np.linalg.eigvalsh(R.T @ Ma @ R)[0])
    meta = {"lambda_star": lam, "rho_before": rho}
    if spec.target == "violate":
        # violate with a margin visible inside a small truncation
        loc, at = local_ratio_max(alpha, p, q, s, t, 2 * d + 8)
        goal = 0.5 * min(loc, lam)
        meta.update(local_ratio=loc, local_index=at)
    elif spec.target == "satisfy":
        goal = 2.0 * lam
    else:
        goal = rho
    factor = np.sqrt(rho / goal) if goal > 0 else 1.0
    meta["b_scale"] = float(factor)
    if circ:
        rb = rb * factor
        coeffs = (Circulant(ra), Circulant(rb))
        B = Circulant(rb).matrix()
        meta.update(zip(("S_a", "C_a"), circulant_sums(ra)))
        meta.update(zip(("S_b", "C_b"), circulant_sums(rb)))
    else:
        B = B * factor
        coeffs = (A, B)
    sym = BlockSymbol.pair(A, p, q, B, s, t)
    return sym, (p, q, s, t), coeffs, meta


def gen_instance(spec):
    """Deterministic random instance for ``spec``; see :class:`InstanceSpec`."""
    rng = np.random.default_rng(spec.seed)
    alpha = float(rng.uniform(*spec.alpha_range))
    n, m = spec.n, spec.max_exp
    base = spec.family.removesuffix("-circulant")
    circ = spec.family.endswith("-circulant")
    meta = {}

    if base == "single-term":
        if spec.orientation == "ge":
            q = int(rng.integers(0, m + 1))
            p = int(rng.integers(q, m + 1))
        elif spec.orientation == "lt":
            p = int(rng.integers(0, m))
            q = int(rng.integers(p + 1, m + 1))
        else:
            p, q = (int(x) for x in rng.integers(0, m + 1, 2))
        if circ:
            draw = lambda: _cgauss(rng, n)  # noqa: E731
            row = _reject(spec.family, spec.seed, draw, _single_ok) if spec.target == "satisfy" else draw()
            coeffs = (Circulant(row),)
            A = coeffs[0].matrix()
            meta.update(zip(("S", "C"), circulant_sums(row)))
        else:
            A = _phase_rows(rng, n) if spec.target == "satisfy" else _cgauss(rng, (n, n))
            coeffs = (A,)
        return Instance(spec, BlockSymbol.single(A, p, q), alpha, (p, q), coeffs, meta)

    if base == "two-term-same-orientation":
        d = int(rng.integers(1, m + 1))
        q = int(rng.integers(0, m - d + 1))
        t = int(rng.integers(0, m - d + 1))
        p, s = q + d, t + d
        if circ:
            def draw():
                a = _cgauss(rng, n)
                b = rng.uniform(0.1, 3.0) * a + rng.uniform(0, 1) * _cgauss(rng, n)
                return a, b

            ok = (lambda ab: _pair_ok(*ab)) if spec.target == "satisfy" else (lambda ab: True)
            a, b = _reject(spec.family, spec.seed, draw, ok)
            coeffs = (Circulant(a), Circulant(b))
            A, B = coeffs[0].matrix(), coeffs[1].matrix()
        elif spec.target == "satisfy" and rng.random() < 0.5:
            # real rows with b_k a nonnegative multiple of a_k
            A = rng.standard_normal((n, n))
            B = A * rng.uniform(0, 2, size=(n, 1))
            coeffs = (A, B)
            meta["route"] = "real"
        elif spec.target == "satisfy":
            A = np.zeros((n, n), dtype=complex)
            B = np.zeros((n, n), dtype=complex)
            for k in range(n):
                mode = int(rng.integers(0, 3))
                if mode == 0:
                    A[k] = _phase_rows(rng, n)[0]
                elif mode == 1:
                    B[k] = _phase_rows(rng, n)[0]
                else:
                    j = int(rng.integers(0, n))
                    th = rng.uniform(0, 2 * np.pi)
                    A[k, j] = rng.uniform(0.1, 2) * np.exp(1j * th)
                    B[k, j] = rng.uniform(0.1, 2) * np.exp(1j * (th + rng.uniform(-np.pi / 2, np.pi / 2)))
            coeffs = (A, B)
            meta["route"] = "diagonal"
        else:
            A, B = _cgauss(rng, (n, n)), _cgauss(rng, (n, n))
            coeffs = (A, B)
        return Instance(spec, BlockSymbol.pair(A, p, q, B, s, t), alpha, (p, q, s, t), coeffs, meta)

    if base == "two-term-mixed":
        sym, exps, coeffs, meta = _gen_mixed(spec, rng, alpha)
        return Instance(spec, sym, alpha, exps, coeffs, meta)

    if base == "opposite-pair":
        d = int(rng.integers(1, m + 1))
        q = int(rng.integers(0, m - d + 1))
        p = q + d
        if circ:
            ra, rb = _cgauss(rng, n), _cgauss(rng, n)
            coeffs = (Circulant(ra), Circulant(rb))
            A, B = coeffs[0].matrix(), coeffs[1].matrix()
            meta.update(zip(("S_a", "C_a"), circulant_sums(ra)))
            meta.update(zip(("S_b", "C_b"), circulant_sums(rb)))
        else:
            a, b = _cgauss(rng, 2)
            coeffs = (complex(a), complex(b))
            A, B = a * np.eye(n), b * np.eye(n)
        return Instance(spec, BlockSymbol.pair(A, p, q, B, q, p), alpha, (p, q, q, p), coeffs, meta)

    # normal-shape
    p, s = (int(x) for x in rng.integers(0, m + 1, 2))
    if circ:
        coeffs = (Circulant(_cgauss(rng, n)), Circulant(_cgauss(rng, n)))
        A, B = coeffs[0].matrix(), coeffs[1].matrix()
    else:
        X, Y = _cgauss(rng, (n, n)), _cgauss(rng, (n, n))
        A, B = 0.5 * (X + X.conj().T), 0.5 * (Y + Y.conj().T)
        coeffs = (A, B)
    return Instance(spec, BlockSymbol.pair(A, p, p, B, s, s), alpha, (p, p, s, s), coeffs, meta)


def evaluate_criterion(criterion, inst, tol=1e-10, cfg=None):
    """Run criterion ``criterion`` on a generated instance."""
    c = inst.coeffs
    e = inst.exponents
    if criterion == "single-term":
        return check_single_term(c[0], e[0], e[1], tol)
    if criterion == "two-term-sufficient":
        return check_two_term_sufficient(c[0], c[1], *e, tol=tol)
    if criterion == "two-term-necessary":
        return check_two_term_necessary(c[0], c[1], *e, inst.alpha, cfg=cfg, tol=tol)
    if criterion == "opposite-pair":
        return check_opposite_pair(c[0], c[1], e[0], e[1], tol)
    if criterion == "normal":
        return check_normal(inst.symbol, tol)
    raise KeyError(f"unknown criterion {criterion!r}")


def thm33_witness(A, B, p, q, s, t, alpha, i, subset, c):
    """Single-level test sequence for ``A z^p conj(z)^q + B z^s conj(z)^t``, ``p-q = t-s > 0``.

    Puts the real weights ``c`` on components ``subset`` (0-based, strictly
    increasing) at degree ``i`` and returns ``(K, predicted)`` where
    ``predicted`` is the value of the commutator form (entrywise adjoint)
    on ``K``: for ``i < p-q``

    ``lambda_pq(p+i, q) ||A_S c||^2 - lambda_pq(t+i, s) ||B_S c||^2``

    and for ``i >= p-q`` the same with each moment replaced by its
    difference with the reversed moment.
    """
    alpha = check_alpha(alpha)
    d = p - q
    if not (d > 0 and t - s == d):
        raise HypothesisError(f"need p - q == t - s > 0 (got p={p}, q={q}, s={s}, t={t})")
    if i < 0:
        raise HypothesisError("level i must be nonnegative")
    A = np.asarray(A.matrix() if isinstance(A, Circulant) else A, dtype=complex)
    B = np.asarray(B.matrix() if isinstance(B, Circulant) else B, dtype=complex)
    n = A.shape[0]
    subset = [int(k) for k in subset]
    if not subset or any(b <= a for a, b in zip(subset, subset[1:])) or subset[0] < 0 or subset[-1] >= n:
        raise HypothesisError("subset must be strictly increasing indices in [0, n)")
    c = np.asarray(c, dtype=float).ravel()
    if c.size != len(subset):
        raise ValueError("one weight per subset index")
    vec = np.zeros(n, dtype=complex)
    vec[subset] = c
    na = float(np.sum(np.abs(A @ vec) ** 2))
    nb = float(np.sum(np.abs(B @ vec) ** 2))
    if i < d:
        pred = lambda_pq(alpha, p + i, q) * na - lambda_pq(alpha, t + i, s) * nb
    else:
        pred = (lambda_pq(alpha, p + i, q) - lambda_pq(alpha, q + i, p)) * na - (
            lambda_pq(alpha, t + i, s) - lambda_pq(alpha, s + i, t)
        ) * nb
    return CoeffSequence(i, vec[None, :]), float(pred)


# -- cross validation ------------------------------------------------------------


def _agrees(strength, verdict, oracle, gram_norm):
    if strength == "iff":
        if not verdict.hypothesis_ok:
            return True
        if verdict.kind == IFF_HYPONORMAL:
            return not oracle.not_hyponormal
        if verdict.kind == IFF_NOT_HYPONORMAL:
            return oracle.not_hyponormal
        if verdict.kind == NORMAL:
            return not oracle.not_hyponormal
        return True
    if strength == "sufficient":
        return not (verdict.kind == SUFFICIENT_HOLDS and oracle.not_hyponormal)
    if strength == "necessary":
        return not (verdict.kind == NECESSARY_VIOLATED and not oracle.not_hyponormal)
    if strength == "normal":
        return verdict.kind == NORMAL and gram_norm <= NORMAL_GRAM_TOL
    raise ValueError(strength)


@dataclass
class CrossReport:
    criterion: str
    convention: str
    instances: int
    agreements: int
    disagreements: list
    convention_summary: dict
    config: dict
    records: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        assert self.agreements + len(self.disagreements) == self.instances

    def zero_disagreement_conventions(self):
        return sorted(k for k, v in self.convention_summary.items() if v["disagreements"] == 0)

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "convention": self.convention,
            "instances": self.instances,
            "agreements": self.agreements,
            "disagreements": self.disagreements,
            "convention_summary": self.convention_summary,
            "config": self.config,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def cross_validate(criterion, spec, trials, N_max=30, tol=1e-10, convention=Convention.CONJUGATE_TRANSPOSE):
    """Compare ``criterion`` with the oracle on ``trials`` instances.

    Trial ``k`` uses seed ``spec.seed + k``. Agreement depends on the
    criterion's logical strength: iff verdicts must match the oracle;
    ``sufficient-holds`` must not meet a negative eigenvalue;
    ``necessary-violated`` must not meet an oracle-consistent instance;
    ``normal`` needs the commutator form to vanish.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if criterion not in CRITERIA:
        raise KeyError(f"unknown criterion {criterion!r}")
    strength = CRITERIA[criterion][0]
    convention = Convention.parse(convention)
    convs = (Convention.CONJUGATE_TRANSPOSE, Convention.ENTRYWISE)
    summary = {c.value: {"agreements": 0, "disagreements": 0} for c in convs}
    disagreements, records = [], []
    wcfg = WAlphaConfig(i_max=2000, tail_probe=5)
    for k in range(trials):
        sp = replace(spec, seed=spec.seed + k)
        inst = gen_instance(sp)
        verdict = evaluate_criterion(criterion, inst, tol, cfg=wcfg)
        rec = {"seed": sp.seed, "criterion_kind": verdict.kind, "hypothesis_ok": verdict.hypothesis_ok}
        for conv in convs:
            oracle = numeric_hypo_test(inst.alpha, inst.symbol, N_max, tol, conv)
            gram_norm = None
            if strength == "normal":
                G = commutator_form(inst.alpha, inst.symbol, N_max, conv).gram
                gram_norm = float(np.abs(G).sum(axis=1).max(initial=0.0))
            ok = _agrees(strength, verdict, oracle, gram_norm)
            summary[conv.value]["agreements" if ok else "disagreements"] += 1
            rec[conv.value] = {
                "oracle_status": oracle.status,
                "min_eig": oracle.min_eigenvalue,
                "levels_checked": oracle.levels_checked,
                "agrees": ok,
                "gram_norm": gram_norm,
            }
            if conv is convention and not ok:
                disagreements.append(
                    {
                        "seed": sp.seed,
                        "criterion_kind": verdict.kind,
                        "oracle_status": oracle.status,
                        "min_eig": oracle.min_eigenvalue,
                    }
                )
        records.append(rec)
    disagreements.sort(key=lambda r: r["seed"])
    config = {
        "spec": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(spec).items()},
        "trials": trials,
        "N_max": N_max,
        "tol": tol,
    }
    return CrossReport(
        criterion=criterion,
        convention=convention.value,
        instances=trials,
        agreements=trials - len(disagreements),
        disagreements=disagreements,
        convention_summary=summary,
        config=config,
        records=records,
    )


def bisect_boundary(status_at, lo, hi, resolution=1e-3):
    """Locate where a boolean ``status_at(x)`` flips on ``[lo, hi]``.

    ``status_at(lo)`` and ``status_at(hi)`` must differ. Returns the final
    bracket ``(lo, hi)`` with ``hi - lo <= resolution``.
    """
    s_lo = status_at(lo)
    if status_at(hi) == s_lo:
        raise ValueError("status does not change on the bracket")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if status_at(mid) == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi
