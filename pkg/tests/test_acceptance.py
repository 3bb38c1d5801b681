"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Lines are printed and repeated in the pytest terminal summary.
"""

import subprocess
import sys
import time

import numpy as np

from acceptance_log import record
from helpers import (
    cgauss,
    generalized_min,
    lambda_pq_quad,
    radial_moment,
    random_sequence,
    random_symbol,
    subset_family_holds,
)
from hypobergman.bergman_op import commutator_form, numeric_hypo_test, series_form
from hypobergman.criteria import (
    IFF_HYPONORMAL,
    IFF_NOT_HYPONORMAL,
    NECESSARY_VIOLATED,
    check_opposite_pair,
    check_single_term,
    check_two_term_necessary,
)
from hypobergman.moments import lambda_p, lambda_pq, lemma22_holds
from hypobergman.symbols import BlockSymbol, Convention
from hypobergman.verify import (
    InstanceSpec,
    bisect_boundary,
    cross_validate,
    gen_instance,
    local_ratio_max,
    thm33_witness,
)

CT, EW = Convention.CONJUGATE_TRANSPOSE, Convention.ENTRYWISE


class TestMomentCorrectness:
    def test_criterion_1(self):
        rng = np.random.default_rng(2024)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(200):
            alpha = rng.uniform(-0.9, 5)
            p = int(rng.integers(0, 41))
            q = int(rng.integers(0, p + 1))
            worst = max(
                worst,
                abs(lambda_p(alpha, p) / radial_moment(alpha, p) - 1),
                abs(lambda_pq(alpha, p, q) / lambda_pq_quad(alpha, p, q) - 1),
            )
        dt = time.perf_counter() - t0
        ok = worst <= 1e-8 and dt < 10
        record(1, "moments vs quadrature", ok, f"200 tuples, max rel err {worst:.2e} (<= 1e-8), {dt:.2f}s (< 10s)")
        assert ok


class TestMomentInequalitySuite:
    def test_criterion_2(self):
        rng = np.random.default_rng(7)
        t0 = time.perf_counter()
        fails = {"i": 0, "ii": 0, "iii": 0}
        worst = {"i": np.inf, "ii": np.inf}
        for _ in range(500):
            alpha = rng.uniform(-0.95, 10)
            q = int(rng.integers(0, 40))
            p = q + int(rng.integers(0, 40))
            i = p - q + int(rng.integers(0, 60))
            r = lemma22_holds("i", alpha, p, q, i=i)
            fails["i"] += not r.holds
            worst["i"] = min(worst["i"], r.lhs - r.rhs)
        for _ in range(500):
            alpha = rng.uniform(-0.95, 10)
            d = int(rng.integers(1, 15))
            q, t = (int(x) for x in rng.integers(0, 25, 2))
            i = d + int(rng.integers(0, 40))
            r = lemma22_holds("ii", alpha, q + d, q, s=t + d, t=t, i=i)
            fails["ii"] += not r.holds
            worst["ii"] = min(worst["ii"], r.lhs - r.rhs)
        for _ in range(200):
            alpha = rng.uniform(-0.95, 10)
            d = int(rng.integers(2, 12))
            q, s = (int(x) for x in rng.integers(0, 25, 2))
            i = int(rng.integers(0, d - 1))
            r = lemma22_holds("iii-compare", alpha, q + d, q, s=s, t=s + d, i=i)
            expected_up = s + d >= q + d
            direction = r.rhs >= r.lhs - 1e-12 * max(r.lhs, r.rhs) if expected_up else r.rhs <= r.lhs + 1e-12 * max(r.lhs, r.rhs)
            fails["iii"] += not (r.holds and direction)
        dt = time.perf_counter() - t0
        ok = not any(fails.values()) and dt < 5
        record(
            2,
            "moment inequalities",
            ok,
            f"failures {fails} over 500/500/200 tuples, min lhs-rhs (i) {worst['i']:.2e} (ii) {worst['ii']:.2e}, {dt:.2f}s (< 5s)",
        )
        assert ok


class TestSeriesMatrixEquivalence:
    def test_criterion_3(self):
        rng = np.random.default_rng(33)
        t0 = time.perf_counter()
        worst, counts = 0.0, {}
        for k in range(200):
            phi = random_symbol(rng, circulant=bool(k % 3 == 0))
            K = random_sequence(rng, phi.n)
            alpha = rng.uniform(-0.9, 4)
            F = commutator_form(alpha, phi, K.degree, EW)
            ref = F.quadratic(K)
            val = series_form(alpha, phi, K, EW)
            # relative to the size of the two Gram pieces, so cancelling forms are measured fairly
            scale = max(abs(ref), F.scale * float(np.vdot(K.coeffs, K.coeffs).real))
            worst = max(worst, abs(val - ref) / scale)
            kind = "single" if len(phi.terms) == 1 else "pair"
            counts[kind] = counts.get(kind, 0) + 1
        dt = time.perf_counter() - t0
        ok = worst <= 1e-10 and dt < 30
        record(3, "series vs matrix form (entrywise)", ok, f"200 instances {counts}, max rel diff {worst:.2e} (<= 1e-10), {dt:.2f}s (< 30s)")
        assert ok


class TestSingleTermIff:
    def test_criterion_4(self):
        t0 = time.perf_counter()
        bad = {"ew": 0, "ct": 0}
        late = 0
        worst_rel = np.inf
        for orientation in ("ge", "lt"):
            for k in range(100):
                spec = InstanceSpec("single-term", n=1 + k % 4, orientation=orientation, seed=4000 + k)
                inst = gen_instance(spec)
                (A,), (p, q) = inst.coeffs, inst.exponents
                v = check_single_term(A, p, q)
                assert v.hypothesis_ok
                for conv in (EW, CT):
                    o = numeric_hypo_test(inst.alpha, inst.symbol, 30, 1e-10, conv)
                    if v.kind == IFF_HYPONORMAL:
                        wrong = o.not_hyponormal
                        if conv is EW:
                            worst_rel = min(worst_rel, o.relative_min_eigenvalue)
                    else:
                        wrong = not o.not_hyponormal
                        if conv is EW and not wrong and o.levels_checked > 2 * (p + q) + 4:
                            late += 1
                    bad[conv.value] += wrong
        dt = time.perf_counter() - t0
        ok = bad["ew"] == 0 and late == 0 and dt < 60
        record(
            4,
            "single-term iff",
            ok,
            f"100 p>=q + 100 p<q, n<=4: disagreements ew={bad['ew']} (ct={bad['ct']}), "
            f"late witnesses {late}, min rel eig (p>=q) {worst_rel:.1e} (>= -1e-10), {dt:.1f}s (< 60s)",
        )
        assert ok


class TestOppositePairBoundary:
    def test_criterion_5(self):
        details, ok = [], True
        for alpha in (0.0, 1.3):
            def negative(b, alpha=alpha):
                phi = BlockSymbol.pair([[1]], 2, 1, [[b]], 1, 2)
                return numeric_hypo_test(alpha, phi, 30, 1e-10).not_hyponormal

            lo, hi = bisect_boundary(negative, 0.5, 1.5, 1e-3)
            grid = np.round(np.arange(0.0, 2.01, 0.125), 3)
            mism = sum(
                (check_opposite_pair(1.0, b, 2, 1).kind == IFF_NOT_HYPONORMAL) != negative(b)
                for b in grid
            )
            good = lo - 1e-12 <= 1.0 <= hi + 1e-12 and hi - lo <= 1e-3 and mism == 0
            ok &= good
            details.append(f"alpha={alpha}: flip in [{lo:.5f}, {hi:.5f}], grid mismatches {mism}")

        bad = {"ct": 0, "ew": 0}
        rep = cross_validate("opposite-pair", InstanceSpec("opposite-pair-circulant", n=2, seed=5000), 100)
        for conv in bad:
            bad[conv] = rep.convention_summary[conv]["disagreements"]
        ok &= bad["ct"] == 0 and bad["ew"] == 0
        details.append(f"100 circulant pairs n=2: disagreements ct={bad['ct']} ew={bad['ew']}")
        record(5, "opposite-pair boundary", ok, "; ".join(details))

        info = cross_validate("opposite-pair", InstanceSpec("opposite-pair-circulant", n=3, seed=5000), 100)
        s = info.convention_summary
        record(
            "5i",
            "opposite-pair circulant n=3",
            None,
            f"disagreements ct={s['ct']['disagreements']} ew={s['ew']['disagreements']} of 100; "
            "the sign-split test is exact only for n <= 2",
        )
        assert ok


class TestSufficientConditions:
    def test_criterion_6(self):
        parts, ok = [], True
        for label, family in (("matrix", "two-term-same-orientation"), ("circulant", "two-term-same-orientation-circulant")):
            rep = cross_validate("two-term-sufficient", InstanceSpec(family, n=3, seed=6000), 100)
            holds = sum(r["criterion_kind"] == "sufficient-holds" for r in rep.records)
            zero = rep.zero_disagreement_conventions()
            s = rep.convention_summary
            ok &= bool(zero) and holds == 100
            parts.append(
                f"{label}: {holds}/100 satisfy, not-hyponormal ct={s['ct']['disagreements']} ew={s['ew']['disagreements']}, "
                f"zero under {zero or 'none'}"
            )
        record(6, "sufficient conditions", ok, "; ".join(parts))
        assert ok


class TestNecessaryCondition:
    def test_criterion_7(self):
        flagged = witnesses = oracle_ew = oracle_ct = 0
        worst_gap = 0.0
        for k in range(100):
            family = "two-term-mixed" if k % 2 == 0 else "two-term-mixed-circulant"
            inst = gen_instance(InstanceSpec(family, n=1 + k % 4, target="violate", seed=7000 + k))
            A, B = inst.coeffs
            p, q, s, t = inst.exponents
            v = check_two_term_necessary(A, B, p, q, s, t, inst.alpha)
            flagged += v.kind == NECESSARY_VIOLATED

            Am = A.matrix() if hasattr(A, "matrix") else A
            Bm = B.matrix() if hasattr(B, "matrix") else B
            Ma, Mb = np.real(Am.conj().T @ Am), np.real(Bm.conj().T @ Bm)
            r, i = local_ratio_max(inst.alpha, p, q, s, t, 2 * (p - q) + 8)
            w, V = np.linalg.eigh(Ma - r * Mb)
            K, pred = thm33_witness(A, B, p, q, s, t, inst.alpha, i, range(Am.shape[0]), V[:, 0])
            F = commutator_form(inst.alpha, inst.symbol, K.degree, EW)
            scale = F.scale
            val = series_form(inst.alpha, inst.symbol, K, EW)
            worst_gap = max(worst_gap, abs(val - pred) / scale)
            witnesses += val < -1e-10 * scale and pred < -1e-10 * scale
            oracle_ew += numeric_hypo_test(inst.alpha, inst.symbol, 30, 1e-10, EW).not_hyponormal
            oracle_ct += numeric_hypo_test(inst.alpha, inst.symbol, 30, 1e-10, CT).not_hyponormal

        rng = np.random.default_rng(77)
        sub_bad = 0
        for _ in range(100):
            n = int(rng.integers(1, 6))
            A, B = cgauss(rng, (n, n)), cgauss(rng, (n, n))
            Ma, Mb = np.real(A.conj().T @ A), np.real(B.conj().T @ B)
            lam = generalized_min(Ma, Mb) * rng.choice([0.5, 2.0])
            matrix_ok = np.linalg.eigvalsh(Ma - lam * Mb)[0] >= -1e-10 * np.linalg.norm(Ma, 2)
            sub_bad += matrix_ok != subset_family_holds(A, B, lam, rng)

        ok = flagged == 100 and witnesses == 100 and oracle_ew == 100 and sub_bad == 0 and worst_gap <= 1e-10
        record(
            7,
            "necessary condition",
            ok,
            f"100 violating instances: flagged {flagged}, negative witnesses {witnesses} "
            f"(series vs predicted rel gap {worst_gap:.1e}), oracle negative ew={oracle_ew} (ct={oracle_ct}); "
            f"subset-family equivalence mismatches {sub_bad}/100 (n<=5)",
        )
        assert ok


class TestNormality:
    def test_criterion_8(self):
        parts, ok = [], True
        for family in ("normal-shape", "normal-shape-circulant"):
            norms = {"ct": 0.0, "ew": 0.0}
            for k in range(50):
                inst = gen_instance(InstanceSpec(family, n=1 + k % 4, seed=8000 + k))
                for conv in (CT, EW):
                    G = commutator_form(inst.alpha, inst.symbol, 30, conv).gram
                    norms[conv.value] = max(norms[conv.value], float(np.abs(G).sum(axis=1).max()))
            ok &= norms["ct"] <= 1e-11
            parts.append(f"{family}: max ||gram||inf ct={norms['ct']:.1e} (ew={norms['ew']:.1e})")
        record(8, "normal shapes", ok, "; ".join(parts) + " (<= 1e-11)")
        assert ok


class TestCompressionExactness:
    def test_criterion_9(self):
        rng = np.random.default_rng(99)
        worst = 0.0
        for _ in range(50):
            phi = random_symbol(rng, n=int(rng.integers(1, 4)), max_exp=6)
            alpha = rng.uniform(-0.9, 4)
            N = int(rng.integers(0, 12))
            for conv in (CT, EW):
                small = commutator_form(alpha, phi, N, conv).gram
                big = commutator_form(alpha, phi, N + 3, conv).gram
                k = small.shape[0]
                worst = max(worst, float(np.abs(big[:k, :k] - small).max()) / max(1.0, float(np.abs(small).max())))
        ok = worst <= 1e-13
        record(9, "compression exactness", ok, f"50 symbols, max block change {worst:.1e} (<= 1e-13)")
        assert ok


class TestDeterminism:
    def test_criterion_10(self):
        argv = [
            sys.executable, "-m", "hypobergman", "verify", "--criterion", "two-term-necessary",
            "--family", "two-term-mixed-circulant", "--target", "violate", "--trials", "15", "--seed", "31", "--n", "3",
        ]
        runs = [subprocess.run(argv, capture_output=True, check=False) for _ in range(2)]
        same = runs[0].stdout == runs[1].stdout and runs[0].returncode == runs[1].returncode
        ok = same and len(runs[0].stdout) > 0
        record(10, "determinism", ok, f"two processes, {len(runs[0].stdout)} bytes each, identical={same}")
        assert ok
