import itertools
import math

import numpy as np
import pytest

from zetachain.chains import (
    build_polynomial,
    chain_points,
    compare_rescaled,
    polynomial_roots,
    resolve_window,
    theorem3_supnorm,
)
from zetachain.errors import (
    NonpositiveEntry,
    WindowBoundaryTouchesChain,
    WindowMismatch,
)
from zetachain.roots import ResonanceSet, ResonanceEntry, Window
from zetachain.schemes import build_flow_adapted
from zetachain.symdyn import compile_database


class TestBuildPolynomial:
    def test_known_coefficient_vectors(self):
        assert build_polynomial((1, 1, 1)).coefficients.tolist() == [1, -6, 9, -4]
        assert build_polynomial((4, 4, 5)).coefficients.tolist() == [
            1, 0, 0, 0, -4, -2, 0, 0, 4, 4, 1, 0, 0, -4,
        ]
        assert build_polynomial((4, 5, 6)).coefficients.tolist() == [
            1, 0, 0, 0, -2, -2, -2, 0, 1, 2, 3, 2, 1, 0, 0, -4,
        ]

    def test_doubling_substitutes_square(self):
        p1 = build_polynomial((1, 1, 1)).coefficients
        p2 = build_polynomial((2, 2, 2)).coefficients
        assert p2[::2].tolist() == p1.tolist()
        assert np.all(p2[1::2] == 0)

    def test_permutation_invariance(self):
        base = build_polynomial((4, 5, 6)).coefficients
        for perm in itertools.permutations((4, 5, 6)):
            assert build_polynomial(perm).coefficients.tolist() == base.tolist()

    def test_row_sum_vanishes(self):
        for n in ((1, 1, 1), (4, 4, 5), (4, 5, 6), (2, 3, 4), (7, 7, 7)):
            assert int(build_polynomial(n).coefficients.sum()) == 0

    def test_nonpositive_rejected(self):
        with pytest.raises(NonpositiveEntry):
            build_polynomial((1, 0, 1))


class TestPolynomialRoots:
    def test_explicit_factorization_111(self):
        roots = dict()
        for r, m in polynomial_roots(build_polynomial((1, 1, 1))):
            roots[m] = r
        assert roots[1] == pytest.approx(0.25, abs=1e-12)
        assert roots[2] == pytest.approx(1.0, abs=1e-12)

    def test_square_root_images_222(self):
        got = polynomial_roots(build_polynomial((2, 2, 2)))
        expected = {(-1.0, 2), (-0.5, 1), (0.5, 1), (1.0, 2)}
        assert {(round(r.real, 9), m) for r, m in got} == expected
        assert all(abs(r.imag) < 1e-12 for r, _ in got)

    @pytest.mark.parametrize("n", [(4, 4, 5), (4, 5, 6)])
    def test_conjugation_closure_and_residuals(self, n):
        p = build_polynomial(n)
        roots = polynomial_roots(p)
        assert sum(m for _, m in roots) == p.degree
        for r, m in roots:
            assert abs(p.eval(r)) < 1e-10 * (1 + abs(r)) ** p.degree
            conj_present = any(abs(r.conjugate() - r2) < 1e-9 for r2, _ in roots)
            assert conj_present


class TestChainPoints:
    def test_log4_chain(self):
        p = build_polynomial((1, 1, 1))
        w = Window(1.0, 1.8, -0.1, 7.0)
        pts = chain_points(p, w).points
        assert [pt.k for pt in pts] == [0, 1]
        assert pts[0].s == pytest.approx(math.log(4.0))
        assert pts[1].s.imag == pytest.approx(2 * math.pi)

    def test_double_zero_chain(self):
        p = build_polynomial((1, 1, 1))
        pts = chain_points(p, Window(-0.5, 0.5, -0.1, 0.1)).points
        assert len(pts) == 1
        assert pts[0].multiplicity == 2
        assert pts[0].s == 0

    def test_vertical_periodicity(self):
        # boundaries at an irrational-ish offset so no chain point sits on them
        p = build_polynomial((4, 5, 6))
        lo = 0.37
        base = chain_points(p, Window(0.01, 2.0, lo, lo + 2 * math.pi)).points
        shifted = chain_points(
            p, Window(0.01, 2.0, lo + 2 * math.pi, lo + 4 * math.pi)
        ).points
        assert len(base) == len(shifted)
        for a, b in zip(base, shifted):
            assert b.s - 2j * math.pi == pytest.approx(a.s, abs=1e-9)

    def test_strip_count_matches_degree(self):
        # a full-height 2 pi strip away from chain lines on its boundary
        p = build_polynomial((4, 5, 6))
        w = Window(-1.0, 2.0, 0.001, 2 * math.pi + 0.001)
        pts = chain_points(p, w)
        assert pts.total_multiplicity() == p.degree


class TestResolveWindow:
    def test_boundary_error_policy(self):
        p = build_polynomial((1, 1, 1))
        w = Window(1.0, 1.8, -6 * math.pi, 6 * math.pi)
        with pytest.raises(WindowBoundaryTouchesChain):
            resolve_window(p, w, "error")

    def test_expand_policy(self):
        p = build_polynomial((1, 1, 1))
        w = Window(1.0, 1.8, -6 * math.pi, 6 * math.pi)
        w2, adjusted = resolve_window(p, w, "expand")
        assert adjusted
        assert len(chain_points(p, w2).points) == 7

    def test_clear_window_untouched(self):
        p = build_polynomial((1, 1, 1))
        w = Window(1.0, 1.8, -1.0, 1.0)
        w2, adjusted = resolve_window(p, w, "error")
        assert not adjusted and w2 == w


class TestCompare:
    def test_window_mismatch(self):
        p = build_polynomial((1, 1, 1))
        w = Window(1.0, 1.8, -1.0, 1.0)
        rs = ResonanceSet(entries=[], window=Window(0.05, 0.2, -0.5, 0.5), settings={})
        with pytest.raises(WindowMismatch):
            compare_rescaled(rs, 12.0, p, w)

    def test_synthetic_match(self):
        p = build_polynomial((1, 1, 1))
        ell = 12.0
        w = Window(1.0, 1.8, -1.0, 1.0)
        s_true = complex(math.log(4.0) + 2e-4, 3e-4)
        rs = ResonanceSet(
            entries=[ResonanceEntry(s=s_true / ell, residual=0.0, newton_iters=3,
                                    verified=True)],
            window=w.scaled(1 / ell),
            settings={},
        )
        rep = compare_rescaled(rs, ell, p, w)
        assert rep.card_resonances == rep.card_chain == 1
        assert len(rep.pairs) == 1
        assert rep.pairs[0][2] == pytest.approx(abs(s_true - math.log(4.0)), rel=1e-9)
        assert rep.pairs[0][3] == "main"
        assert rep.max_distance_main < 1e-3

    def test_zero_region_tagged(self):
        p = build_polynomial((1, 1, 1))
        ell = 12.0
        w = Window(-0.3, 0.4, -1.0, 1.0)
        rs = ResonanceSet(
            entries=[ResonanceEntry(s=complex(0.004, 0.001), residual=0.0,
                                    newton_iters=1, verified=False)],
            window=w.scaled(1 / ell),
            settings={},
        )
        rep = compare_rescaled(rs, ell, p, w)
        # double zero at s = 0 gives two slots; one absorbs the resonance
        assert rep.card_chain == 2
        assert rep.pairs[0][3] == "near_zero_chain"
        assert all(region == "near_zero_chain" for _, region in rep.unmatched_chain)

    def test_empty_between_chains(self):
        p = build_polynomial((1, 1, 1))
        ell = 12.0
        w = Window(0.4, 1.0, -1.0, 1.0)
        rs = ResonanceSet(entries=[], window=w.scaled(1 / ell), settings={})
        rep = compare_rescaled(rs, ell, p, w)
        assert rep.card_resonances == rep.card_chain == 0


@pytest.fixture(scope="module")
def theorem3_setup():
    dbs = {
        ell: compile_database(build_flow_adapted((1, 1, 1), ell), 14)
        for ell in (8.0, 12.0)
    }
    return dbs, build_polynomial((1, 1, 1))


class TestTheorem3:

    def test_z_zero_is_exact(self, theorem3_setup):
        dbs, p = theorem3_setup
        sup = theorem3_supnorm(dbs[8.0], 8.0, p, Window(-1, 2, -8, 8), [0.0], grid_n=11)
        assert sup == 0.0

    def test_supnorm_shrinks_with_ell(self, theorem3_setup):
        dbs, p = theorem3_setup
        w = Window(-1.0, 2.0, -8.0, 8.0)
        sup8 = theorem3_supnorm(dbs[8.0], 8.0, p, w, [1.0])
        sup12 = theorem3_supnorm(dbs[12.0], 12.0, p, w, [1.0])
        assert sup12 < sup8 / 2.0

    def test_grid_refinement_stable(self, theorem3_setup):
        dbs, p = theorem3_setup
        w = Window(-1.0, 2.0, -8.0, 8.0)
        coarse = theorem3_supnorm(dbs[12.0], 12.0, p, w, [1.0], grid_n=41)
        fine = theorem3_supnorm(dbs[12.0], 12.0, p, w, [1.0], grid_n=81)
        assert abs(fine - coarse) < 0.1 * coarse
