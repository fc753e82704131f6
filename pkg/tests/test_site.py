import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubecat.errors import DegreeMismatch, InvalidMorphism, NotComposable, SchemaError
from cubecat.site import (
    CONNECTIONS,
    PLAIN,
    SIGMA,
    BaseMorphism,
    Subset,
    compose_base,
    enumerate_homs,
    factorize,
    get_site,
    lattice_eval,
    max_saturated,
    pullback,
    pushforward,
    verify_site_axioms,
)
from oracles import block_move

S3 = lambda *xs: Subset.of(3, xs)  # noqa: E731


def bm(m, n, fmap, twist=0):
    return BaseMorphism(m, n, tuple(fmap), twist)


class TestLattice:
    def test_examples(self):
        assert lattice_eval("meet", S3(0, 1), S3(1, 2)) == S3(1)
        assert lattice_eval("neg", S3(0, 2)) == S3(1)
        for n in range(4):
            assert lattice_eval("join", Subset.empty(n), Subset.full(n)) == Subset.full(n)

    def test_leq_and_errors(self):
        assert lattice_eval("leq", S3(1), S3(0, 1))
        assert not lattice_eval("leq", S3(2), S3(0, 1))
        with pytest.raises(DegreeMismatch):
            S3(0).meet(Subset.of(2, [0]))
        with pytest.raises(InvalidMorphism):
            Subset(2, 0b100)

    @given(st.integers(0, 5).flatmap(lambda n: st.tuples(st.just(n), *[st.integers(0, (1 << n) - 1)] * 3)))
    def test_boolean_algebra(self, t):
        n, a, b, c = t
        A, B, C = Subset(n, a), Subset(n, b), Subset(n, c)
        assert A & (B | C) == (A & B) | (A & C)
        assert ~(A & B) == ~A | ~B
        assert ~~A == A
        assert (A & ~A) == Subset.empty(n) and (A | ~A) == Subset.full(n)
        assert (A <= B) == ((A & B) == A)


class TestBaseMorphisms:
    def test_compose_examples(self):
        assert compose_base(bm(2, 2, [0, 1]), bm(2, 2, [0, 0])).map == (0, 0)
        # unit twists reproduce the untwisted composite
        f, g = bm(2, 2, [0, 1]), bm(2, 2, [0, 0])
        assert SIGMA.compose(f, g) == bm(2, 2, [0, 0])

    def test_sigma_block_move(self):
        swap = SIGMA.group.index((1, 0))
        assert SIGMA.group.act(2, swap, (0, 0, 1)) == (0, 1, 1)
        assert SIGMA.group.perm(3, SIGMA.group.restrict(2, (0, 0, 1), swap)) == (1, 2, 0)

    @pytest.mark.parametrize("n", range(4))
    def test_sigma_against_block_move_oracle(self, n):
        g = SIGMA.group
        for m in range(4):
            for f in itertools.combinations_with_replacement(range(n), m):
                for y in itertools.permutations(range(n)):
                    x = g.index(y)
                    yf, p = block_move(y, f)
                    assert g.act(n, x, f) == yf
                    assert g.perm(m, g.restrict(n, f, x)) == p

    def test_crossed_composition_is_pointwise(self):
        # as maps of finite sets, (f, x) is f o perm(x); composition must agree
        for m, k, n in itertools.product(range(4), repeat=3):
            for inner in SIGMA.homs(m, k):
                for outer in SIGMA.homs(k, n):
                    h = SIGMA.compose(outer, inner)
                    po, pi, ph = SIGMA.perm(outer), SIGMA.perm(inner), SIGMA.perm(h)
                    for j in range(m):
                        assert h.map[ph[j]] == outer.map[po[inner.map[pi[j]]]]

    def test_not_composable(self):
        with pytest.raises(NotComposable):
            compose_base(bm(2, 2, [0, 1]), bm(1, 3, [0]))

    def test_invalid(self):
        with pytest.raises(InvalidMorphism):
            bm(2, 2, [1, 0])
        with pytest.raises(InvalidMorphism):
            bm(2, 2, [0, 2])


class TestFactorPushPull:
    def test_factorize(self):
        assert factorize(bm(3, 2, [0, 0, 1])) == (bm(3, 2, [0, 0, 1]), Subset.full(2))
        assert factorize(bm(2, 3, [0, 2])) == (bm(2, 2, [0, 1]), Subset.of(3, [0, 2]))
        assert factorize(bm(2, 3, [1, 1])) == (bm(2, 1, [0, 0]), Subset.of(3, [1]))

    def test_pushforward(self):
        assert pushforward(bm(3, 2, [0, 0, 1]), S3(0, 2)) == Subset.full(2)
        assert pushforward(bm(3, 2, [0, 0, 1]), Subset.empty(3)) == Subset.empty(2)
        assert pushforward(bm(2, 3, [0, 2]), Subset.of(2, [1])) == S3(2)

    def test_pullback(self):
        pre, restricted = pullback(bm(3, 2, [0, 0, 1]), Subset.of(2, [1]))
        assert pre == S3(2) and restricted == bm(1, 1, [0])
        for n in range(4):
            for d in range(1 << n):
                assert pullback(CONNECTIONS.identity(n), Subset(n, d)) == (Subset(n, d), CONNECTIONS.identity(popcount(d)))

    def test_galois_example(self):
        f = bm(3, 2, [0, 0, 1])
        d = Subset.of(2, [1])
        assert pushforward(f, pullback(f, d)[0]) == d & Subset(2, f.image)

    def test_max_saturated(self):
        assert max_saturated(bm(2, 1, [0, 0]), Subset.of(2, [0])) == Subset.empty(2)
        assert max_saturated(bm(2, 1, [0, 0]), Subset.full(2)) == Subset.full(2)
        f = bm(2, 3, [0, 2])
        for d in range(4):
            assert max_saturated(f, Subset(2, d)) == Subset(2, d)

    @pytest.mark.parametrize("site", [PLAIN, CONNECTIONS, SIGMA], ids=lambda s: s.name)
    def test_galois_connection(self, site):
        for m, n in itertools.product(range(4), repeat=2):
            for f in site.homs(m, n):
                for a in range(1 << m):
                    for b in range(1 << n):
                        assert (site.push(f, a) & ~b == 0) == (a & ~site.pull(f, b)[0] == 0)


def popcount(x):
    return bin(x).count("1")


class TestEnumeration:
    def test_counts(self):
        assert len(enumerate_homs("plain", 1, 2)) == 2
        assert len(enumerate_homs("connections", 2, 1)) == 1
        assert len(enumerate_homs("symmetric", 2, 2)) == 6

    @pytest.mark.parametrize("m,n", list(itertools.product(range(5), repeat=2)))
    def test_binomial_counts(self, m, n):
        from math import comb, factorial

        assert len(PLAIN.homs(m, n)) == comb(n, m)
        monotone = comb(n + m - 1, m) if n else int(m == 0)
        assert len(CONNECTIONS.homs(m, n)) == monotone
        assert len(SIGMA.homs(m, n)) == len(CONNECTIONS.homs(m, n)) * factorial(m)

    def test_aliases_and_unknown(self):
        assert get_site("sigma") is SIGMA and get_site("symmetric") is SIGMA
        with pytest.raises(SchemaError):
            get_site("cubes")


class TestAxiomSuite:
    @pytest.mark.parametrize("site,D", [("plain", 3), ("connections", 3), ("symmetric", 3)])
    def test_passes(self, site, D):
        rep = verify_site_axioms(site, D)
        assert rep.passed, rep.to_text()
        assert rep.checks > 0

    def test_report_names(self):
        rep = verify_site_axioms("symmetric", 2)
        names = rep.names()
        assert "category-laws" in names
        assert any(n.startswith("CG") for n in names), names
