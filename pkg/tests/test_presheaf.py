import copy
import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubecat.cube import connection, cube_identity, face, iota0, iota_dagger
from cubecat.errors import FunctorialityError, SchemaError, TruncationError
from cubecat.presheaf import (
    attachment_square,
    boundary,
    boundary_coequalizer,
    category,
    coequalizer,
    connection_homotopy,
    coproduct,
    cylinder,
    dump_presheaf,
    empty,
    is_homotopy,
    load_presheaf,
    nondegenerate_decompose,
    pushout,
    pushout_product,
    representable,
    representable_tensor_iso,
    skeleton,
    subpresheaf,
    tensor,
    terminal,
    verify_presheaf_laws,
    yoneda_map,
)
from cubecat.site import CONNECTIONS, PLAIN, SIGMA

SITES = [PLAIN, CONNECTIONS, SIGMA]


def generated(X, chosen):
    """Smallest subpresheaf containing the chosen ``(degree, cell)`` pairs."""
    keep = {m: np.zeros(X.size(m), dtype=bool) for m in range(X.D + 1)}
    for n, x in chosen:
        for m in range(X.D + 1):
            keep[m][X.act[(m, n)][:, x]] = True
    return subpresheaf(X, keep)


class TestRepresentables:
    def test_terminal(self):
        for site in SITES:
            assert terminal(3 if site is not SIGMA else 2, site).sizes() == [1] * (4 if site is not SIGMA else 3)

    def test_interval_plain(self):
        assert representable(1, 1, "plain").sizes() == [2, 3]

    def test_cylinder_end_splits(self):
        X = representable(1, 3, "connections")
        cat = X.cat
        for n in range(3):
            to_end = X.act[(n, n + 1)][cat.lookup(iota0(n))]
            up = X.act[(n + 1, n)][cat.lookup(iota_dagger(n))]
            assert len(np.unique(to_end)) == X.size(n)
            assert len(np.unique(up)) == X.size(n)
            assert np.array_equal(to_end[up], np.arange(X.size(n)))

    def test_truncation(self):
        with pytest.raises(TruncationError):
            representable(3, 2)
        X = representable(1, 2)
        with pytest.raises(TruncationError):
            X.apply(cube_identity(3), 0)


class TestColimits:
    def test_pushout_over_empty_is_coproduct(self):
        X, Y = representable(1, 2, "plain"), representable(2, 2, "plain")
        E = empty(2, "plain")
        from cubecat.presheaf import PresheafMap

        P, _, _ = pushout(PresheafMap(E, X, {}), PresheafMap(E, Y, {}))
        S, _ = coproduct(X, Y)
        assert P.sizes() == S.sizes()
        assert P.functoriality_failure() is None

    def test_coequalizer_of_equal_maps(self):
        f = yoneda_map(face(1, 0, 1), 3)
        Q, q = coequalizer(f, f)
        assert Q.sizes() == f.target.sizes() and q.is_iso()

    @pytest.mark.parametrize("site", [PLAIN, CONNECTIONS], ids=lambda s: s.name)
    def test_inclusion_exclusion(self, site):
        # two intervals glued at a vertex
        a = yoneda_map(face(1, 0, 1, site), 3, site)
        b = yoneda_map(face(1, 0, 0, site), 3, site)
        P, jx, jy = pushout(a, b)
        A, X, Y = a.source, a.target, b.target
        assert all(P.size(n) == X.size(n) + Y.size(n) - A.size(n) for n in range(4))
        assert jx.is_injective() and jy.is_injective() and jx.is_natural() and jy.is_natural()


class TestSkeleta:
    def test_skeleton_of_representable(self):
        for r in range(4):
            X = representable(r, 3, "connections")
            S, i = skeleton(X, r)
            assert i.is_iso()

    def test_vertices_of_interval(self):
        S, _ = skeleton(representable(1, 3, "plain"), 0)
        assert S.sizes() == [2, 2, 2, 2]

    def test_negative_skeleton_is_empty(self):
        S, _ = skeleton(representable(2, 2), -1)
        assert S.sizes() == [0, 0, 0]

    @pytest.mark.parametrize("site", [PLAIN, CONNECTIONS], ids=lambda s: s.name)
    def test_attachment_square(self, site):
        for r in range(3):
            X = representable(r, 3, site)
            for n in range(r + 1):
                res = attachment_square(X, n)
                assert res.passed, (r, n, res)


class TestBoundary:
    def test_interval_boundary(self):
        B, incl = boundary(1, 3, "plain")
        assert B.sizes() == [2, 2, 2, 2]
        two, _ = coproduct(terminal(3, "plain"), terminal(3, "plain"))
        assert B.sizes() == two.sizes()
        assert B.dim == 0

    def test_boundary_zero(self):
        B, _ = boundary(0, 3)
        assert B.sizes() == [0] * 4

    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_agrees_with_coequalizer(self, site):
        for r in range(4):
            B, incl = boundary(r, 3, site)
            C, cmp = boundary_coequalizer(r, 3, site)
            assert cmp.is_natural() and cmp.is_injective()
            for m in range(4):
                assert sorted(cmp.maps[m].tolist()) == sorted(incl.maps[m].tolist())

    def test_known_sizes(self):
        assert boundary(2, 3, "plain")[0].sizes() == [4, 8, 12, 16]
        assert boundary(3, 3, "connections")[0].sizes() == [8, 20, 50, 122]
        assert boundary(3, 3, "symmetric")[0].sizes() == [8, 20, 68, 296]

    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_pushout_product(self, site):
        for m, n in [(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)]:
            P, cmp = pushout_product(m, n, 3, site)
            B, incl = boundary(m + n, 3, site)
            assert P.sizes() == B.sizes()
            assert cmp.is_natural() and cmp.is_injective()
            for k in range(4):
                assert sorted(cmp.maps[k].tolist()) == sorted(incl.maps[k].tolist())


class TestDecomposition:
    def test_nondegenerate_cell(self):
        X = representable(2, 3)
        d = nondegenerate_decompose(X, 2, X.cat.identity_index(2))
        assert d.degree == 2 and d.sigma == cube_identity(2) and d.core == X.cat.identity_index(2)

    def test_degenerate_along_codagger(self):
        X = representable(1, 3, "plain")
        x = X.cat.identity_index(1)
        y = X.apply(iota_dagger(1), x)
        d = nondegenerate_decompose(X, 2, y)
        assert (d.degree, d.core, d.sigma) == (1, x, iota_dagger(1))

    def test_connection_recovered(self):
        X = representable(1, 3, "connections")
        x = X.cat.identity_index(1)
        y = X.apply(connection(1), x)
        d = nondegenerate_decompose(X, 2, y)
        assert (d.degree, d.core, d.sigma) == (1, x, connection(1))

    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_recomposition(self, site):
        X = boundary(2, 2, site)[0]
        for m in range(3):
            for x in range(X.size(m)):
                d = nondegenerate_decompose(X, m, x)
                assert X.apply(d.sigma, d.core) == x
                assert X.nondegenerate(d.degree)[d.core]


class TestTensor:
    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_unit(self, site):
        D = 2
        for X in (representable(1, D, site), boundary(2, D, site)[0]):
            T = tensor(X, terminal(D, site), D)
            assert T.sizes() == X.sizes()

    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_representables(self, site):
        T = tensor(representable(1, 3, site), representable(1, 3, site), 3)
        iso = representable_tensor_iso(T)
        assert iso.is_iso() and iso.is_natural()
        assert T.sizes() == representable(2, 3, site).sizes()

    def test_functorial_on_pairs(self):
        objs = [representable(1, 2), boundary(2, 2)[0], boundary(1, 2)[0]]
        for X, Y in itertools.product(objs, repeat=2):
            assert tensor(X, Y, 2).functoriality_failure() is None


class TestCylinder:
    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_cylinder_of_terminal(self, site):
        D = 3 if site is not SIGMA else 2
        c = cylinder(terminal(D, site))
        assert c.cyl.sizes() == representable(1, D, site).sizes()
        assert representable_tensor_iso(c.cyl).is_iso()

    def test_retraction_identities(self):
        for X in (representable(1, 3), boundary(2, 3)[0]):
            c = cylinder(X)
            for end in (c.iota0, c.iota1):
                back = end.then(c.retraction)
                assert all(np.array_equal(back.maps[n], np.arange(X.size(n))) for n in range(4))
            assert c.retraction.is_natural() and c.iota0.is_natural() and c.iota1.is_natural()

    def test_constant_homotopy(self):
        X = representable(1, 3, "plain")
        c = cylinder(X)
        f = X.identity_map()
        assert is_homotopy(c.retraction, f, f, c)

    def test_connection_homotopy(self):
        H, f0, f1, cyl = connection_homotopy(3)
        assert H.is_natural() and f1.is_natural()
        assert is_homotopy(H, f0, f1, cyl)
        assert not is_homotopy(H, f0, f0, cyl)
        assert not is_homotopy(H, f1, f0, cyl)


class TestSerialization:
    @pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
    def test_round_trip(self, site):
        X = representable(1, 2, site)
        assert load_presheaf(json.loads(json.dumps(dump_presheaf(X)))) == X
        B = boundary(2, 2, site)[0]
        assert load_presheaf(dump_presheaf(B)) == B
        assert load_presheaf(dump_presheaf(B, elementary=False)) == B

    def test_round_trip_through_file(self, tmp_path):
        X = boundary(2, 2, "plain")[0]
        path = tmp_path / "b.json"
        path.write_text(json.dumps(dump_presheaf(X)))
        assert load_presheaf(path) == X

    def test_missing_generator_is_schema_error(self):
        doc = dump_presheaf(representable(1, 1, "plain"))
        doc["action"] = [a for a in doc["action"] if a["morphism"]["src"] == a["morphism"]["dst"] and a["morphism"]["gamma"]]
        doc["action"] = [a for a in doc["action"] if a["morphism"]["xi"] == [] and a["morphism"]["delta"]]
        with pytest.raises(SchemaError, match="no action"):
            load_presheaf(doc)

    def test_non_functorial_names_pair(self):
        doc = dump_presheaf(boundary(2, 2, "plain")[0])
        bad = copy.deepcopy(doc)
        for a in bad["action"]:
            if (a["morphism"]["src"], a["morphism"]["dst"]) == (0, 1):
                k = sorted(a["map"])[0]
                a["map"][k] = next(v for v in sorted(set(a["map"].values())) if v != a["map"][k])
                break
        with pytest.raises(FunctorialityError) as exc:
            load_presheaf(bad)
        assert exc.value.pair is not None

    def test_malformed(self):
        with pytest.raises(SchemaError):
            load_presheaf({"site": "plain"})
        with pytest.raises(SchemaError):
            load_presheaf({"site": "plain", "max_degree": 1, "cells": {"0": ["a", "a"]}})


@pytest.mark.parametrize("site,D", [("plain", 2), ("connections", 2), ("symmetric", 2)])
def test_laws_suite(site, D):
    rep = verify_presheaf_laws(site, D)
    assert rep.passed, rep.to_text()


@given(st.sampled_from([PLAIN, CONNECTIONS]), st.data())
def test_generated_subpresheaves(site, data):
    X = representable(data.draw(st.integers(1, 3)), 3, site)
    chosen = []
    for _ in range(data.draw(st.integers(1, 4))):
        n = data.draw(st.integers(0, 3))
        chosen.append((n, data.draw(st.integers(0, X.size(n) - 1))))
    S, incl = generated(X, chosen)
    assert S.functoriality_failure() is None
    assert incl.is_natural() and incl.is_injective()
    for n in range(4):
        sk, i = skeleton(S, n)
        assert i.is_natural() and i.is_injective()
        if n >= 3:
            assert i.is_iso()


def test_category_is_shared():
    assert category("plain") is category(PLAIN)
