"""The nine end-to-end acceptance criteria.

Each test prints one ``PASS``/``FAIL`` line.  Running this file as a script
prints the same lines without pytest.
"""

import itertools
import sys

import numpy as np
import pytest

from cubecat.cube import CubeCategory, cube_homs, hom_count_formula, verify_cube_axioms
from cubecat.presheaf import (
    attachment_square,
    boundary,
    boundary_coequalizer,
    connection_homotopy,
    cylinder,
    is_homotopy,
    pushout_product,
    representable,
    tensor,
)
from cubecat.site import CONNECTIONS, PLAIN, SIGMA, verify_site_axioms
from cubecat.spans import verify_span_identities
from cubecat.topology import homology, nerve_boolean, product, realize
from oracles import generated_homs

BOUNDS = [(PLAIN, 4), (CONNECTIONS, 4), (SIGMA, 3)]

_cube_reports = {}


def cube_report(site, D):
    key = (site.name, D)
    if key not in _cube_reports:
        _cube_reports[key] = verify_cube_axioms(site, D)
    return _cube_reports[key]


def announce(number, title, failures):
    line = f"criterion {number} {'PASS' if not failures else 'FAIL'}: {title}"
    if failures:
        line += f" ({'; '.join(map(str, failures[:3]))})"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return failures


def failed_checks(rep, names=None):
    return [f"{rep.site}:{c.name} {c.failures}/{c.checks}" for c in rep.results if (names is None or c.name in names) and not c.passed]


def criterion_1():
    bad = []
    for site, D in BOUNDS:
        rep = verify_site_axioms(site, D)
        bad += failed_checks(rep)
        if site is SIGMA and not all(rep[n].checks for n in ("CG1", "CG2", "CG3", "CG4")):
            bad.append("crossed-group checks did not run")
    return bad


def criterion_2():
    bad = []
    for site, D in [(PLAIN, 3), (CONNECTIONS, 3), (SIGMA, 2)]:
        bad += failed_checks(cube_report(site, D), {"CM1", "CM2", "mu-monoid-hom", "M-functor"})
    return bad


def criterion_3():
    bad = []
    expected = [(PLAIN, 1, 1, 3), (PLAIN, 2, 1, 4), (CONNECTIONS, 2, 1, 5)] + [(PLAIN, 0, n, 2**n) for n in range(5)]
    for site, m, n, want in expected:
        got = len(cube_homs(site, m, n))
        if got != want:
            bad.append(f"{site.name} ({m},{n}) {got} != {want}")
    for kind, site in (("plain", PLAIN), ("connections", CONNECTIONS)):
        oracle = generated_homs(kind, 4)
        for m in range(5):
            for n in range(5):
                enum = len(cube_homs(site, m, n))
                if not enum == hom_count_formula(site, m, n) == len(oracle[(m, n)]):
                    bad.append(f"{kind} ({m},{n})")
    for m in range(5):
        for n in range(5):
            if len(cube_homs(SIGMA, m, n)) != hom_count_formula(SIGMA, m, n):
                bad.append(f"symmetric ({m},{n})")
    return bad


def criterion_4():
    bad = []
    for site, D in BOUNDS:
        rep = cube_report(site, D)
        bad += failed_checks(rep, {"unit-laws", "associativity", "normal-form-bijection", "kernel-agrees-with-formula"})
        cat = CubeCategory(site)
        total = sum(len(cat.homs(a, b)) * len(cat.homs(b, c)) * len(cat.homs(c, d)) for a, b, c, d in itertools.product(range(D + 1), repeat=4))
        if rep["associativity"].checks != total:
            bad.append(f"{site.name}: associativity covered {rep['associativity'].checks} of {total} triples")
    return bad


def criterion_5():
    bad = []
    for site in (PLAIN, CONNECTIONS, SIGMA):
        bad += failed_checks(verify_span_identities(site, 3))
    return bad


def _same_image(a, b, degrees):
    return all(sorted(a.maps[k].tolist()) == sorted(b.maps[k].tolist()) for k in degrees)


def criterion_6():
    bad = []
    for site in (PLAIN, CONNECTIONS):
        for r in range(4):
            X = representable(r, 3, site)
            for n in range(r + 1):
                res = attachment_square(X, n)
                if not res.passed:
                    bad.append(f"{site.name} attach r={r} n={n}")
            B, incl = boundary(r, 3, site)
            C, cmp = boundary_coequalizer(r, 3, site)
            if not (cmp.is_natural() and cmp.is_injective() and _same_image(cmp, incl, range(4))):
                bad.append(f"{site.name} boundary r={r}")
    return bad


def criterion_7():
    bad = []
    for site in (PLAIN, CONNECTIONS):
        for m in range(4):
            for n in range(4 - m):
                P, cmp = pushout_product(m, n, 3, site)
                B, incl = boundary(m + n, 3, site)
                ok = P.sizes() == B.sizes() and cmp.is_natural() and cmp.is_injective() and _same_image(cmp, incl, range(4))
                if not ok:
                    bad.append(f"{site.name} pushout-product ({m},{n})")
        objs = {"rep:1": representable(1, 3, site), "boundary:2": boundary(2, 3, site)[0]}
        for (nx, X), (ny, Y) in itertools.product(objs.items(), repeat=2):
            lhs = realize(tensor(X, Y, 3), 3)
            rhs = product(realize(X, 3), realize(Y, 3))
            if lhs.counts[:4] != rhs.counts[:4]:
                bad.append(f"{site.name} {nx} x {ny}: {lhs.counts[:4]} vs {rhs.counts[:4]}")
    return bad


def criterion_8():
    bad = []
    for site in (PLAIN, CONNECTIONS):
        for n in range(4):
            H = homology(realize(representable(n, max(n, 1), site), n + 1), n)
            got = [(g.betti, list(g.torsion)) for g in H]
            if got != [(1, [])] + [(0, [])] * n:
                bad.append(f"{site.name} rep:{n} {got}")
        for n in (1, 2, 3):
            H = homology(realize(boundary(n, n, site)[0], n + 1), n)
            want = [2 if n == 1 else 1] + [1 if k == n - 1 else 0 for k in range(1, n + 1)]
            got = [g.betti for g in H]
            if got != want or any(g.torsion for g in H):
                bad.append(f"{site.name} boundary:{n} {got} != {want}")
    for n in range(4):
        N = nerve_boolean(n, 4)
        want = [(k + 2) ** n for k in range(5)]
        if list(N.counts) != want:
            bad.append(f"nerve n={n} {list(N.counts)}")
    return bad


def criterion_9():
    bad = []
    for site in (PLAIN, CONNECTIONS):
        for X in (representable(0, 3, site), representable(1, 3, site), representable(2, 3, site), boundary(2, 3, site)[0]):
            c = cylinder(X)
            for end in (c.iota0, c.iota1):
                back = end.then(c.retraction)
                if not all(np.array_equal(back.maps[n], np.arange(X.size(n))) for n in range(4)):
                    bad.append(f"{site.name} retraction {X.sizes()}")
    H, f0, f1, cyl = connection_homotopy(3)
    if not (H.is_natural() and is_homotopy(H, f0, f1, cyl)):
        bad.append("connection homotopy")
    return bad


CRITERIA = [
    (1, "site axioms, plain and connections at degree 4, symmetric at 3", criterion_1),
    (2, "crossed-module laws CM1 and CM2", criterion_2),
    (3, "hom counts against enumeration and closed forms", criterion_3),
    (4, "normal-form bijection and associativity", criterion_4),
    (5, "span identities at degree 3", criterion_5),
    (6, "attachment squares and boundary agreement for r <= 3", criterion_6),
    (7, "pushout-product and monoidal realization counts", criterion_7),
    (8, "homology of cubes and spheres, nerve counts", criterion_8),
    (9, "cylinder retractions and the connection homotopy", criterion_9),
]


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion-{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn):
    failures = announce(number, title, fn())
    assert not failures, failures


if __name__ == "__main__":
    results = [not announce(n, t, fn()) for n, t, fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
