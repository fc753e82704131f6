import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubecat import _pure
from cubecat.cube import CubeCategory, cube_compose, cube_push, enlarge, tensor_mor
from cubecat.site import CONNECTIONS, PLAIN, SIGMA

_kernels = pytest.importorskip("cubecat._kernels")

SITES = [PLAIN, CONNECTIONS, SIGMA]


def _keys(site, D):
    cat = CubeCategory(site)
    return cat, {(a, b): np.asarray(cat.keys(a, b), dtype=np.uint64) for a in range(D + 1) for b in range(D + 1)}


@pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
def test_batched_kernels_agree(site):
    D = 2
    cat, keys = _keys(site, D)
    for a in range(D + 1):
        for b in range(D + 1):
            for c in range(D + 1):
                assert np.array_equal(_pure.compose_all(keys[(b, c)], keys[(a, b)]), _kernels.compose_all(keys[(b, c)], keys[(a, b)]))
            assert np.array_equal(_pure.push_all(keys[(a, b)], a), _kernels.push_all(keys[(a, b)], a))
            left = np.repeat(keys[(a, b)], len(keys[(b, a)]))
            right = np.tile(keys[(b, a)], len(keys[(a, b)]))
            assert np.array_equal(_pure.tensor_pairs(left, right), _kernels.tensor_pairs(left, right))


@pytest.mark.parametrize("site", SITES, ids=lambda s: s.name)
def test_scalar_kernels_match_objects(site):
    cat = CubeCategory(site)
    for a in range(3):
        for b in range(3):
            for h in cat.homs(a, b):
                k = h.key(site)
                assert _kernels.unpack(k) == _pure.unpack(k)
                assert _kernels.enlarge(k) == _pure.enlarge(k) == enlarge(h, site).key(site)
                for mask in range(1 << a):
                    assert _kernels.pushforward(k, mask) == _pure.pushforward(k, mask) == cube_push(h, mask, site)
                for c in range(3):
                    for g in cat.homs(b, c):
                        want = cube_compose(g, h, site).key(site)
                        assert _kernels.compose(g.key(site), k) == _pure.compose(g.key(site), k) == want
                for g in cat.homs(1, 1):
                    assert _kernels.tensor(k, g.key(site)) == tensor_mor(h, g, site).key(site)


@given(st.integers(1, 300), st.lists(st.tuples(st.integers(0, 299), st.integers(0, 299)), max_size=400))
def test_union_find_agrees(n, edges):
    edges = [(a % n, b % n) for a, b in edges]
    a = np.array([e[0] for e in edges], dtype=np.int64)
    b = np.array([e[1] for e in edges], dtype=np.int64)
    lp = _pure.uf_labels(n, a, b)
    lk = np.asarray(_kernels.uf_labels(n, a, b))
    assert np.array_equal(lp, lk)
    # labels are class minima
    assert all(lp[x] <= x and lp[lp[x]] == lp[x] for x in range(n))


def test_assoc_failures_agree_and_detect():
    cat = CubeCategory(CONNECTIONS)
    t = [cat.comp(1, 2, 1), cat.comp(2, 1, 2), cat.comp(1, 1, 2), cat.comp(1, 2, 2)]
    assert _pure.assoc_failures(*t)[:2] == _kernels.assoc_failures(*t)[:2]
    assert _pure.assoc_failures(*t)[0] == 0
    broken = t[2].copy()
    broken[0, 0] = (broken[0, 0] + 1) % broken.shape[1]
    rp, rk = _pure.assoc_failures(t[0], t[1], broken, t[3]), _kernels.assoc_failures(t[0], t[1], broken, t[3])
    assert rp[0] > 0 and rp[:2] == rk[:2] and list(rp[2]) == list(rk[2])


@given(
    st.integers(0, 7).flatmap(
        lambda src: st.integers(0, 7).flatmap(
            lambda dst: st.tuples(
                st.just(src),
                st.just(dst),
                st.integers(0, (1 << src) - 1),
                st.integers(0, (1 << dst) - 1),
            )
        )
    ),
    st.randoms(use_true_random=False),
)
def test_pack_round_trip(t, rnd):
    src, dst, gamma, xi = t
    k = bin(gamma).count("1")
    fmap = sorted(rnd.randrange(max(dst, 1)) for _ in range(k)) if dst else []
    if k and not dst:
        return
    perm = list(range(k))
    rnd.shuffle(perm)
    key = _pure.pack(src, dst, gamma, xi, fmap, perm)
    assert _kernels.pack(src, dst, gamma, xi, fmap, perm) == key
    assert _pure.unpack(key) == (src, dst, gamma, xi, tuple(fmap), tuple(perm))


def test_pure_fallback_selected_by_environment():
    code = (
        "from cubecat import kernels; from cubecat.cube import verify_cube_axioms; "
        "import cubecat; assert cubecat.BACKEND == kernels.NAME; "
        "r = verify_cube_axioms('connections', 2); print(kernels.NAME, r.passed, r.checks)"
    )
    env = dict(os.environ, CUBECAT_PURE="1")
    pure = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    env.pop("CUBECAT_PURE")
    fast = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    assert pure[0] == "python" and fast[0] == "cython"
    assert pure[1:] == fast[1:] == ["True", fast[2]]
