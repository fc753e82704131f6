"""Pure-Python implementation of the packed-key kernels.

A cube morphism over a twist-free or symmetric site is packed into one
unsigned 64-bit integer:

    bits  0- 2  src degree
    bits  3- 5  dst degree
    bits  6-12  gamma mask (subset of src)
    bits 13-19  xi mask (subset of dst)
    bits 20-40  forward map, 3 bits per entry, k = popcount(gamma) entries
    bits 41-61  twist permutation of k, 3 bits per entry

The morphism it encodes is ``f . x . gamma^dagger`` marked by ``xi``.
Unused entries are zero, so equal morphisms have equal keys.
"""

from __future__ import annotations

import numpy as np

NAME = "python"
MAX_DEGREE = 7

_MAP_SHIFT = 20
_PERM_SHIFT = 41


def pack(src, dst, gamma, xi, fmap, perm):
    key = src | (dst << 3) | (gamma << 6) | (xi << 13)
    for j, v in enumerate(fmap):
        key |= v << (_MAP_SHIFT + 3 * j)
    for j, v in enumerate(perm):
        key |= v << (_PERM_SHIFT + 3 * j)
    return key


def unpack(key):
    key = int(key)
    src = key & 7
    dst = (key >> 3) & 7
    gamma = (key >> 6) & 0x7F
    xi = (key >> 13) & 0x7F
    k = bin(gamma).count("1")
    fmap = tuple((key >> (_MAP_SHIFT + 3 * j)) & 7 for j in range(k))
    perm = tuple((key >> (_PERM_SHIFT + 3 * j)) & 7 for j in range(k))
    return src, dst, gamma, xi, fmap, perm


def _positions(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _select(gpos, fmap, perm, keep):
    """Restrict ``f . x`` with gamma positions ``gpos`` to indices whose value lies in ``keep``.

    Returns (new gamma positions, values f(q_u) for the sorted image q, new twist).
    """
    sel = [j for j in range(len(perm)) if (keep >> fmap[perm[j]]) & 1]
    img = sorted(perm[j] for j in sel)
    rank = {v: u for u, v in enumerate(img)}
    return [gpos[j] for j in sel], [fmap[q] for q in img], [rank[perm[j]] for j in sel]


def compose(outer, inner):
    a, b, gi, xii, fi, pi = unpack(inner)
    b2, c, go, xio, fo, po = unpack(outer)
    gpos_o = _positions(go)
    push = 0
    for t, g in enumerate(gpos_o):
        if (xii >> g) & 1:
            push |= 1 << fo[po[t]]
    xi = xio | push
    # pull the outer gamma back along the inner forward leg
    gpos, vals, xprime = _select(_positions(gi), fi, pi, go)
    orank = {g: t for t, g in enumerate(gpos_o)}
    fprime = [orank[v] for v in vals]
    # (fo, po) o (f', x') = (fo o (po . f'), (f'^* po) x')
    moved = [po[v] for v in fprime]
    order = sorted(range(len(moved)), key=lambda u: (moved[u], u))
    star = [0] * len(moved)
    for r, u in enumerate(order):
        star[u] = r
    fmap = [fo[moved[u]] for u in order]
    perm = [star[v] for v in xprime]
    # apply Lambda(not push)
    keep = ((1 << c) - 1) & ~push
    gpos, vals, perm = _select(gpos, fmap, perm, keep)
    gamma = 0
    for g in gpos:
        gamma |= 1 << g
    return pack(a, c, gamma, xi, vals, perm)


def pushforward(key, mask):
    src, dst, gamma, xi, fmap, perm = unpack(key)
    out = xi
    for t, g in enumerate(_positions(gamma)):
        if (mask >> g) & 1:
            out |= 1 << fmap[perm[t]]
    return out


def tensor(k1, k2):
    s1, d1, g1, x1, f1, p1 = unpack(k1)
    s2, d2, g2, x2, f2, p2 = unpack(k2)
    n1 = len(f1)
    return pack(
        s1 + s2,
        d1 + d2,
        g1 | (g2 << s1),
        x1 | (x2 << d1),
        list(f1) + [v + d1 for v in f2],
        list(p1) + [v + n1 for v in p2],
    )


def enlarge(key):
    src, dst, gamma, xi, fmap, perm = unpack(key)
    return pack(src + 1, dst + 1, gamma | (1 << src), xi, list(fmap) + [dst], list(perm) + [len(perm)])


def compose_all(outer, inner):
    outer = np.asarray(outer, dtype=np.uint64)
    inner = np.asarray(inner, dtype=np.uint64)
    out = np.empty((len(outer), len(inner)), dtype=np.uint64)
    for r, o in enumerate(outer.tolist()):
        for s, i in enumerate(inner.tolist()):
            out[r, s] = compose(o, i)
    return out


def compose_pairs(outer, inner):
    outer = np.asarray(outer, dtype=np.uint64)
    inner = np.asarray(inner, dtype=np.uint64)
    return np.array([compose(o, i) for o, i in zip(outer.tolist(), inner.tolist())], dtype=np.uint64)


def push_all(keys, src):
    keys = np.asarray(keys, dtype=np.uint64)
    out = np.empty((len(keys), 1 << src), dtype=np.int64)
    for r, key in enumerate(keys.tolist()):
        for mask in range(1 << src):
            out[r, mask] = pushforward(key, mask)
    return out


def tensor_pairs(left, right):
    left = np.asarray(left, dtype=np.uint64)
    right = np.asarray(right, dtype=np.uint64)
    return np.array([tensor(a, b) for a, b in zip(left.tolist(), right.tolist())], dtype=np.uint64)


def uf_labels(n, a, b):
    """Connected components of the graph on ``range(n)``; each node is labelled by its class minimum."""
    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for x, y in zip(np.asarray(a).tolist(), np.asarray(b).tolist()):
        rx, ry = find(x), find(y)
        if rx != ry:
            if rx < ry:
                parent[ry] = rx
            else:
                parent[rx] = ry
    return np.array([find(x) for x in range(n)], dtype=np.int64)


def assoc_failures(gf, hg, h_gf, hg_f):
    """Count failures of ``h(gf) = (hg)f`` over index tables; returns (bad, total, first witness (h, g, f))."""
    gf, hg = np.asarray(gf), np.asarray(hg)
    if gf.size == 0 or hg.shape[0] == 0:
        return 0, 0, None
    nh, ng, nf = hg.shape[0], gf.shape[0], gf.shape[1]
    bad = 0
    wit = None
    for h in range(nh):
        left = h_gf[h][gf]
        right = hg_f[hg[h]]
        diff = left != right
        n = int(diff.sum())
        if n and wit is None:
            g, f = np.argwhere(diff)[0]
            wit = [h, int(g), int(f)]
        bad += n
    return bad, nh * ng * nf, wit
