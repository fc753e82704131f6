# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled packed-key kernels; same API and key layout as ``_pure``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

NAME = "cython"
MAX_DEGREE = 7

cdef enum:
    MAP_SHIFT = 20
    PERM_SHIFT = 41


cdef struct Mor:
    int src
    int dst
    int gamma
    int xi
    int k
    int fmap[8]
    int perm[8]


cdef inline int popcount(int x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline void decode(uint64_t key, Mor* m) nogil:
    cdef int j
    m.src = <int>(key & 7)
    m.dst = <int>((key >> 3) & 7)
    m.gamma = <int>((key >> 6) & 0x7F)
    m.xi = <int>((key >> 13) & 0x7F)
    m.k = popcount(m.gamma)
    for j in range(m.k):
        m.fmap[j] = <int>((key >> (MAP_SHIFT + 3 * j)) & 7)
        m.perm[j] = <int>((key >> (PERM_SHIFT + 3 * j)) & 7)


cdef inline uint64_t encode(Mor* m) nogil:
    cdef uint64_t key = <uint64_t>m.src | (<uint64_t>m.dst << 3) | (<uint64_t>m.gamma << 6) | (<uint64_t>m.xi << 13)
    cdef int j
    for j in range(m.k):
        key |= (<uint64_t>m.fmap[j]) << (MAP_SHIFT + 3 * j)
        key |= (<uint64_t>m.perm[j]) << (PERM_SHIFT + 3 * j)
    return key


cdef inline int positions(int mask, int* out) nogil:
    cdef int i = 0, n = 0
    while mask:
        if mask & 1:
            out[n] = i
            n += 1
        mask >>= 1
        i += 1
    return n


cdef inline int select(int* gpos, int k, int* fmap, int* perm, int keep,
                       int* ngpos, int* nvals, int* nperm) nogil:
    # restrict f.x to the indices whose value lies in keep
    cdef int j, u, n = 0, cnt
    cdef int sel[8]
    cdef int hit[8]
    for j in range(8):
        hit[j] = 0
    for j in range(k):
        if (keep >> fmap[perm[j]]) & 1:
            sel[n] = j
            hit[perm[j]] = 1
            n += 1
    cnt = 0
    cdef int rank[8]
    for j in range(k):
        if hit[j]:
            rank[j] = cnt
            nvals[cnt] = fmap[j]
            cnt += 1
    for u in range(n):
        ngpos[u] = gpos[sel[u]]
        nperm[u] = rank[perm[sel[u]]]
    return n


cdef uint64_t compose_c(uint64_t outer, uint64_t inner) nogil:
    cdef Mor o, i, r
    decode(outer, &o)
    decode(inner, &i)
    cdef int gpo[8]
    cdef int gpi[8]
    cdef int orank[8]
    cdef int gpos[8]
    cdef int vals[8]
    cdef int xp[8]
    cdef int moved[8]
    cdef int order[8]
    cdef int star[8]
    cdef int fmap[8]
    cdef int perm[8]
    cdef int t, u, v, n, push = 0, keep, tmp
    positions(o.gamma, gpo)
    positions(i.gamma, gpi)
    for t in range(o.k):
        orank[gpo[t]] = t
        if (i.xi >> gpo[t]) & 1:
            push |= 1 << o.fmap[o.perm[t]]
    n = select(gpi, i.k, i.fmap, i.perm, o.gamma, gpos, vals, xp)
    for u in range(n):
        moved[u] = o.perm[orank[vals[u]]]
        order[u] = u
    # stable insertion sort of indices by moved value
    for u in range(1, n):
        tmp = order[u]
        v = u - 1
        while v >= 0 and moved[order[v]] > moved[tmp]:
            order[v + 1] = order[v]
            v -= 1
        order[v + 1] = tmp
    for t in range(n):
        star[order[t]] = t
        fmap[t] = o.fmap[moved[order[t]]]
    for t in range(n):
        perm[t] = star[xp[t]]
    keep = ((1 << o.dst) - 1) & ~push
    r.src = i.src
    r.dst = o.dst
    r.xi = o.xi | push
    r.k = select(gpos, n, fmap, perm, keep, gpi, r.fmap, r.perm)
    r.gamma = 0
    for t in range(r.k):
        r.gamma |= 1 << gpi[t]
    return encode(&r)


cdef int64_t push_c(uint64_t key, int mask) nogil:
    cdef Mor m
    decode(key, &m)
    cdef int gp[8]
    cdef int t
    cdef int64_t out = m.xi
    positions(m.gamma, gp)
    for t in range(m.k):
        if (mask >> gp[t]) & 1:
            out |= 1 << m.fmap[m.perm[t]]
    return out


cdef uint64_t tensor_c(uint64_t k1, uint64_t k2) nogil:
    cdef Mor a, b, r
    decode(k1, &a)
    decode(k2, &b)
    cdef int j
    r.src = a.src + b.src
    r.dst = a.dst + b.dst
    r.gamma = a.gamma | (b.gamma << a.src)
    r.xi = a.xi | (b.xi << a.dst)
    r.k = a.k + b.k
    for j in range(a.k):
        r.fmap[j] = a.fmap[j]
        r.perm[j] = a.perm[j]
    for j in range(b.k):
        r.fmap[a.k + j] = b.fmap[j] + a.dst
        r.perm[a.k + j] = b.perm[j] + a.k
    return encode(&r)


def pack(src, dst, gamma, xi, fmap, perm):
    key = src | (dst << 3) | (gamma << 6) | (xi << 13)
    for j, v in enumerate(fmap):
        key |= v << (MAP_SHIFT + 3 * j)
    for j, v in enumerate(perm):
        key |= v << (PERM_SHIFT + 3 * j)
    return key


def unpack(key):
    cdef Mor m
    decode(<uint64_t>int(key), &m)
    return (m.src, m.dst, m.gamma, m.xi,
            tuple(m.fmap[j] for j in range(m.k)), tuple(m.perm[j] for j in range(m.k)))


def compose(outer, inner):
    return int(compose_c(<uint64_t>int(outer), <uint64_t>int(inner)))


def pushforward(key, mask):
    return int(push_c(<uint64_t>int(key), <int>mask))


def tensor(k1, k2):
    return int(tensor_c(<uint64_t>int(k1), <uint64_t>int(k2)))


def enlarge(key):
    src, dst, gamma, xi, fmap, perm = unpack(key)
    return pack(src + 1, dst + 1, gamma | (1 << src), xi, list(fmap) + [dst], list(perm) + [len(perm)])


def compose_all(outer, inner):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] o = np.ascontiguousarray(outer, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] i = np.ascontiguousarray(inner, dtype=np.uint64)
    cdef Py_ssize_t r, s, no = o.shape[0], ni = i.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=2] out = np.empty((no, ni), dtype=np.uint64)
    with nogil:
        for r in range(no):
            for s in range(ni):
                out[r, s] = compose_c(o[r], i[s])
    return out


def compose_pairs(outer, inner):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] o = np.ascontiguousarray(outer, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] i = np.ascontiguousarray(inner, dtype=np.uint64)
    cdef Py_ssize_t r, n = o.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    with nogil:
        for r in range(n):
            out[r] = compose_c(o[r], i[r])
    return out


def push_all(keys, int src):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] k = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef Py_ssize_t r, n = k.shape[0]
    cdef int mask, width = 1 << src
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((n, width), dtype=np.int64)
    with nogil:
        for r in range(n):
            for mask in range(width):
                out[r, mask] = push_c(k[r], mask)
    return out


def tensor_pairs(left, right):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] a = np.ascontiguousarray(left, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] b = np.ascontiguousarray(right, dtype=np.uint64)
    cdef Py_ssize_t r, n = a.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    with nogil:
        for r in range(n):
            out[r] = tensor_c(a[r], b[r])
    return out


cdef inline int64_t find(int64_t* parent, int64_t x) nogil:
    cdef int64_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def uf_labels(Py_ssize_t n, a, b):
    """Connected components on ``range(n)``; each node is labelled by its class minimum."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ea = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] eb = np.ascontiguousarray(b, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent = np.arange(n, dtype=np.int64)
    cdef int64_t* p = <int64_t*>parent.data
    cdef Py_ssize_t e, m = ea.shape[0], x
    cdef int64_t rx, ry
    with nogil:
        for e in range(m):
            rx = find(p, ea[e])
            ry = find(p, eb[e])
            if rx < ry:
                p[ry] = rx
            elif ry < rx:
                p[rx] = ry
        for x in range(n):
            p[x] = find(p, x)
    return parent


def assoc_failures(gf_, hg_, h_gf_, hg_f_):
    """Count failures of ``h(gf) = (hg)f`` over index tables; returns (bad, total, first witness (h, g, f))."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] gf = np.ascontiguousarray(gf_, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] hg = np.ascontiguousarray(hg_, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] h_gf = np.ascontiguousarray(h_gf_, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] hg_f = np.ascontiguousarray(hg_f_, dtype=np.int64)
    cdef Py_ssize_t nh = hg.shape[0], ng = gf.shape[0], nf = gf.shape[1], h, g, f
    cdef Py_ssize_t bad = 0, wh = -1, wg = -1, wf = -1
    if gf.size == 0 or nh == 0:
        return 0, 0, None
    with nogil:
        for h in range(nh):
            for g in range(ng):
                for f in range(nf):
                    if h_gf[h, gf[g, f]] != hg_f[hg[h, g], f]:
                        if bad == 0:
                            wh = h
                            wg = g
                            wf = f
                        bad += 1
    return bad, nh * ng * nf, (None if bad == 0 else [wh, wg, wf])
