"""Simplicial realization and integral homology.

A ``k``-simplex of the nerve of the Boolean lattice ``2^n`` is a chain
``S_0 <= ... <= S_k``.  It is stored as the vector of entry times
``e_c = min{j : c in S_j}`` (``k + 1`` when ``c`` never enters), packed as
``sum_c e_c (k + 2)^c``; hence there are ``(k + 2)^n`` of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import TruncationError
from .report import Report


@dataclass
class SimplicialSet:
    """Truncated simplicial set: ``faces[k][i]`` maps ``k``-simplices to ``(k-1)``-simplices,
    ``degeneracies[k][i]`` maps ``k``-simplices to ``(k+1)``-simplices (for ``k < K``)."""

    counts: list
    faces: dict = field(default_factory=dict)
    degeneracies: dict = field(default_factory=dict)
    names: dict = field(default_factory=dict)

    @property
    def K(self):
        return len(self.counts) - 1

    def identity_failures(self):
        """Violations of the simplicial identities as a list of short descriptions."""
        bad = []
        d, s = self.faces, self.degeneracies
        for k in range(2, self.K + 1):
            for i in range(k + 1):
                for j in range(i + 1, k + 1):
                    # d_i d_j = d_{j-1} d_i
                    if not np.array_equal(d[k - 1][i][d[k][j]], d[k - 1][j - 1][d[k][i]]):
                        bad.append(f"d{i}d{j} in {k}")
        for k in range(0, self.K):
            for j in range(k + 1):
                for i in range(k + 2):
                    lhs = d[k + 1][i][s[k][j]]
                    if i < j:
                        rhs = s[k - 1][j - 1][d[k][i]] if k >= 1 else None
                    elif i in (j, j + 1):
                        rhs = np.arange(self.counts[k])
                    else:
                        rhs = s[k - 1][j][d[k][i - 1]] if k >= 1 else None
                    if rhs is not None and not np.array_equal(lhs, rhs):
                        bad.append(f"d{i}s{j} in {k}")
        for k in range(0, self.K - 1):
            for i in range(k + 1):
                for j in range(i, k + 1):
                    # s_i s_j = s_{j+1} s_i  for i <= j
                    if not np.array_equal(s[k + 1][i][s[k][j]], s[k + 1][j + 1][s[k][i]]):
                        bad.append(f"s{i}s{j} in {k}")
        return bad

    def nondegenerate(self, k):
        mask = np.ones(self.counts[k], dtype=bool)
        if k >= 1:
            for j in range(k):
                mask[self.degeneracies[k - 1][j]] = False
        return mask

    def nondegenerate_counts(self):
        return [int(self.nondegenerate(k).sum()) for k in range(self.K + 1)]

    def euler_characteristic(self):
        return sum((-1) ** k * c for k, c in enumerate(self.nondegenerate_counts()))

    def to_json(self):
        return {
            "simplices": list(self.counts),
            "faces": {str(k): [v.tolist() for v in self.faces[k]] for k in sorted(self.faces)},
            "degeneracies": {str(k): [v.tolist() for v in self.degeneracies[k]] for k in sorted(self.degeneracies)},
        }


@dataclass
class SimplicialMap:
    source: SimplicialSet
    target: SimplicialSet
    maps: dict

    def is_simplicial(self):
        s, t = self.source, self.target
        for k in range(1, s.K + 1):
            for i in range(k + 1):
                if not np.array_equal(self.maps[k - 1][s.faces[k][i]], t.faces[k][i][self.maps[k]]):
                    return False
        for k in range(s.K):
            for j in range(k + 1):
                if not np.array_equal(self.maps[k + 1][s.degeneracies[k][j]], t.degeneracies[k][j][self.maps[k]]):
                    return False
        return True

    def is_injective(self):
        return all(len(np.unique(v)) == len(v) for v in self.maps.values())

    def is_iso(self):
        return self.is_injective() and all(len(np.unique(self.maps[k])) == self.target.counts[k] for k in self.maps)


# ---------------------------------------------------------------------------
# nerves of Boolean lattices


def _entries(n, k):
    """All entry-time vectors, shape ``((k+2)^n, n)``, in packed-index order."""
    base = k + 2
    idx = np.arange(base**n, dtype=np.int64)
    return np.stack([(idx // base**c) % base for c in range(n)], axis=1) if n else np.zeros((1, 0), dtype=np.int64)


def _pack(e, k):
    n = e.shape[-1]
    weights = (k + 2) ** np.arange(n, dtype=np.int64)
    return (e * weights).sum(axis=-1)


def chain_masks(n, k):
    """``masks[s, j]`` is ``S_j`` of simplex ``s``."""
    e = _entries(n, k)
    j = np.arange(k + 1)
    member = e[:, None, :] <= j[None, :, None]  # (s, j, c)
    return (member * (1 << np.arange(n))[None, None, :]).sum(axis=2)


def masks_to_index(masks, n, k):
    """Inverse of :func:`chain_masks` for increasing chains."""
    bits = (masks[..., None] >> np.arange(n)) & 1  # (..., j, c)
    e = (1 - bits).sum(axis=-2)
    return _pack(e, k)


def nerve_boolean(n, K):
    counts = [(k + 2) ** n for k in range(K + 1)]
    faces, degs = {}, {}
    for k in range(1, K + 1):
        e = _entries(n, k)
        faces[k] = [_pack(np.where(e <= i, e, e - 1), k - 1) for i in range(k + 1)]
    for k in range(K):
        e = _entries(n, k)
        degs[k] = [_pack(np.where(e <= j, e, e + 1), k + 1) for j in range(k + 1)]
    return SimplicialSet(counts, faces, degs)


# ---------------------------------------------------------------------------
# realization


class Realization(SimplicialSet):
    """``|X|`` with, per dimension, the representative ``(r, x, simplex)`` of every class."""


def realize(X, K):
    """Coend of ``X(r) x N(2^r)`` over ``r``, truncated at simplicial dimension ``K``.

    Only degrees up to ``dim X`` take part: every cell is a degeneracy of a
    cell of degree at most ``dim X``.
    """
    if K < 0:
        raise TruncationError("simplicial dimension must be non-negative")
    cat = X.cat
    d = X.dim
    degs = range(d + 1)
    counts, reps, labels, offsets = [], {}, {}, {}
    for k in range(K + 1):
        off, offs = 0, {}
        for r in degs:
            offs[r] = off
            off += X.size(r) * (k + 2) ** r
        a_all, b_all = [], []
        for r in degs:
            masks = chain_masks(r, k)  # (s, j)
            for rp in degs:
                hs = cat.homs(r, rp)
                if not hs or not X.size(rp):
                    continue
                pushed = cat.push(r, rp)[:, masks]  # (f, s, j)
                target = masks_to_index(pushed, rp, k)  # (f, s)
                act = X.act[(r, rp)]  # (f, x')
                f, x, s = np.meshgrid(np.arange(len(hs)), np.arange(X.size(rp)), np.arange(len(masks)), indexing="ij")
                nr = (k + 2) ** r
                nrp = (k + 2) ** rp
                a_all.append((offs[r] + act[f, x] * nr + s).ravel())
                b_all.append((offs[rp] + x * nrp + target[f, s]).ravel())
        a = np.concatenate(a_all) if a_all else np.zeros(0, dtype=np.int64)
        b = np.concatenate(b_all) if b_all else np.zeros(0, dtype=np.int64)
        lab = np.asarray(kernels.uf_labels(off, a, b))
        uniq, inverse = np.unique(lab, return_inverse=True)
        counts.append(len(uniq))
        labels[k] = inverse.astype(np.int64)
        offsets[k] = offs
        rs = []
        for g in uniq.tolist():
            r = max(rr for rr in degs if offs[rr] <= g)
            rest = g - offs[r]
            rs.append((r, rest // (k + 2) ** r, rest % (k + 2) ** r))
        reps[k] = rs

    def cls(k, r, x, s):
        return labels[k][offsets[k][r] + x * (k + 2) ** r + s]

    faces, degens = {}, {}
    for k in range(1, K + 1):
        faces[k] = []
        for i in range(k + 1):
            out = np.zeros(counts[k], dtype=np.int64)
            for c, (r, x, s) in enumerate(reps[k]):
                e = _entries(r, k)[s]
                out[c] = cls(k - 1, r, x, int(_pack(np.where(e <= i, e, e - 1), k - 1)))
            faces[k].append(out)
    for k in range(K):
        degens[k] = []
        for j in range(k + 1):
            out = np.zeros(counts[k], dtype=np.int64)
            for c, (r, x, s) in enumerate(reps[k]):
                e = _entries(r, k)[s]
                out[c] = cls(k + 1, r, x, int(_pack(np.where(e <= j, e, e + 1), k + 1)))
            degens[k].append(out)
    S = Realization(counts, faces, degens, {k: reps[k] for k in reps})
    S.presheaf = X
    S._labels, S._offsets = labels, offsets
    return S


def realization_class(S, k, r, x, s):
    X = S.presheaf
    if r > X.dim:
        from .presheaf import nondegenerate_decompose

        dec = nondegenerate_decompose(X, r, x)
        masks = chain_masks(r, k)[s]
        pushed = X.cat.push(r, dec.degree)[X.cat.lookup(dec.sigma)][masks]
        r, x, s = dec.degree, dec.core, int(masks_to_index(pushed[None, :], dec.degree, k)[0])
    return int(S._labels[k][S._offsets[k][r] + x * (k + 2) ** r + s])


def realize_map(phi, SX, SY):
    """``|phi|: |X| -> |Y|`` for realizations ``SX``, ``SY`` of the source and target."""
    maps = {}
    for k in range(SX.K + 1):
        maps[k] = np.array([realization_class(SY, k, r, int(phi.maps[r][x]), s) for r, x, s in SX.names[k]], dtype=np.int64)
    return SimplicialMap(SX, SY, maps)


def product(A, B):
    """Degreewise product of simplicial sets."""
    K = min(A.K, B.K)
    counts = [A.counts[k] * B.counts[k] for k in range(K + 1)]

    def pair(k, fa, fb, k2):
        a = np.repeat(np.arange(A.counts[k]), B.counts[k])
        b = np.tile(np.arange(B.counts[k]), A.counts[k])
        return fa[a] * B.counts[k2] + fb[b]

    faces = {k: [pair(k, A.faces[k][i], B.faces[k][i], k - 1) for i in range(k + 1)] for k in range(1, K + 1)}
    degs = {k: [pair(k, A.degeneracies[k][j], B.degeneracies[k][j], k + 1) for j in range(k + 1)] for k in range(K)}
    return SimplicialSet(counts, faces, degs)


def nerve_to_realization(n, S):
    """The comparison ``N(2^n) -> |rep(n)|``, ``e |-> [(n, id, e)]``."""
    X = S.presheaf
    ident = X.cat.identity_index(n)
    maps = {k: np.array([realization_class(S, k, n, ident, s) for s in range((k + 2) ** n)], dtype=np.int64) for k in range(S.K + 1)}
    return SimplicialMap(nerve_boolean(n, S.K), S, maps)


# ---------------------------------------------------------------------------
# chains and homology


@dataclass
class ChainComplex:
    """Normalized chains: ``boundaries[k]`` is the integer matrix of ``C_k -> C_{k-1}``."""

    ranks: list
    boundaries: dict

    def squares_to_zero(self):
        for k in range(2, len(self.ranks)):
            a, b = self.boundaries.get(k - 1), self.boundaries.get(k)
            if a is None or b is None or a.size == 0 or b.size == 0:
                continue
            if (a @ b).any():
                return False
        return True


def chain_complex(S):
    nd = {k: np.flatnonzero(S.nondegenerate(k)) for k in range(S.K + 1)}
    pos = {k: {int(v): i for i, v in enumerate(nd[k])} for k in nd}
    boundaries = {}
    for k in range(1, S.K + 1):
        M = np.zeros((len(nd[k - 1]), len(nd[k])), dtype=object)
        for col, s in enumerate(nd[k]):
            for i in range(k + 1):
                t = int(S.faces[k][i][s])
                if t in pos[k - 1]:
                    M[pos[k - 1][t], col] += (-1) ** i
        boundaries[k] = M
    return ChainComplex([len(nd[k]) for k in range(S.K + 1)], boundaries)


@dataclass
class SNF:
    diagonal: list
    U: list
    V: list

    def verify(self, M):
        """``U M V`` is diagonal with the invariants, ``U`` and ``V`` unimodular."""
        M = _as_lists(M)
        rows, cols = len(M), len(M[0]) if M else 0
        P = _matmul(_matmul(self.U, M), self.V) if rows and cols else []
        for i in range(rows):
            for j in range(cols):
                want = self.diagonal[i] if i == j and i < len(self.diagonal) else 0
                if P[i][j] != want:
                    return False
        if any(d <= 0 for d in self.diagonal):
            return False
        if any(b % a for a, b in zip(self.diagonal, self.diagonal[1:])):
            return False
        return abs(_det(self.U)) == 1 and abs(_det(self.V)) == 1


def _as_lists(M):
    return [[int(v) for v in row] for row in np.asarray(M, dtype=object).tolist()] if np.size(M) else [list() for _ in range(len(M))]


def _matmul(A, B):
    cols = len(B[0]) if B else 0
    return [[sum(a * B[k][j] for k, a in enumerate(row) if a) for j in range(cols)] for row in A]


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _det(A):
    """Exact determinant by fraction-free elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def smith_normal_form(M):
    """Invariant factors of an integer matrix with unimodular ``U``, ``V`` such that ``U M V`` is diagonal."""
    A = _as_lists(M)
    rows = len(A)
    cols = len(A[0]) if rows else 0
    U, V = _identity(rows), _identity(cols)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst -= q * row_src
        A[dst] = [a - q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, q):  # col_dst -= q * col_src
        for row in A:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    t = 0
    while t < min(rows, cols):
        nonzero = [(abs(A[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if A[i][j]]
        if not nonzero:
            break
        _, i, j = min(nonzero)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(t, i, q)
                    if A[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(t, j, q)
                    if A[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                # enforce divisibility of the remaining block
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % A[t][t]), None)
                if bad is None:
                    break
                add_row(bad[0], t, -1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    diagonal = [A[i][i] for i in range(min(rows, cols)) if A[i][i]]
    return SNF(diagonal, U, V)


@dataclass(frozen=True)
class HomologyGroup:
    dim: int
    betti: int
    torsion: tuple

    def to_json(self):
        return {"dim": self.dim, "betti": self.betti, "torsion": list(self.torsion)}


def homology(S, top):
    """Integral homology of the normalized chains in dimensions ``0..top``."""
    if top >= S.K:
        raise TruncationError(f"homology up to {top} needs simplices up to {top + 1}, have {S.K}")
    C = chain_complex(S)
    snf = {k: smith_normal_form(C.boundaries[k]) for k in range(1, top + 2)}
    out = []
    for k in range(top + 1):
        rank_out = len(snf[k].diagonal) if k >= 1 else 0
        rank_in = len(snf[k + 1].diagonal)
        torsion = tuple(d for d in snf[k + 1].diagonal if d > 1)
        out.append(HomologyGroup(k, C.ranks[k] - rank_out - rank_in, torsion))
    return out


def verify_topology(site, D, K=None):
    """Realization, chain and homology checks on representables and boundaries."""
    from .presheaf import boundary, representable, tensor

    from .site import get_site

    site = get_site(site)
    K = D + 1 if K is None else K
    rep = Report("topology", site.name, D)
    c_ids = rep.check("simplicial-identities")
    c_nerve = rep.check("nerve-counts")
    c_rep = rep.check("realize-representable")
    c_dd = rep.check("boundary-squared")
    c_chi = rep.check("euler-characteristic")
    c_hrep = rep.check("homology-cube")
    c_hsph = rep.check("homology-sphere")
    c_mono = rep.check("realize-mono")
    c_snf = rep.check("snf-certificate")
    c_bnd = rep.check("realize-boundary-counts")
    for n in range(D + 1):
        N = nerve_boolean(n, K)
        c_ids.record(not N.identity_failures(), [f"nerve {n}", N.identity_failures()[:1]])
        c_nerve.record(N.counts == [(k + 2) ** n for k in range(K + 1)], [n])
        X = representable(n, D, site)
        S = realize(X, K)
        c_ids.record(not S.identity_failures(), [f"rep:{n}"])
        cmp = nerve_to_realization(n, S)
        c_rep.record(cmp.is_iso() and cmp.is_simplicial(), [n])
        C = chain_complex(S)
        c_dd.record(C.squares_to_zero(), [f"rep:{n}"])
        c_chi.record(S.euler_characteristic() == 1, [n, S.euler_characteristic()])
        for k in range(1, K + 1):
            snf = smith_normal_form(C.boundaries[k])
            c_snf.record(snf.verify(C.boundaries[k]), [f"rep:{n}", k])
        H = homology(S, K - 1)
        c_hrep.record([(h.betti, h.torsion) for h in H] == [(1, ())] + [(0, ())] * (K - 1), [n, [h.to_json() for h in H]])
        if n >= 1:
            B, incl = boundary(n, D, site)
            SB = realize(B, K)
            c_ids.record(not SB.identity_failures(), [f"boundary:{n}"])
            C = chain_complex(SB)
            c_dd.record(C.squares_to_zero(), [f"boundary:{n}"])
            H = homology(SB, K - 1)
            want = [0] * K
            want[0] += 1
            if n - 1 < K:
                want[n - 1] += 1
            c_hsph.record([h.betti for h in H] == want and all(not h.torsion for h in H), [n, [h.to_json() for h in H]])
            m = realize_map(incl, SB, S)
            c_mono.record(m.is_injective() and m.is_simplicial(), [n])
            # simplices of the union of the faces of I^n: (k+2)^n - k^n
            c_bnd.record(SB.counts == [(k + 2) ** n - k**n for k in range(K + 1)], [n, SB.counts])
    if site.monoidal and D >= 2:
        c = rep.check("realize-monoidal")
        objs = {"rep:1": representable(1, D, site), "boundary:2": boundary(2, D, site)[0]}
        for a, X in objs.items():
            for b, Y in objs.items():
                T = tensor(X, Y, D)
                lhs = realize(T, min(K, 3)).counts
                rhs = product(realize(X, min(K, 3)), realize(Y, min(K, 3))).counts
                c.record(lhs == rhs, [a, b, lhs, rhs])
    return rep
