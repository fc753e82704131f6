"""Degree-truncated presheaves over the cubicalization.

A presheaf keeps a list of cell labels per degree ``n <= D`` and, for every
pair of degrees, an integer table ``act[(m, n)]`` of shape
``(|hom(m, n)|, |X(n)|)`` whose entry ``[f, x]`` is the index of ``x . f`` in
``X(m)``.  Hom-sets are indexed as in :class:`cubecat.cube.CubeCategory`.

Colimits are computed degreewise; quotients use union-find and keep the
least member of each class as its representative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._backend import kernels
from .cube import (
    CubeCategory,
    CubeMorphism,
    NormalForm,
    classify,
    codagger,
    connection,
    cube_identity,
    face,
    normal_form,
    reassemble,
)
from .errors import DegreeMismatch, FunctorialityError, SchemaError, TruncationError
from .report import Report
from .site import full, get_site, positions, restrict


def category(site):
    """The shared, lazily tabulated category of a site."""
    return _category(get_site(site))


@lru_cache(maxsize=None)
def _category(site):
    return CubeCategory(site)


def _empty_act(cat, m, n, size):
    return np.zeros((len(cat.homs(m, n)), size), dtype=np.int64)


def morphism_label(m):
    tw = f"~{m.f.twist}" if m.f.twist else ""
    fmap = "".join(map(str, m.f.map))
    return f"{m.src}>{m.dst}:{''.join(map(str, positions(m.gamma)))}:{fmap}{tw}:{''.join(map(str, positions(m.xi)))}"


class Presheaf:
    def __init__(self, site, D, cells, act, check=True):
        self.site = get_site(site)
        self.D = D
        self.cat = category(self.site)
        self.cells = {n: list(cells.get(n, [])) for n in range(D + 1)}
        self.act = {}
        for m in range(D + 1):
            for n in range(D + 1):
                table = act.get((m, n))
                if table is None:
                    table = _empty_act(self.cat, m, n, len(self.cells[n]))
                self.act[(m, n)] = np.asarray(table, dtype=np.int64).reshape(len(self.cat.homs(m, n)), len(self.cells[n]))
        if check:
            self.validate()

    # -- basic access -------------------------------------------------------

    def size(self, n):
        return len(self.cells[n]) if 0 <= n <= self.D else 0

    def sizes(self):
        return [self.size(n) for n in range(self.D + 1)]

    def index(self, n, label):
        return self.cells[n].index(label)

    def apply(self, f, x):
        """``x . f`` for a cube morphism ``f`` and a cell index ``x`` of ``X(f.dst)``."""
        self._bound(f.src, f.dst)
        return int(self.act[(f.src, f.dst)][self.cat.lookup(f), x])

    def _bound(self, *degs):
        if max(degs) > self.D:
            raise TruncationError(f"degree {max(degs)} exceeds the truncation {self.D}")

    def __eq__(self, other):
        if not isinstance(other, Presheaf):
            return NotImplemented
        return (
            self.site is other.site
            and self.D == other.D
            and self.cells == other.cells
            and all(np.array_equal(self.act[k], other.act[k]) for k in self.act)
        )

    __hash__ = None

    def __repr__(self):
        return f"Presheaf({self.site.name}, D={self.D}, sizes={self.sizes()})"

    # -- laws ---------------------------------------------------------------

    def functoriality_failure(self):
        """First witness ``(g, f, x)`` with ``x.(g o f) != (x.g).f``, or ``None``."""
        cat = self.cat
        R = range(self.D + 1)
        for n in R:
            if self.size(n) and not np.array_equal(self.act[(n, n)][cat.identity_index(n)], np.arange(self.size(n))):
                x = int(np.argmax(self.act[(n, n)][cat.identity_index(n)] != np.arange(self.size(n))))
                return ("identity", cube_identity(n, self.site), None, x)
        for a in R:
            for b in R:
                ab = self.act[(a, b)]
                for c in R:
                    if not self.size(c):
                        continue
                    t = cat.comp(a, b, c)
                    if t.size == 0:
                        continue
                    lhs = self.act[(a, c)][t]
                    rhs = ab[np.arange(t.shape[1])[None, :, None], self.act[(b, c)][:, None, :]]
                    diff = lhs != rhs
                    if diff.any():
                        g, f, x = np.argwhere(diff)[0]
                        return ("composition", cat.homs(b, c)[g], cat.homs(a, b)[f], int(x))
        return None

    def validate(self):
        for (m, n), table in self.act.items():
            if table.size and (table.min() < 0 or table.max() >= self.size(m)):
                raise SchemaError(f"action table ({m}, {n}) leaves the cells of degree {m}")
        bad = self.functoriality_failure()
        if bad is not None:
            kind, g, f, x = bad
            raise FunctorialityError(f"action is not functorial ({kind}) at {g!r}, {f!r}, cell {x}", pair=(g, f))
        return self

    # -- derived structure --------------------------------------------------

    def degenerate(self, m):
        """Mask of cells of degree ``m`` that are restrictions of cells of lower degree."""
        mask = np.zeros(self.size(m), dtype=bool)
        for k in range(min(m, self.D + 1)):
            vals = self.act[(m, k)]
            if vals.size:
                mask[np.unique(vals)] = True
        return mask

    def nondegenerate(self, m):
        return ~self.degenerate(m)

    @property
    def dim(self):
        """Largest degree of a non-degenerate cell (``-1`` when empty)."""
        for m in range(self.D, -1, -1):
            if self.nondegenerate(m).any():
                return m
        return -1

    def identity_map(self):
        return PresheafMap(self, self, {n: np.arange(self.size(n)) for n in range(self.D + 1)})

    def to_json(self):
        return dump_presheaf(self)


@dataclass
class PresheafMap:
    source: Presheaf
    target: Presheaf
    maps: dict = field(default_factory=dict)

    def __post_init__(self):
        self.maps = {n: np.asarray(self.maps.get(n, np.zeros(0)), dtype=np.int64) for n in range(self.source.D + 1)}

    def naturality_failure(self):
        s, t = self.source, self.target
        for m in range(s.D + 1):
            for n in range(s.D + 1):
                if not s.size(n):
                    continue
                lhs = t.act[(m, n)][:, self.maps[n]]
                rhs = self.maps[m][s.act[(m, n)]]
                if not np.array_equal(lhs, rhs):
                    f, x = np.argwhere(lhs != rhs)[0]
                    return (s.cat.homs(m, n)[f], int(x))
        return None

    def is_natural(self):
        return self.naturality_failure() is None

    def __call__(self, n, x):
        return int(self.maps[n][x])

    def then(self, other):
        """``other o self``."""
        return PresheafMap(self.source, other.target, {n: other.maps[n][self.maps[n]] for n in self.maps})

    def is_injective(self):
        return all(len(np.unique(v)) == len(v) for v in self.maps.values())

    def is_surjective(self):
        return all(len(np.unique(self.maps[n])) == self.target.size(n) for n in self.maps)

    def is_iso(self):
        return self.is_injective() and self.is_surjective()

    def image_mask(self, n):
        mask = np.zeros(self.target.size(n), dtype=bool)
        mask[self.maps[n]] = True
        return mask


def _same_frame(*xs):
    s = xs[0]
    for x in xs[1:]:
        if x.site is not s.site or x.D != s.D:
            raise DegreeMismatch("presheaves live over different sites or truncations")


# ---------------------------------------------------------------------------
# constructions


def representable(r, D, site=None):
    site = get_site(site or "connections")
    if not 0 <= r <= D:
        raise TruncationError(f"representable({r}) needs truncation at least {r}, got {D}")
    cat = category(site)
    cells = {n: [morphism_label(h) for h in cat.homs(n, r)] for n in range(D + 1)}
    act = {(m, n): cat.comp(m, n, r).T for m in range(D + 1) for n in range(D + 1)}
    X = Presheaf(site, D, cells, act, check=False)
    X.rep_degree = r
    return X


def empty(D, site=None):
    return Presheaf(site or "connections", D, {}, {}, check=False)


def terminal(D, site=None):
    return representable(0, D, site)


def yoneda_map(u, D, site=None):
    """The map ``rep(u.src) -> rep(u.dst)`` given by postcomposition with ``u``."""
    site = get_site(site or "connections")
    src, dst = representable(u.src, D, site), representable(u.dst, D, site)
    cat = category(site)
    i = cat.lookup(u)
    return PresheafMap(src, dst, {n: cat.comp(n, u.src, u.dst)[i] for n in range(D + 1)})


def subpresheaf(X, keep):
    """The subpresheaf on the cells selected by ``keep[n]`` (boolean masks) and its inclusion."""
    keep = {n: np.asarray(keep.get(n, np.zeros(X.size(n), dtype=bool)), dtype=bool) for n in range(X.D + 1)}
    idx = {n: np.flatnonzero(keep[n]) for n in keep}
    new = {}
    for n in keep:
        new[n] = np.full(X.size(n), -1, dtype=np.int64)
        new[n][idx[n]] = np.arange(len(idx[n]))
    act = {}
    for m in keep:
        for n in keep:
            vals = X.act[(m, n)][:, idx[n]]
            if vals.size and not keep[m][vals].all():
                raise SchemaError(f"selected cells are not closed under the action ({m}, {n})")
            act[(m, n)] = new[m][vals]
    cells = {n: [X.cells[n][i] for i in idx[n]] for n in keep}
    S = Presheaf(X.site, X.D, cells, act, check=False)
    return S, PresheafMap(S, X, idx)


def image(f):
    return subpresheaf(f.target, {n: f.image_mask(n) for n in range(f.target.D + 1)})


def coproduct(*xs):
    """Disjoint union with its coprojections."""
    _same_frame(*xs)
    X0 = xs[0]
    cells, act = {}, {}
    for n in range(X0.D + 1):
        cells[n] = [f"{k}.{c}" for k, X in enumerate(xs) for c in X.cells[n]]
    offsets = {n: np.cumsum([0] + [X.size(n) for X in xs]) for n in range(X0.D + 1)}
    for m in range(X0.D + 1):
        for n in range(X0.D + 1):
            act[(m, n)] = np.concatenate(
                [X.act[(m, n)] + offsets[m][k] for k, X in enumerate(xs)], axis=1
            ) if xs else _empty_act(X0.cat, m, n, 0)
    S = Presheaf(X0.site, X0.D, cells, act, check=False)
    maps = [
        PresheafMap(X, S, {n: np.arange(X.size(n)) + offsets[n][k] for n in range(X0.D + 1)}) for k, X in enumerate(xs)
    ]
    return S, maps


def quotient(X, pairs):
    """Identify ``a[i] ~ b[i]`` in each degree; ``pairs[n] = (a, b)``.

    The relation must be compatible with the action (it is whenever it comes
    from two natural maps).  Returns the quotient and the projection.
    """
    reps, proj = {}, {}
    for n in range(X.D + 1):
        a, b = pairs.get(n, (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)))
        lab = np.asarray(kernels.uf_labels(X.size(n), np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)))
        uniq, inverse = np.unique(lab, return_inverse=True)
        reps[n] = uniq
        proj[n] = inverse.astype(np.int64)
    act = {}
    for m in range(X.D + 1):
        for n in range(X.D + 1):
            table = X.act[(m, n)]
            full_img = proj[m][table] if table.size else table
            out = full_img[:, reps[n]]
            if table.size and not np.array_equal(out[:, proj[n]], full_img):
                raise SchemaError(f"relation is not compatible with the action ({m}, {n})")
            act[(m, n)] = out
    cells = {n: [X.cells[n][i] for i in reps[n]] for n in range(X.D + 1)}
    Q = Presheaf(X.site, X.D, cells, act, check=False)
    return Q, PresheafMap(X, Q, proj)


def coequalizer(f, g):
    if f.source is not g.source and f.source.sizes() != g.source.sizes():
        raise SchemaError("coequalizer needs parallel maps")
    return quotient(f.target, {n: (f.maps[n], g.maps[n]) for n in f.maps})


def pushout(f, g):
    """Pushout of ``X <-f- A -g-> Y``; returns ``(P, jX, jY)``."""
    S, (ix, iy) = coproduct(f.target, g.target)
    P, q = coequalizer(f.then(ix), g.then(iy))
    return P, ix.then(q), iy.then(q)


def pullback(f, g):
    """Pullback of ``X -f-> Z <-g- Y``; returns ``(P, pX, pY)``."""
    X, Y = f.source, g.source
    pairs = {}
    for n in range(X.D + 1):
        xs, ys = np.nonzero(f.maps[n][:, None] == g.maps[n][None, :])
        pairs[n] = (xs.astype(np.int64), ys.astype(np.int64))
    cells, act = {}, {}
    lookup = {}
    for n, (xs, ys) in pairs.items():
        cells[n] = [f"({X.cells[n][x]},{Y.cells[n][y]})" for x, y in zip(xs, ys)]
        lookup[n] = {(int(x), int(y)): i for i, (x, y) in enumerate(zip(xs, ys))}
    for m in range(X.D + 1):
        for n in range(X.D + 1):
            xs, ys = pairs[n]
            ax, ay = X.act[(m, n)][:, xs], Y.act[(m, n)][:, ys]
            table = np.zeros(ax.shape, dtype=np.int64)
            for idx in np.ndindex(ax.shape):
                table[idx] = lookup[m][(int(ax[idx]), int(ay[idx]))]
            act[(m, n)] = table
    P = Presheaf(X.site, X.D, cells, act, check=False)
    return P, PresheafMap(P, X, {n: pairs[n][0] for n in pairs}), PresheafMap(P, Y, {n: pairs[n][1] for n in pairs})


def descend(proj, f):
    """Factor ``f: X -> Y`` through the quotient ``proj: X -> Q``; fails if ``f`` does not respect it."""
    Q = proj.target
    maps = {}
    for n in proj.maps:
        out = np.full(Q.size(n), -1, dtype=np.int64)
        out[proj.maps[n]] = f.maps[n]
        if not np.array_equal(out[proj.maps[n]], f.maps[n]):
            raise SchemaError(f"map does not respect the quotient in degree {n}")
        maps[n] = out
    return PresheafMap(Q, f.target, maps)


def copair(maps, coprojections, target):
    """The map out of a coproduct determined by its components."""
    S = coprojections[0].target
    out = {n: np.full(S.size(n), -1, dtype=np.int64) for n in range(S.D + 1)}
    for f, i in zip(maps, coprojections):
        for n in out:
            out[n][i.maps[n]] = f.maps[n]
    return PresheafMap(S, target, out)


def inclusion_between(small, big):
    """The map between two subpresheaves of a common presheaf, given their inclusions."""
    maps = {}
    for n in small.maps:
        pos = {int(v): i for i, v in enumerate(big.maps[n])}
        try:
            maps[n] = np.array([pos[int(v)] for v in small.maps[n]], dtype=np.int64)
        except KeyError as exc:
            raise SchemaError(f"subpresheaf is not contained in degree {n}") from exc
    return PresheafMap(small.source, big.source, maps)


def skeleton(X, n):
    """``sk_n X`` with its inclusion: cells that factor through degree at most ``n``."""
    keep = {}
    for m in range(X.D + 1):
        mask = np.zeros(X.size(m), dtype=bool)
        for k in range(min(n, X.D) + 1):
            vals = X.act[(m, k)]
            if vals.size:
                mask[np.unique(vals)] = True
        keep[m] = mask
    return subpresheaf(X, keep)


def automorphisms(site, n):
    cat = category(site)
    return [i for i, h in enumerate(cat.homs(n, n)) if classify(h, site).kind == "iso"]


@dataclass(frozen=True)
class Decomposition:
    sigma: CubeMorphism
    degree: int
    core: int


def _decompositions(X, m, x):
    cat = X.cat
    for k in range(m + 1):
        nd = np.flatnonzero(X.nondegenerate(k))
        if not len(nd):
            continue
        collapses = [i for i, h in enumerate(cat.homs(m, k)) if classify(h, X.site).kind in ("collapse", "iso")]
        if not collapses:
            continue
        vals = X.act[(m, k)][np.ix_(collapses, nd)]
        hits = np.argwhere(vals == x)
        if len(hits):
            return k, [(collapses[s], int(nd[y])) for s, y in hits]
    return None, []


def nondegenerate_decompose(X, m, x):
    """``x = core . sigma`` with ``sigma`` a split epimorphism and ``core`` non-degenerate.

    The degree of the core is unique; among the decompositions (one orbit of
    the automorphism group) the least pair of indices is returned.
    """
    X._bound(m)
    k, found = _decompositions(X, m, x)
    if k is None:
        raise SchemaError(f"cell {x} of degree {m} has no non-degenerate decomposition")
    s, core = found[0]
    return Decomposition(X.cat.homs(m, k)[s], k, core)


def boundary(r, D, site=None):
    """``d rep(r)`` as the cells whose normal form has a proper face part, with its inclusion."""
    site = get_site(site or "connections")
    rep = representable(r, D, site)
    cat = category(site)
    keep = {n: np.array([normal_form(h, site).delta != full(r) for h in cat.homs(n, r)], dtype=bool) for n in range(D + 1)}
    return subpresheaf(rep, keep)


def boundary_coequalizer(r, D, site=None):
    """The boundary glued from codimension-one faces along codimension-two faces.

    Returns ``(B, comparison)`` with ``comparison: B -> rep(r)`` induced by
    ``(delta, xi, g) |-> delta^xi g``.
    """
    site = get_site(site or "connections")
    target = representable(r, D, site)
    if r == 0:
        B = empty(D, site)
        return B, PresheafMap(B, target, {})
    faces = []
    for i in range(r):
        delta = full(r) & ~(1 << i)
        for xi in (0, 1 << i):
            faces.append((delta, xi))
    reps = [representable(r - 1, D, site) for _ in faces]
    S, incl = coproduct(*reps)
    legs = [yoneda_map(face(r, d, x, site), D, site) for d, x in faces]
    comparison_s = copair(legs, incl, target)
    if r == 1:
        return S, comparison_s
    where = {fx: k for k, fx in enumerate(faces)}
    left, right = [], []
    glue = []
    for i in range(r):
        for j in range(i + 1, r):
            dp = full(r) & ~(1 << i) & ~(1 << j)
            for xi in (0, 1 << i, 1 << j, (1 << i) | (1 << j)):
                glue.append((dp, xi, i, j))
    G, gincl = coproduct(*[representable(r - 2, D, site) for _ in glue])
    for (dp, xi, i, j), gi in zip(glue, gincl):
        for which, d in ((left, full(r) & ~(1 << i)), (right, full(r) & ~(1 << j))):
            mark = xi & ~d
            k = where[(d, mark)]
            eps = face(r - 1, restrict(dp, d), restrict(xi, d), site)
            which.append(yoneda_map(eps, D, site).then(incl[k]))
    f = copair(left, gincl, S)
    g = copair(right, gincl, S)
    B, proj = coequalizer(f, g)
    return B, descend(proj, comparison_s)


# ---------------------------------------------------------------------------
# convolution tensor


class TensorProduct(Presheaf):
    """``X (x) Y`` as a coend over degrees ``p <= dim X``, ``q <= dim Y``.

    A cell of degree ``n`` is the class of a triple ``(h, x, y)`` with
    ``h: n -> p + q``; it is identified with ``((f (x) g) h, x', y')`` whenever
    ``x = x' . f`` and ``y = y' . g``.
    """

    def __init__(self, X, Y, D, site, cells, act, blocks, labels, dims):
        super().__init__(site, D, cells, act, check=False)
        self.left, self.right = X, Y
        self.blocks = blocks  # n -> list of (p, q, offset)
        self.labels = labels  # n -> class index of every triple
        self.dims = dims

    def block_offset(self, n, p, q):
        for pp, qq, off in self.blocks[n]:
            if (pp, qq) == (p, q):
                return off
        raise TruncationError(f"no block ({p}, {q}) in degree {n}")

    def triple_class(self, n, h_idx, p, x, q, y):
        off = self.block_offset(n, p, q)
        nx, ny = self.left.size(p), self.right.size(q)
        return int(self.labels[n][off + (h_idx * nx + x) * ny + y])


def _lower(X, p, x, d):
    """Write a cell of degree ``p`` as ``z . g`` with ``z`` of degree at most ``d``."""
    if p <= d:
        return p, x, None
    dec = nondegenerate_decompose(X, p, x)
    if dec.degree > d:
        raise TruncationError(f"cell of degree {p} is non-degenerate above {d}")
    return dec.degree, dec.core, dec.sigma


def tensor(X, Y, D=None):
    """Convolution product, truncated at ``D`` (default: the smaller truncation)."""
    if X.site is not Y.site:
        raise DegreeMismatch("tensor factors live over different sites")
    site = X.site
    if not site.monoidal:
        raise SchemaError(f"{site.name} carries no monoidal structure")
    D = min(X.D, Y.D) if D is None else D
    cat = X.cat
    dX, dY = X.dim, Y.dim
    P, Q = range(max(dX, -1) + 1), range(max(dY, -1) + 1)
    blocks, labels, cells, reps = {}, {}, {}, {}
    for n in range(D + 1):
        off = 0
        blocks[n] = []
        for p in P:
            for q in Q:
                blocks[n].append((p, q, off))
                off += len(cat.homs(n, p + q)) * X.size(p) * Y.size(q)
        a_all, b_all = [], []
        bo = {(p, q): o for p, q, o in blocks[n]}

        def gid(p, q, h, x, y):
            return bo[(p, q)] + (h * X.size(p) + x) * Y.size(q) + y

        for p in P:
            for q in Q:
                hn = cat.keys(n, p + q)
                if not len(hn) or not X.size(p) or not Y.size(q):
                    continue
                # (phi (x) id_q) o h  ~  x . phi   for phi: p' -> p
                for pp in P:
                    phis = cat.keys(pp, p)
                    if not len(phis) or not X.size(p):
                        continue
                    hs = cat.keys(n, pp + q)
                    if not len(hs):
                        continue
                    idq = cube_identity(q, site).key(site)
                    outer = kernels.tensor_pairs(phis, np.full(len(phis), idq, dtype=np.uint64))
                    comp = cat.lookup_keys(n, p + q, kernels.compose_all(outer, hs).ravel()).reshape(len(phis), len(hs))
                    xs = X.act[(pp, p)]  # (phi, x) -> x . phi
                    ph, hh, xx, yy = np.meshgrid(
                        np.arange(len(phis)), np.arange(len(hs)), np.arange(X.size(p)), np.arange(Y.size(q)), indexing="ij"
                    )
                    a_all.append(gid(p, q, comp[ph, hh], xx, yy).ravel())
                    b_all.append(gid(pp, q, hh, xs[ph, xx], yy).ravel())
                for qq in Q:
                    psis = cat.keys(qq, q)
                    if not len(psis) or not Y.size(q):
                        continue
                    hs = cat.keys(n, p + qq)
                    if not len(hs):
                        continue
                    idp = cube_identity(p, site).key(site)
                    outer = kernels.tensor_pairs(np.full(len(psis), idp, dtype=np.uint64), psis)
                    comp = cat.lookup_keys(n, p + q, kernels.compose_all(outer, hs).ravel()).reshape(len(psis), len(hs))
                    ys = Y.act[(qq, q)]
                    ps, hh, xx, yy = np.meshgrid(
                        np.arange(len(psis)), np.arange(len(hs)), np.arange(X.size(p)), np.arange(Y.size(q)), indexing="ij"
                    )
                    a_all.append(gid(p, q, comp[ps, hh], xx, yy).ravel())
                    b_all.append(gid(p, qq, hh, xx, ys[ps, yy]).ravel())
        a = np.concatenate(a_all) if a_all else np.zeros(0, dtype=np.int64)
        b = np.concatenate(b_all) if b_all else np.zeros(0, dtype=np.int64)
        lab = np.asarray(kernels.uf_labels(off, a, b))
        uniq, inverse = np.unique(lab, return_inverse=True)
        labels[n] = inverse.astype(np.int64)
        reps[n] = uniq
        names = []
        for g in uniq.tolist():
            for p, q, o in reversed(blocks[n]):
                if g >= o:
                    break
            rest = g - o
            y = rest % Y.size(q)
            rest //= Y.size(q)
            x = rest % X.size(p)
            h = rest // X.size(p)
            names.append((p, q, h, x, y))
        cells[n] = names
    # the action: [(h, x, y)] . f = [(h o f, x, y)]
    act = {}
    for m in range(D + 1):
        for n in range(D + 1):
            table = np.zeros((len(cat.homs(m, n)), len(cells[n])), dtype=np.int64)
            if cells[n] and len(cat.homs(m, n)):
                cols = []
                for p, q, h, x, y in cells[n]:
                    hf = cat.comp(m, n, p + q)[h]  # over f
                    bo = dict(((pp, qq), o) for pp, qq, o in blocks[m])
                    g = bo[(p, q)] + (hf * X.size(p) + x) * Y.size(q) + y
                    cols.append(labels[m][g])
                table = np.stack(cols, axis=1)
            act[(m, n)] = table
    named = {
        n: [f"{morphism_label(cat.homs(n, p + q)[h])}|{X.cells[p][x]}|{Y.cells[q][y]}" for p, q, h, x, y in cells[n]]
        for n in cells
    }
    T = TensorProduct(X, Y, D, site, named, act, blocks, labels, (dX, dY))
    T.triples = cells
    return T


def tensor_cell(T, n, h, px, x, qy, y):
    """Class in ``T = X (x) Y`` of ``(h, x, y)`` where ``h: n -> px + qy`` is a cube morphism."""
    site, cat = T.site, T.cat
    dX, dY = T.dims
    pl, xl, gx = _lower(T.left, px, x, dX)
    ql, yl, gy = _lower(T.right, qy, y, dY)
    from .cube import tensor_mor, cube_compose

    if gx is not None or gy is not None:
        gx = gx or cube_identity(px, site)
        gy = gy or cube_identity(qy, site)
        h = cube_compose(tensor_mor(gx, gy, site), h, site)
    return T.triple_class(n, cat.lookup(h), pl, xl, ql, yl)


def tensor_map(phi, psi, S, T):
    """``phi (x) psi: S -> T`` for tensor products ``S = X (x) Y`` and ``T = X' (x) Y'``."""
    maps = {}
    cat = S.cat
    for n in range(S.D + 1):
        out = np.zeros(S.size(n), dtype=np.int64)
        for c, (p, q, h, x, y) in enumerate(S.triples[n]):
            hm = cat.homs(n, p + q)[h]
            out[c] = tensor_cell(T, n, hm, p, int(phi.maps[p][x]), q, int(psi.maps[q][y]))
        maps[n] = out
    return PresheafMap(S, T, maps)


def representable_tensor_iso(T):
    """``rep(a) (x) rep(b) -> rep(a + b)``, ``[(h, x, y)] |-> (x (x) y) h``."""
    from .cube import cube_compose, tensor_mor

    X, Y = T.left, T.right
    a = _rep_degree(X)
    b = _rep_degree(Y)
    target = representable(a + b, T.D, T.site)
    cat = T.cat
    maps = {}
    for n in range(T.D + 1):
        out = np.zeros(T.size(n), dtype=np.int64)
        for c, (p, q, h, x, y) in enumerate(T.triples[n]):
            xm, ym = cat.homs(p, a)[x], cat.homs(q, b)[y]
            out[c] = cat.lookup(cube_compose(tensor_mor(xm, ym, T.site), cat.homs(n, p + q)[h], T.site))
        maps[n] = out
    return PresheafMap(T, target, maps)


def _rep_degree(X):
    r = getattr(X, "rep_degree", None)
    if r is None:
        raise SchemaError("expected a representable presheaf")
    return r


def pushout_product(m, n, D, site=None):
    """``(d rep(m) (x) rep(n)) U (rep(m) (x) d rep(n))`` and its comparison map into ``rep(m + n)``."""
    site = get_site(site or "connections")
    Rm, Rn = representable(m, D, site), representable(n, D, site)
    Bm, im = boundary(m, D, site)
    Bn, jn = boundary(n, D, site)
    full_t = tensor(Rm, Rn, D)
    corner = tensor(Bm, Bn, D)
    left = tensor(Bm, Rn, D)
    right = tensor(Rm, Bn, D)
    to_left = tensor_map(Bm.identity_map(), jn, corner, left)
    to_right = tensor_map(im, Bn.identity_map(), corner, right)
    P, jl, jr = pushout(to_left, to_right)
    iso = representable_tensor_iso(full_t)
    l_full = tensor_map(im, Rn.identity_map(), left, full_t).then(iso)
    r_full = tensor_map(Rm.identity_map(), jn, right, full_t).then(iso)
    maps = {}
    for k in range(D + 1):
        out = np.full(P.size(k), -1, dtype=np.int64)
        out[jl.maps[k]] = l_full.maps[k]
        clash = out[jr.maps[k]]
        if ((clash >= 0) & (clash != r_full.maps[k])).any():
            raise SchemaError(f"pushout-product comparison is ill-defined in degree {k}")
        out[jr.maps[k]] = r_full.maps[k]
        maps[k] = out
    return P, PresheafMap(P, iso.target, maps)


# ---------------------------------------------------------------------------
# cylinders and homotopies


@dataclass
class Cylinder:
    cyl: TensorProduct
    iota0: PresheafMap
    iota1: PresheafMap
    retraction: PresheafMap


def cylinder(X, D=None):
    """``Cyl X = X (x) rep(1)`` with its two ends and the retraction onto ``X``."""
    site = X.site
    D = X.D if D is None else D
    if D < 1:
        raise TruncationError("a cylinder needs truncation at least 1")
    interval = representable(1, X.D, site)
    C = tensor(X, interval, D)
    cat = X.cat
    vertices = [cat.index(0, 1)[face(1, 0, xi, site)] for xi in (0, 1)]
    ends = []
    for v in vertices:
        maps = {}
        for p in range(min(D, X.D) + 1):
            out = np.zeros(X.size(p), dtype=np.int64)
            h = cube_identity(p, site)
            for x in range(X.size(p)):
                out[x] = tensor_cell(C, p, h, p, x, 0, v)
            maps[p] = out
        ends.append(PresheafMap(X, C, maps))
    from .cube import cube_compose, tensor_mor

    maps = {}
    for n in range(D + 1):
        out = np.zeros(C.size(n), dtype=np.int64)
        for c, (p, q, h, x, y) in enumerate(C.triples[n]):
            proj = tensor_mor(cube_identity(p, site), cat.homs(q, 0)[0], site)
            g = cube_compose(proj, cat.homs(n, p + q)[h], site)
            out[c] = X.apply(g, x)
        maps[n] = out
    return Cylinder(C, ends[0], ends[1], PresheafMap(C, X, maps))


def is_homotopy(H, f0, f1, cyl):
    """Whether ``H: Cyl X -> Y`` restricts to ``f0`` and ``f1`` on the two ends."""
    for end, f in ((cyl.iota0, f0), (cyl.iota1, f1)):
        got = end.then(H)
        for n in got.maps:
            if not np.array_equal(got.maps[n], f.maps[n]):
                return False
    return True


def connection_homotopy(D, site="connections"):
    """On ``rep(1)``: the homotopy from the identity to the constant map at the top vertex.

    ``H[(h, x, y)] = kappa (x (x) y) h`` with ``kappa`` the max-connection.
    Returns ``(H, f0, f1, cylinder)``.
    """
    site = get_site(site)
    X = representable(1, D, site)
    cyl = cylinder(X)
    iso = representable_tensor_iso(cyl.cyl)
    H = iso.then(yoneda_map(connection(1, site), D, site))
    f0 = X.identity_map()
    const = face(1, 0, 1, site)
    from .cube import cube_compose

    end = cube_compose(const, codagger(1, 0, site), site)
    f1 = yoneda_map(end, D, site)
    return H, f0, f1, cyl


# ---------------------------------------------------------------------------
# skeleta and attachment


@dataclass
class AttachmentResult:
    degree: int
    orbits: int
    pushout: bool
    pullback: bool
    witness: object = None

    @property
    def passed(self):
        return self.pushout and self.pullback


def cell_orbits(X, n):
    """Orbit representatives of non-degenerate ``n``-cells under the automorphisms, with stabilizers."""
    auts = automorphisms(X.site, n)
    nd = np.flatnonzero(X.nondegenerate(n))
    seen = set()
    out = []
    for a in nd.tolist():
        if a in seen:
            continue
        orbit = X.act[(n, n)][auts, a]
        seen.update(orbit.tolist())
        stab = [s for s, v in zip(auts, orbit.tolist()) if v == a]
        out.append((a, stab))
    return out


def cell_model(X, n, stab):
    """``Stab \\ rep(n)`` and its boundary."""
    site, D = X.site, X.D
    rep = representable(n, D, site)
    cat = X.cat
    pairs = {}
    for m in range(D + 1):
        a, b = [], []
        for s in stab:
            a.append(np.arange(rep.size(m)))
            b.append(cat.comp(m, n, n)[s])
        pairs[m] = (np.concatenate(a) if a else np.zeros(0, np.int64), np.concatenate(b) if b else np.zeros(0, np.int64))
    A, proj = quotient(rep, pairs)
    _, bincl = boundary(n, D, site)
    keep = {m: np.zeros(A.size(m), dtype=bool) for m in range(D + 1)}
    for m in keep:
        keep[m][proj.maps[m][bincl.maps[m]]] = True
    dA, dincl = subpresheaf(A, keep)
    return rep, proj, A, dA, dincl


def attachment_square(X, n):
    """Check that attaching the non-degenerate ``n``-cells to ``sk_{n-1} X`` gives ``sk_n X``, as a pushout and a pullback."""
    D = X.D
    S0, i0 = skeleton(X, n - 1)
    S1, i1 = skeleton(X, n)
    j = inclusion_between(i0, i1)
    orbits = cell_orbits(X, n)
    if not orbits:
        ok = j.is_iso()
        return AttachmentResult(n, 0, ok, ok)
    As, dAs, cells_to_sk, bd_to_sk0, bd_to_A = [], [], [], [], []
    for a, stab in orbits:
        rep, proj, A, dA, dincl = cell_model(X, n, stab)
        # [f] |-> a . f in sk_n X
        via_x = PresheafMap(rep, X, {m: X.act[(m, n)][:, a] for m in range(D + 1)})
        to_x = descend(proj, via_x)
        pos1 = {m: {int(v): i for i, v in enumerate(i1.maps[m])} for m in range(D + 1)}
        pos0 = {m: {int(v): i for i, v in enumerate(i0.maps[m])} for m in range(D + 1)}
        to_sk = PresheafMap(A, S1, {m: np.array([pos1[m][int(v)] for v in to_x.maps[m]], dtype=np.int64) for m in to_x.maps})
        bd = dincl.then(to_x)
        try:
            to_sk0 = PresheafMap(dA, S0, {m: np.array([pos0[m][int(v)] for v in bd.maps[m]], dtype=np.int64) for m in bd.maps})
        except KeyError:
            return AttachmentResult(n, len(orbits), False, False, "boundary leaves the lower skeleton")
        As.append(A)
        dAs.append(dA)
        cells_to_sk.append(to_sk)
        bd_to_sk0.append(to_sk0)
        bd_to_A.append(dincl)
    CA, ca = coproduct(*As)
    CdA, cda = coproduct(*dAs)
    top = copair([d.then(c) for d, c in zip(bd_to_A, ca)], cda, CA)
    left = copair(bd_to_sk0, cda, S0)
    P, jA, jS = pushout(top, left)
    # comparison P -> sk_n from (CA -> sk_n, sk_{n-1} -> sk_n)
    ca_to_sk = copair(cells_to_sk, ca, S1)
    comp = {}
    for m in range(D + 1):
        out = np.full(P.size(m), -1, dtype=np.int64)
        out[jA.maps[m]] = ca_to_sk.maps[m]
        clash = out[jS.maps[m]]
        fill = j.maps[m]
        if ((clash >= 0) & (clash != fill)).any():
            return AttachmentResult(n, len(orbits), False, False, f"comparison ill-defined in degree {m}")
        out[jS.maps[m]] = fill
        comp[m] = out
    cmp = PresheafMap(P, S1, comp)
    po = cmp.is_iso() and cmp.is_natural()
    # pullback: CdA -> CA x_{sk_n} sk_{n-1}
    Pb, pA, pS = pullback(ca_to_sk, j)
    maps = {}
    ok = True
    for m in range(D + 1):
        lookup = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(pA.maps[m], pS.maps[m]))}
        out = []
        for c in range(CdA.size(m)):
            key = (int(top.maps[m][c]), int(left.maps[m][c]))
            if key not in lookup:
                ok = False
                break
            out.append(lookup[key])
        maps[m] = np.array(out, dtype=np.int64)
    pb = ok and PresheafMap(CdA, Pb, maps).is_iso()
    return AttachmentResult(n, len(orbits), po, pb)


# ---------------------------------------------------------------------------
# serialization


def _is_elementary(h):
    return abs(h.src - h.dst) <= 1


def dump_presheaf(X, elementary=True):
    """JSON document; with ``elementary`` only morphisms changing the degree by at most one are listed."""
    cat = X.cat
    action = []
    for m in range(X.D + 1):
        for n in range(X.D + 1):
            if not X.size(n):
                continue
            for i, h in enumerate(cat.homs(m, n)):
                if elementary and not _is_elementary(h):
                    continue
                mapping = {X.cells[n][x]: X.cells[m][int(v)] for x, v in enumerate(X.act[(m, n)][i])}
                action.append({"morphism": normal_form(h, X.site).to_json(), "map": mapping})
    return {
        "site": X.site.name,
        "max_degree": X.D,
        "cells": {str(n): [str(c) for c in X.cells[n]] for n in range(X.D + 1)},
        "action": action,
    }


def load_presheaf(doc, site=None):
    """Build a presheaf from its JSON document, deriving omitted composite actions."""
    if isinstance(doc, (str, Path)):
        try:
            doc = json.loads(Path(doc).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read presheaf file: {exc}") from exc
    try:
        site = get_site(site or doc["site"])
        D = int(doc["max_degree"])
        cells = {n: [str(c) for c in doc["cells"].get(str(n), [])] for n in range(D + 1)}
        entries = doc.get("action", [])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed presheaf document: {exc}") from exc
    if D < 0:
        raise SchemaError("max_degree must be non-negative")
    for n, cs in cells.items():
        if len(set(cs)) != len(cs):
            raise SchemaError(f"duplicate cell names in degree {n}")
    cat = category(site)
    index = {n: {c: i for i, c in enumerate(cs)} for n, cs in cells.items()}
    act = {(m, n): np.full((len(cat.homs(m, n)), len(cells[n])), -1, dtype=np.int64) for m in range(D + 1) for n in range(D + 1)}
    known = {k: np.zeros(len(cat.homs(*k)), dtype=bool) for k in act}
    for e in entries:
        try:
            nf = NormalForm.from_json(e["morphism"])
            h = reassemble(nf, site)
            mapping = e["map"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed action entry: {exc}") from exc
        m, n = h.src, h.dst
        if m > D or n > D:
            raise SchemaError(f"action entry {h!r} exceeds max_degree {D}")
        i = cat.lookup(h)
        row = np.full(len(cells[n]), -1, dtype=np.int64)
        for src, dst in mapping.items():
            if src not in index[n] or dst not in index[m]:
                raise SchemaError(f"action of {h!r} names unknown cells {src!r} -> {dst!r}")
            row[index[n][src]] = index[m][dst]
        if (row < 0).any():
            raise SchemaError(f"action of {h!r} is not total")
        if known[(m, n)][i] and not np.array_equal(act[(m, n)][i], row):
            raise FunctorialityError(f"conflicting actions given for {h!r}", pair=(h, None))
        act[(m, n)][i] = row
        known[(m, n)][i] = True
    for n in range(D + 1):
        i = cat.identity_index(n)
        ident = np.arange(len(cells[n]))
        if known[(n, n)][i] and not np.array_equal(act[(n, n)][i], ident):
            raise FunctorialityError(f"identity of {n} acts non-trivially", pair=(cube_identity(n, site), None))
        act[(n, n)][i] = ident
        known[(n, n)][i] = True
    _close_actions(cat, D, cells, act, known)
    for (m, n), k in known.items():
        if not k.all() and len(cells[n]):
            h = cat.homs(m, n)[int(np.flatnonzero(~k)[0])]
            raise SchemaError(f"no action given or derivable for {h!r}")
        if not len(cells[n]):
            act[(m, n)] = np.zeros((len(cat.homs(m, n)), 0), dtype=np.int64)
    return Presheaf(site, D, cells, act, check=True)


def _close_actions(cat, D, cells, act, known):
    """Derive ``x.(g o f) = (x.g).f`` until nothing new appears; conflicting derivations raise."""
    R = range(D + 1)
    changed = True
    while changed:
        changed = False
        for a in R:
            for b in R:
                for c in R:
                    if not len(cells[c]):
                        continue
                    F = np.flatnonzero(known[(a, b)])
                    G = np.flatnonzero(known[(b, c)])
                    if not len(F) or not len(G):
                        continue
                    t = cat.comp(a, b, c)[np.ix_(G, F)]
                    derived = act[(a, b)][F[None, :, None], act[(b, c)][G][:, None, :]]
                    have = known[(a, c)][t]
                    if have.any():
                        mismatch = (act[(a, c)][t] != derived).any(axis=2) & have
                        if mismatch.any():
                            gi, fi = np.argwhere(mismatch)[0]
                            g, f = cat.homs(b, c)[G[gi]], cat.homs(a, b)[F[fi]]
                            raise FunctorialityError(
                                f"action is not functorial on the composable pair {g!r} o {f!r}", pair=(g, f)
                            )
                    new = ~have
                    if new.any():
                        idx = np.argwhere(new)
                        targets = t[new]
                        _, first = np.unique(targets, return_index=True)
                        for k in first:
                            gi, fi = idx[k]
                            act[(a, c)][t[gi, fi]] = derived[gi, fi]
                            known[(a, c)][t[gi, fi]] = True
                        changed = True


# ---------------------------------------------------------------------------
# verification


def verify_presheaf_laws(site, D, objects=None):
    site = get_site(site)
    rep = Report("presheaf-laws", site.name, D)
    objs = dict(objects or {})
    for r in range(D + 1):
        objs.setdefault(f"rep:{r}", representable(r, D, site))
    for r in range(1, D + 1):
        objs.setdefault(f"boundary:{r}", boundary(r, D, site)[0])

    c = rep.check("functoriality")
    for name, X in objs.items():
        bad = X.functoriality_failure()
        c.record(bad is None, lambda: [name, repr(bad)])

    c = rep.check("skeleton-filtration")
    c_mono = rep.check("skeleton-non-degenerate-mono")
    for name, X in objs.items():
        prev = None
        for n in range(-1, D + 1):
            S, i = skeleton(X, n)
            if prev is not None:
                c.record(all((np.isin(prev.maps[m], i.maps[m])).all() for m in range(D + 1)), [name, n])
            prev = i
            # a cell of the skeleton degenerating from X stays in the skeleton
            ok = True
            for m in range(D + 1):
                for k in range(m):
                    vals = X.act[(m, k)]
                    inside = np.isin(np.arange(X.size(k)), i.maps[k])
                    hit = np.isin(np.arange(X.size(m)), i.maps[m])
                    for s, h in enumerate(X.cat.homs(m, k)):
                        if classify(h, site).kind != "collapse":
                            continue
                        ok = ok and bool((inside == hit[vals[s]]).all())
            c_mono.record(ok, [name, n])
        c.record(sum(i.target.sizes()) == sum(X.sizes()) and i.is_surjective(), [name, "top"])

    c = rep.check("attachment-square")
    for r in range(D + 1):
        X = objs[f"rep:{r}"]
        for n in range(D + 1):
            res = attachment_square(X, n)
            c.record(res.passed, [f"rep:{r}", n, res.witness])

    c = rep.check("boundary-agreement")
    for r in range(D + 1):
        B, cmp = boundary_coequalizer(r, D, site)
        _, incl = boundary(r, D, site)
        ok = cmp.is_natural() and cmp.is_injective()
        ok = ok and all(np.array_equal(np.sort(cmp.maps[m]), np.sort(incl.maps[m])) for m in range(D + 1))
        c.record(ok, [r])

    c = rep.check("nondegenerate-decomposition")
    for name, X in objs.items():
        for m in range(D + 1):
            for x in range(X.size(m)):
                k, found = _decompositions(X, m, x)
                if k is None:
                    c.record(False, [name, m, x])
                    continue
                s, core = found[0]
                ok = int(X.act[(m, k)][s, core]) == x
                auts = automorphisms(site, k)
                orbit = set(X.act[(k, k)][auts, core].tolist())
                ok = ok and all(y in orbit for _, y in found)
                c.record(ok, [name, m, x])

    if site.monoidal:
        c = rep.check("tensor-representables")
        for a in range(D + 1):
            for b in range(D + 1 - a):
                T = tensor(representable(a, D, site), representable(b, D, site), D)
                iso = representable_tensor_iso(T)
                c.record(T.functoriality_failure() is None and iso.is_natural() and iso.is_iso(), [a, b])
        c = rep.check("tensor-unit")
        for name, X in objs.items():
            T = tensor(X, terminal(D, site), D)
            c.record(T.sizes() == X.sizes() and T.functoriality_failure() is None, [name])
    return rep
