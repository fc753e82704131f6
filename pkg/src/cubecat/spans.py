"""Relative spans ``f . gamma^dagger`` over a base site.

A span ``r' -> r`` is a distinguished injection ``gamma: s -> r'`` read
backwards followed by a base morphism ``f: s -> r``.  Composition pulls the
outer dagger leg back along the inner forward leg; the relabelling of
subobjects is the order-preserving one fixed in :mod:`cubecat.site`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DegreeMismatch, InvalidMorphism, NotComposable, SchemaError
from .report import Report
from .site import (
    BaseMorphism,
    Subset,
    embed,
    full,
    get_site,
    popcount,
    positions,
    restrict,
)


@dataclass(frozen=True)
class Span:
    src: int
    dst: int
    gamma: int
    f: BaseMorphism

    def __post_init__(self):
        if self.gamma >> self.src:
            raise InvalidMorphism(f"gamma {self.gamma:#b} is not a subset of {self.src}")
        if popcount(self.gamma) != self.f.src or self.f.dst != self.dst:
            raise InvalidMorphism(f"forward leg {self.f} does not fit gamma {positions(self.gamma)} -> {self.dst}")

    @property
    def gamma_subset(self):
        return Subset(self.src, self.gamma)

    def to_json(self):
        return {
            "gamma": positions(self.gamma),
            "f": {"map": list(self.f.map), "twist": self.f.twist},
            "src": self.src,
            "dst": self.dst,
        }

    @classmethod
    def from_json(cls, doc):
        try:
            gamma = 0
            for p in doc["gamma"]:
                gamma |= 1 << int(p)
            fmap = tuple(int(v) for v in doc["f"]["map"])
            f = BaseMorphism(len(fmap), int(doc["dst"]), fmap, int(doc["f"].get("twist", 0)))
            return cls(int(doc["src"]), int(doc["dst"]), gamma, f)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed span: {exc}") from exc

    def __repr__(self):
        return f"Span({self.src}->{self.dst}, gamma={positions(self.gamma)}, f={self.f!r})"


def _site(site):
    from .site import CONNECTIONS

    return CONNECTIONS if site is None else get_site(site)


def span_identity(n, site=None):
    return Span(n, n, full(n), _site(site).identity(n))


def inject(f):
    """A base morphism viewed as a span with full dagger leg."""
    return Span(f.src, f.dst, full(f.src), f)


def dagger(gamma, site=None):
    """``gamma^dagger``: the span ``n -> |gamma|`` with identity forward leg."""
    return Span(gamma.degree, gamma.size, gamma.mask, _site(site).identity(gamma.size))


def lam(xi, n, site=None):
    """``Lambda(xi) = xi . xi^dagger``, the idempotent restricting to ``xi``."""
    return Span(n, n, xi, _site(site).inclusion(n, xi))


def span_compose(outer, inner, site=None):
    if inner.dst != outer.src:
        raise NotComposable(f"cannot compose {outer} after {inner}")
    s = _site(site)
    pre, restricted = s.pull(inner.f, outer.gamma)
    return Span(inner.src, outer.dst, embed(pre, inner.gamma), s.compose(outer.f, restricted))


def span_push(s, mask, site=None):
    """``f_* gamma^*`` on bitmasks."""
    return _site(site).push(s.f, restrict(mask, s.gamma))


def span_pushforward(s, eta, site=None):
    if eta.degree != s.src:
        raise DegreeMismatch(f"subset of {eta.degree} cannot be pushed along a span from {s.src}")
    return Subset(s.dst, span_push(s, eta.mask, site))


def span_homs(site, m, n):
    site = get_site(site)
    out = []
    for gamma in range(1 << m):
        for f in site.homs(popcount(gamma), n):
            out.append(Span(m, n, gamma, f))
    return out


def is_monic_by_criterion(s):
    """Monomorphisms are exactly the spans with full dagger leg and injective forward leg."""
    return s.gamma == full(s.src) and s.f.injective


# ---------------------------------------------------------------------------
# verification


def verify_span_identities(site, D):
    site = get_site(site)
    rep = Report("span-identities", site.name, D)
    R = range(D + 1)
    homs = {(m, n): span_homs(site, m, n) for m in R for n in R}

    def comp(a, b):
        return span_compose(a, b, site)

    index = {key: {h: i for i, h in enumerate(hs)} for key, hs in homs.items()}
    table = {}

    def tab(a, b, cdeg):
        """``tab(a, b, c)[g, f]`` indexes ``g . f`` in ``homs[(a, c)]``."""
        if (a, b, cdeg) not in table:
            idx = index[(a, cdeg)]
            table[(a, b, cdeg)] = np.array(
                [[idx[comp(g, f)] for f in homs[(a, b)]] for g in homs[(b, cdeg)]], dtype=np.int64
            ).reshape(len(homs[(b, cdeg)]), len(homs[(a, b)]))
        return table[(a, b, cdeg)]

    c = rep.check("unit-laws")
    for (m, n), hs in homs.items():
        for h in hs:
            c.record(comp(span_identity(n, site), h) == h and comp(h, span_identity(m, site)) == h, repr(h))

    c = rep.check("associativity")
    for a in R:
        for b in R:
            for cdeg in R:
                for d in R:
                    bad, total, wit = kernels.assoc_failures(tab(a, b, cdeg), tab(b, cdeg, d), tab(a, cdeg, d), tab(a, b, d))
                    c.bulk(total, bad, lambda: [repr(homs[(cdeg, d)][wit[0]]), repr(homs[(b, cdeg)][wit[1]]), repr(homs[(a, b)][wit[2]])])

    c = rep.check("dagger-split")
    for n in R:
        for gamma in range(1 << n):
            g = Subset(n, gamma)
            c.record(comp(dagger(g, site), inject(site.inclusion(n, gamma))) == span_identity(g.size, site), [n, positions(gamma)])

    c = rep.check("pushforward-functor")
    for a in R:
        for b in R:
            for cdeg in R:
                t = tab(a, b, cdeg)
                for fi, f in enumerate(homs[(a, b)]):
                    for gi, g in enumerate(homs[(b, cdeg)]):
                        gf = homs[(a, cdeg)][t[gi, fi]]
                        for eta in range(1 << a):
                            c.record(span_push(gf, eta, site) == span_push(g, span_push(f, eta, site), site), [repr(g), repr(f), eta])

    c = rep.check("dagger-pushforward")
    for n in R:
        for gamma in range(1 << n):
            d = dagger(Subset(n, gamma), site)
            for eta in range(1 << n):
                c.record(span_push(d, eta, site) == restrict(eta, gamma), [n, gamma, eta])

    c_int = rep.check("interchange")
    c_po = rep.check("pullback-pushout-universal")
    for r in R:
        for d1 in range(1 << r):
            for d2 in range(1 << r):
                meet = d1 & d2
                e1 = restrict(meet, d1)  # eta_1 : meet -> d1
                e2 = restrict(meet, d2)
                inc = lambda n, m: inject(site.inclusion(n, m))  # noqa: E731
                dg = lambda n, m: dagger(Subset(n, m), site)  # noqa: E731
                s1, s2 = popcount(d1), popcount(d2)
                lhs1 = comp(dg(r, d1), inc(r, d2))
                rhs1 = comp(inc(s1, e1), dg(s2, e2))
                lhs2 = comp(dg(r, d2), inc(r, d1))
                rhs2 = comp(inc(s2, e2), dg(s1, e1))
                c_int.record(lhs1 == rhs1 and lhs2 == rhs2, [r, positions(d1), positions(d2)])
                if r <= min(D, 2):
                    _pushout_universal(c_po, homs, comp, R, dg(r, d1), dg(r, d2), dg(s1, e1), dg(s2, e2), [r, d1, d2])

    c = rep.check("posplitdagger")
    c_pou = rep.check("posplitdagger-universal")
    for r0 in R:
        for gamma in range(1 << r0):
            for r2 in R:
                for sigma in site.homs(r0, r2):
                    if not site.is_surjective(sigma):
                        continue
                    g0 = site.max_sat(sigma, gamma)
                    eps0 = restrict(g0, gamma)
                    sg0 = site.compose(sigma, site.inclusion(r0, g0))
                    sig_p, gp = site.factor(sg0)
                    ok = g0 & ~gamma == 0 and site.pull(sigma, gp)[0] == g0
                    left = comp(comp(inject(sig_p), dagger(Subset(popcount(gamma), eps0), site)), dagger(Subset(r0, gamma), site))
                    right = comp(dagger(Subset(r2, gp), site), inject(sigma))
                    c.record(ok and left == right, [repr(sigma), positions(gamma)])
                    if r0 <= min(D, 2):
                        top = dagger(Subset(r0, gamma), site)
                        side = inject(sigma)
                        right_leg = comp(inject(sig_p), dagger(Subset(popcount(gamma), eps0), site))
                        bottom = dagger(Subset(r2, gp), site)
                        _pushout_universal(c_pou, homs, comp, R, top, side, right_leg, bottom, [repr(sigma), gamma])

    c = rep.check("monocrit")
    for (m, n), hs in homs.items():
        for h in hs:
            monic = True
            witness = None
            hi = index[(m, n)][h]
            for t in R:
                row = tab(t, m, n)[hi]
                if len(np.unique(row)) != len(row):
                    monic = False
                    _, first = np.unique(row, return_index=True)
                    dup = sorted(set(range(len(row))) - set(first.tolist()))[0]
                    twin = int(np.flatnonzero(row == row[dup])[0])
                    witness = [repr(homs[(t, m)][twin]), repr(homs[(t, m)][dup])]
                    break
            c.record(monic == is_monic_by_criterion(h), [repr(h), witness])
    return rep


def _pushout_universal(check, homs, comp, R, top, side, right, bottom, label):
    """Check the square ``right.top = bottom.side`` has the pushout property against all test objects."""
    # top: a0 -> a1, side: a0 -> a2, right: a1 -> c, bottom: a2 -> c
    ok = comp(right, top) == comp(bottom, side)
    a1, a2, cobj = top.dst, side.dst, right.dst
    for t in R:
        for x1 in homs[(a1, t)]:
            x1top = comp(x1, top)
            for x2 in homs[(a2, t)]:
                if x1top != comp(x2, side):
                    continue
                fills = [f for f in homs[(cobj, t)] if comp(f, right) == x1 and comp(f, bottom) == x2]
                if len(fills) != 1:
                    ok = False
    check.record(ok, label)
