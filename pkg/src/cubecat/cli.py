"""Command-line front end (``cubecat``).

Exit status: 0 on success, 1 when a verification finds a failure, 2 on
usage, parse or bound errors.  JSON output uses sorted keys so repeated
invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cube import (
    CubeMorphism,
    NormalForm,
    classify,
    cube_compose,
    cube_homs,
    hom_count_formula,
    normal_form,
    reassemble,
)
from .errors import CubecatError, FunctorialityError, SchemaError
from .presheaf import (
    boundary,
    boundary_coequalizer,
    cylinder,
    dump_presheaf,
    load_presheaf,
    representable,
    tensor,
)
from .report import Report
from .site import get_site, mask_of
from .spans import Span

SUITES = ("site-axioms", "span-identities", "cube-axioms", "presheaf-laws", "topology")


class UsageError(CubecatError):
    pass


# ---------------------------------------------------------------------------
# objects


def parse_object(text, D, site):
    """``rep:N | boundary:N | tensor:A:B | cylinder:A | file:PATH``; a bare integer means ``rep``."""
    tokens = text.split(":")
    X, rest = _parse_tokens(tokens, D, site)
    if rest:
        raise UsageError(f"trailing tokens in object {text!r}: {':'.join(rest)}")
    return X


def _int(tok, what):
    try:
        n = int(tok)
    except ValueError:
        raise UsageError(f"{what} needs an integer, got {tok!r}") from None
    if n < 0:
        raise UsageError(f"{what} must be non-negative")
    return n


def _parse_tokens(tokens, D, site):
    if not tokens or tokens[0] == "":
        raise UsageError("empty object description")
    head, rest = tokens[0], tokens[1:]
    if head.lstrip("-").isdigit():
        return representable(_int(head, "rep"), D, site), rest
    if head in ("rep", "boundary"):
        if not rest:
            raise UsageError(f"{head} needs a degree")
        n = _int(rest[0], head)
        if head == "rep":
            return representable(n, D, site), rest[1:]
        if n == 0:
            raise UsageError("boundary needs a positive degree")
        return boundary(n, D, site)[0], rest[1:]
    if head == "tensor":
        X, rest = _parse_tokens(rest, D, site)
        Y, rest = _parse_tokens(rest, D, site)
        return tensor(X, Y, D), rest
    if head == "cylinder":
        X, rest = _parse_tokens(rest, D, site)
        return cylinder(X, D).cyl, rest
    if head == "file":
        return load_presheaf(":".join(rest), site), []
    raise UsageError(f"unknown object kind {head!r}")


def _morphism_doc(text):
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"morphism is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return repr(obj)


def emit_report(result, fmt="json"):
    if fmt == "json":
        doc = result.to_json() if hasattr(result, "to_json") else result
        return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable)
    if isinstance(result, Report):
        return result.to_text()
    if isinstance(result, dict) and "text" in result:
        return result["text"]
    return json.dumps(result, sort_keys=True)


def _homology_text(groups):
    lines = []
    for g in groups:
        tors = "".join(f" + Z/{t}" for t in g["torsion"])
        lines.append(f"H{g['dim']} = Z^{g['betti']}{tors}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def cmd_hom_count(args, site, D):
    count = len(cube_homs(site, args.src, args.dst))
    out = {"site": site.name, "src": args.src, "dst": args.dst, "count": count, "formula": hom_count_formula(site, args.src, args.dst)}
    out["text"] = str(count)
    return out, 0


def _nf_out(m, site):
    nf = normal_form(m, site)
    cls = classify(m, site)
    doc = {"normal_form": nf.to_json(), "kind": cls.kind}
    doc["text"] = f"{cls.kind} {json.dumps(nf.to_json(), sort_keys=True)}"
    return doc


def cmd_compose(args, site, D):
    outer = reassemble(NormalForm.from_json(_morphism_doc(args.outer)), site)
    inner = reassemble(NormalForm.from_json(_morphism_doc(args.inner)), site)
    return _nf_out(cube_compose(outer, inner, site), site), 0


def cmd_normalize(args, site, D):
    doc = _morphism_doc(args.morphism)
    if "sigma" in doc:
        m = reassemble(NormalForm.from_json(doc), site)
    else:
        try:
            xi = mask_of(int(p) for p in doc.get("xi", []))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"malformed marker: {exc}") from exc
        m = CubeMorphism(Span.from_json(doc), xi)
    return _nf_out(m, site), 0


def cmd_verify(args, site, D):
    from .cube import verify_cube_axioms
    from .presheaf import verify_presheaf_laws
    from .site import verify_site_axioms
    from .spans import verify_span_identities
    from .topology import verify_topology

    runners = {
        "site-axioms": verify_site_axioms,
        "span-identities": verify_span_identities,
        "cube-axioms": verify_cube_axioms,
        "presheaf-laws": verify_presheaf_laws,
        "topology": verify_topology,
    }
    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = [_run_suite(runners[s], s, site, D) for s in suites]
    if len(reports) == 1:
        rep = reports[0]
    else:
        rep = Report("all", site.name, D)
        for r in reports:
            for c in r.results:
                c.name = f"{r.suite}/{c.name}"
            rep.results.extend(r.results)
    return rep, 0 if rep.passed else 1


def _run_suite(runner, name, site, D):
    try:
        return runner(site, D)
    except (CubecatError, KeyError, IndexError) as exc:
        # a malformed site can break the structure maps themselves
        rep = Report(name, site.name, D)
        rep.check("evaluation").record(False, f"{type(exc).__name__}: {exc}")
        return rep


def cmd_boundary(args, site, D):
    B, incl = boundary(args.degree, D, site)
    doc = {"sizes": B.sizes(), "dim": B.dim, "presheaf": dump_presheaf(B)}
    code = 0
    if args.compare:
        C, comparison = boundary_coequalizer(args.degree, D, site)
        ok = comparison.is_injective() and all(
            sorted(comparison.maps[m].tolist()) == sorted(incl.maps[m].tolist()) for m in range(D + 1)
        )
        doc["agrees_with_coequalizer"] = ok
        code = 0 if ok else 1
    doc["text"] = f"boundary:{args.degree} sizes {B.sizes()} dim {B.dim}"
    return doc, code


def cmd_tensor(args, site, D):
    X = parse_object(args.left, D, site)
    Y = parse_object(args.right, D, site)
    T = tensor(X, Y, D)
    doc = {"sizes": T.sizes(), "dim": T.dim, "presheaf": dump_presheaf(T)}
    doc["text"] = f"{args.left} (x) {args.right}: sizes {T.sizes()} dim {T.dim}"
    return doc, 0


def cmd_realize(args, site, D):
    from .topology import realize

    X = parse_object(args.object, D, site)
    S = realize(X, args.top_dim)
    doc = S.to_json()
    doc["nondegenerate"] = S.nondegenerate_counts()
    doc["text"] = f"simplices {S.counts}\nnondegenerate {doc['nondegenerate']}"
    return doc, 0


def cmd_homology(args, site, D):
    from .topology import homology, realize

    X = parse_object(args.object, D, site)
    groups = [g.to_json() for g in homology(realize(X, args.top_dim + 1), args.top_dim)]
    return {"homology": groups, "text": _homology_text(groups)}, 0


def cmd_presheaf_check(args, site, D):
    try:
        X = load_presheaf(args.path, site if args.site_given else None)
    except FunctorialityError as exc:
        psite = site if args.site_given else get_site(json.loads(Path(args.path).read_text())["site"])
        pair = [None if m is None else normal_form(m, psite).to_json() for m in exc.pair or ()]
        doc = {"valid": False, "error": str(exc), "pair": pair}
        doc["text"] = f"not functorial: {exc}"
        return doc, 1
    doc = {
        "valid": True,
        "site": X.site.name,
        "max_degree": X.D,
        "sizes": X.sizes(),
        "dim": X.dim,
        "nondegenerate": [int(X.nondegenerate(n).sum()) for n in range(X.D + 1)],
    }
    doc["text"] = f"ok: sizes {X.sizes()} dim {X.dim}"
    return doc, 0


# ---------------------------------------------------------------------------
# driver


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--site", default=None, help="plain, connections, symmetric or crossed:<table.json>")
    common.add_argument("--crossed-table", default=None, metavar="PATH", help="crossed-group table; overrides --site")
    common.add_argument("--max-degree", type=int, default=None, metavar="D")
    common.add_argument("--format", choices=("json", "text"), default="json")

    p = argparse.ArgumentParser(prog="cubecat", description="Cubical sites, presheaves and their realizations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hom-count", parents=[common], help="count morphisms src -> dst")
    s.add_argument("--src", type=int, required=True)
    s.add_argument("--dst", type=int, required=True)
    s.set_defaults(func=cmd_hom_count)

    s = sub.add_parser("compose", parents=[common], help="compose two normal forms (JSON or @file)")
    s.add_argument("outer")
    s.add_argument("inner")
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("normalize", parents=[common], help="normal form of a span-with-marker (JSON or @file)")
    s.add_argument("morphism")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("--suite", choices=SUITES + ("all",), default="all")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("boundary", parents=[common], help="the boundary of a representable")
    s.add_argument("degree", type=int)
    s.add_argument("--compare", action="store_true", help="also compare with the coequalizer construction")
    s.set_defaults(func=cmd_boundary)

    s = sub.add_parser("tensor", parents=[common], help="tensor product of two objects")
    s.add_argument("left")
    s.add_argument("right")
    s.set_defaults(func=cmd_tensor)

    s = sub.add_parser("realize", parents=[common], help="simplicial realization of an object")
    s.add_argument("--object", required=True)
    s.add_argument("--top-dim", type=int, default=3)
    s.set_defaults(func=cmd_realize)

    s = sub.add_parser("homology", parents=[common], help="integral homology of the realization")
    s.add_argument("--object", required=True)
    s.add_argument("--top-dim", type=int, default=2)
    s.set_defaults(func=cmd_homology)

    s = sub.add_parser("presheaf-check", parents=[common], help="load and validate a presheaf file")
    s.add_argument("path")
    s.set_defaults(func=cmd_presheaf_check)
    return p


def run(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.site_given = args.site is not None or args.crossed_table is not None
        if args.crossed_table:
            site = get_site(f"crossed:{args.crossed_table}")
        else:
            site = get_site(args.site or "connections")
        D = args.max_degree
        if D is None:
            D = 2 if site.twisted else 3
        for name in ("max_degree", "src", "dst", "top_dim", "degree"):
            v = getattr(args, name, None)
            if v is not None and v < 0:
                raise UsageError(f"--{name.replace('_', '-')} must be non-negative")
        result, code = args.func(args, site, D)
    except CubecatError as exc:
        print(f"cubecat: error: {exc}", file=err)
        return 2
    if isinstance(result, dict) and args.format == "json":
        result = {k: v for k, v in result.items() if k != "text"}
    print(emit_report(result, args.format), file=out)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
