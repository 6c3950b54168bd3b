"""Command-line front end: builders, databases, solvers, comparisons.

Every output file starts with `# zetachain <command> <canonicalized-args>`
and all decimals carry 17 significant digits, so re-running a command with
identical inputs reproduces byte-identical payloads.  Each run also writes a
run_meta.json with the resolved settings and wall time.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import chains as chains_mod
from . import roots as roots_mod
from . import schemes as schemes_mod
from . import symdyn, zeta
from .errors import UsageError, ZetaChainError
from .roots import RootOptions, Window

_TOL_DEFAULTS = {
    "newton_tol": 1e-12,
    "accept_tol": 1e-10,
    "dedupe_radius": 1e-8,
    "trace_solve_tol": 1e-14,
    "boundary_clearance": chains_mod.BOUNDARY_CLEARANCE,
}


def _default_threads() -> int:
    env = os.environ.get("ZETA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _fmt(x) -> str:
    return format(float(x) + 0.0, ".17g")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_triple(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated values, got {text!r}")
    return tuple(int(p) for p in parts)


def _parse_window(text) -> Window:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError(f"window needs re_min,re_max,im_min,im_max, got {text!r}")
    return Window(*parts)


def _parse_complex(text) -> complex:
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise UsageError(f"complex values are re or re,im, got {text!r}")


def _canonical_args(ns: argparse.Namespace) -> str:
    skip = {"func", "command", "verb"}
    parts = []
    for key in sorted(vars(ns)):
        if key in skip:
            continue
        val = getattr(ns, key)
        if val is None:
            continue
        parts.append(f"{key}={val}")
    return " ".join(parts)


def _header(ns) -> str:
    return f"# zetachain {ns.command} {ns.verb} {_canonical_args(ns)}"


def _write_csv(path: Path, ns, columns, rows):
    lines = [_header(ns), ",".join(columns)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_meta(outdir: Path, ns, scheme_meta, order, tolerances, wall_ms):
    meta = {
        "command": f"{ns.command} {ns.verb}",
        "args": _canonical_args(ns),
        "scheme": scheme_meta,
        "order": order,
        "tolerances": tolerances,
        "wall_ms": wall_ms,
    }
    (outdir / "run_meta.json").write_text(
        _header(ns) + "\n" + json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )


def _outdir(ns) -> Path:
    out = Path(ns.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_scheme(ns):
    kind = getattr(ns, "kind", "flow")
    if kind == "flow":
        if ns.n is None or ns.ell is None:
            raise UsageError("flow schemes need --n and --ell")
        return schemes_mod.build_flow_adapted(_parse_triple(ns.n), ns.ell)
    if getattr(ns, "lengths", None):
        l1, l2, l3 = (float(v) for v in ns.lengths.split(","))
    elif ns.n is not None and ns.ell is not None:
        n = _parse_triple(ns.n)
        l1, l2, l3 = (v * ns.ell for v in n)
    else:
        raise UsageError("bowen schemes need --lengths or --n with --ell")
    return schemes_mod.build_bowen_series(l1, l2, l3)


def _scheme_meta(s) -> dict:
    return {
        "kind": s.kind,
        "n": list(s.n) if s.n else None,
        "ell": s.ell,
        "lengths": list(s.lengths),
    }


# -- subcommand implementations -------------------------------------------------


def _cmd_ifs_build(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    scheme = _build_scheme(ns)
    report = schemes_mod.validate_scheme(scheme)
    text = schemes_mod.scheme_to_json(scheme)
    (out / "ifs.json").write_text(_header(ns) + "\n" + text + "\n")
    _write_meta(out, ns, _scheme_meta(scheme), None, _TOL_DEFAULTS,
                1000.0 * (time.perf_counter() - t0))
    if not report.passed:
        for failure in report.failures:
            print(f"validation failure: {failure}", file=sys.stderr)
        return 3
    print(f"wrote {out / 'ifs.json'} (validated, contraction theta "
          f"{report.contraction_theta:.3g})")
    return 0


def _cmd_words_dump(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    scheme = _build_scheme(ns)
    db = symdyn.compile_database(scheme, ns.nmax)
    rows = [
        (str(n), _fmt(l), str(wt), str(cs), str(int(pr)), str(k))
        for n, l, wt, cs, pr, k in db.csv_rows()
    ]
    _write_csv(out / "orbits.csv", ns,
               ["word_length", "l_w", "weight", "class_size", "prime", "rep_index"], rows)
    _write_meta(out, ns, _scheme_meta(scheme), ns.nmax, _TOL_DEFAULTS,
                1000.0 * (time.perf_counter() - t0))
    print(f"wrote {out / 'orbits.csv'} ({len(rows)} classes)")
    return 0


def _cmd_words_census(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    scheme = _build_scheme(ns)
    census = symdyn.class_census(scheme, ns.length)
    rows = [(str(w), str(census[w])) for w in sorted(census)]
    _write_csv(out / "census.csv", ns, ["weight", "count"], rows)
    _write_meta(out, ns, _scheme_meta(scheme), None, _TOL_DEFAULTS,
                1000.0 * (time.perf_counter() - t0))
    print(f"wrote {out / 'census.csv'} ({sum(census.values())} closed words)")
    return 0


def _cmd_zeta_eval(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    scheme = _build_scheme(ns)
    db = symdyn.compile_database(scheme, ns.nmax)
    res = zeta.evaluate(db, _parse_complex(ns.s), _parse_complex(ns.z),
                        n_max=ns.order, adaptive=ns.adaptive)
    payload = {
        "s": [_fmt(_parse_complex(ns.s).real), _fmt(_parse_complex(ns.s).imag)],
        "z": [_fmt(_parse_complex(ns.z).real), _fmt(_parse_complex(ns.z).imag)],
        "value": [_fmt(res.value.real), _fmt(res.value.imag)],
        "s_derivative": [_fmt(res.s_derivative.real), _fmt(res.s_derivative.imag)],
        "last_term": _fmt(res.last_term),
        "order": res.order,
    }
    (out / "zeta.json").write_text(
        _header(ns) + "\n" + json.dumps(payload, indent=2) + "\n"
    )
    _write_meta(out, ns, _scheme_meta(scheme), res.order, _TOL_DEFAULTS,
                1000.0 * (time.perf_counter() - t0))
    print(f"zeta = {res.value!r} (order {res.order}, last term {res.last_term:.3g})")
    return 0


def _resonance_rows(rs):
    return [
        (_fmt(e.s.real), _fmt(e.s.imag), _fmt(e.residual), str(e.newton_iters),
         str(int(e.verified)))
        for e in rs.entries
    ]


def _cmd_resonances_find(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    scheme = _build_scheme(ns)
    db = symdyn.compile_database(scheme, ns.nmax)
    opts = RootOptions(order=ns.order, adaptive=ns.adaptive, grid_h=ns.grid_h,
                       verify=not ns.no_verify, threads=ns.threads)
    rs = roots_mod.find_resonances(db, _parse_window(ns.window), opts)
    _write_csv(out / "resonances.csv", ns,
               ["re", "im", "residual", "newton_iters", "verified"], _resonance_rows(rs))
    tol = dict(_TOL_DEFAULTS)
    tol["grid_h"] = rs.settings["grid_h"]
    tol["threads"] = ns.threads
    _write_meta(out, ns, _scheme_meta(scheme), rs.settings["order"], tol,
                1000.0 * (time.perf_counter() - t0))
    print(f"wrote {out / 'resonances.csv'} ({len(rs.entries)} roots, "
          f"{len(rs.seed_failures)} failed seeds)")
    return 0


def _cmd_poly_coeffs(ns) -> int:
    out = _outdir(ns)
    p = chains_mod.build_polynomial(_parse_triple(ns.n))
    rows = [(str(d), str(int(c))) for d, c in enumerate(p.coefficients)]
    _write_csv(out / "coeffs.csv", ns, ["degree", "coefficient"], rows)
    print(f"wrote {out / 'coeffs.csv'} (degree {p.degree})")
    return 0


def _cmd_poly_roots(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    p = chains_mod.build_polynomial(_parse_triple(ns.n))
    roots = chains_mod.polynomial_roots(p)
    rows = [(_fmt(r.real), _fmt(r.imag), str(m)) for r, m in roots]
    _write_csv(out / "roots.csv", ns, ["re", "im", "multiplicity"], rows)
    _write_meta(out, ns, {"n": list(p.n)}, None,
                {"cluster_radius": 1e-8, "residual_tol": 1e-10},
                1000.0 * (time.perf_counter() - t0))
    print(f"wrote {out / 'roots.csv'} ({len(roots)} distinct roots)")
    return 0


def _cmd_poly_chains(ns) -> int:
    out = _outdir(ns)
    p = chains_mod.build_polynomial(_parse_triple(ns.n))
    cs = chains_mod.chain_points(p, _parse_window(ns.window))
    rows = [
        (_fmt(pt.s.real), _fmt(pt.s.imag), str(pt.multiplicity), str(pt.k))
        for pt in cs.points
    ]
    _write_csv(out / "chains.csv", ns, ["re", "im", "multiplicity", "k"], rows)
    print(f"wrote {out / 'chains.csv'} ({len(cs.points)} lattice points)")
    return 0


def _cmd_compare_run(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    n = _parse_triple(ns.n)
    p = chains_mod.build_polynomial(n)
    rescaled_w = _parse_window(ns.window)
    w_used, adjusted = chains_mod.resolve_window(p, rescaled_w, ns.on_boundary)

    scheme = schemes_mod.build_flow_adapted(n, ns.ell)
    db = symdyn.compile_database(scheme, ns.nmax)
    opts = RootOptions(order=ns.order, adaptive=ns.adaptive,
                       verify=not ns.no_verify, threads=ns.threads)
    rs = roots_mod.find_resonances(db, w_used.scaled(1.0 / ns.ell), opts)
    report = chains_mod.compare_rescaled(rs, ns.ell, p, w_used, cutoff=ns.cutoff,
                                         boundary_policy=ns.on_boundary)

    _write_csv(out / "resonances.csv", ns,
               ["re", "im", "residual", "newton_iters", "verified"], _resonance_rows(rs))
    cs = chains_mod.chain_points(p, w_used)
    _write_csv(out / "chains.csv", ns, ["re", "im", "multiplicity", "k"],
               [(_fmt(pt.s.real), _fmt(pt.s.imag), str(pt.multiplicity), str(pt.k))
                for pt in cs.points])
    rows = []
    for s, c, d, region in report.pairs:
        rows.append((_fmt(s.real), _fmt(s.imag), _fmt(c.real), _fmt(c.imag),
                     _fmt(d), region))
    for s, region in report.unmatched_resonances:
        rows.append((_fmt(s.real), _fmt(s.imag), "", "", "", region))
    _write_csv(out / "compare.csv", ns,
               ["res_re", "res_im", "match_re", "match_im", "dist", "region"], rows)

    tol = dict(_TOL_DEFAULTS)
    tol["cutoff"] = ns.cutoff
    tol["threads"] = ns.threads
    _write_meta(out, ns, _scheme_meta(scheme), rs.settings["order"], tol,
                1000.0 * (time.perf_counter() - t0))
    print(
        f"cardinalities: {report.card_resonances} resonances vs "
        f"{report.card_chain} chain points; max main-region distance "
        f"{report.max_distance_main:.3g} (rescaled), window adjusted: {adjusted}"
    )
    return 0


def _cmd_theorem3_run(ns) -> int:
    t0 = time.perf_counter()
    out = _outdir(ns)
    n = _parse_triple(ns.n)
    p = chains_mod.build_polynomial(n)
    z_values = [float(v) for v in ns.z.split(",")]
    sgrid = _parse_window(ns.sgrid)
    rows = []
    meta_order = None
    for ell_text in ns.ells.split(","):
        ell = float(ell_text)
        scheme = schemes_mod.build_flow_adapted(n, ell)
        db = symdyn.compile_database(scheme, ns.nmax)
        for z in z_values:
            sup = chains_mod.theorem3_supnorm(db, ell, p, sgrid, [z],
                                              grid_n=ns.grid_n, order=ns.order)
            rows.append((_fmt(ell), _fmt(z), _fmt(sup)))
        meta_order = ns.order or zeta.default_order(db)
    _write_csv(out / "theorem3.csv", ns, ["ell", "z", "sup_diff"], rows)
    _write_meta(out, ns, {"n": list(n)}, meta_order, _TOL_DEFAULTS,
                1000.0 * (time.perf_counter() - t0))
    print(f"wrote {out / 'theorem3.csv'} ({len(rows)} rows)")
    return 0


# -- argument wiring ------------------------------------------------------------


def _add_scheme_args(sp, kind_choice=True):
    sp.add_argument("--n", help="winding triple, e.g. 1,1,1")
    sp.add_argument("--ell", type=float, help="length unit ell")
    if kind_choice:
        sp.add_argument("--kind", choices=("flow", "bowen"), default="flow")
        sp.add_argument("--lengths", help="explicit l1,l2,l3 (bowen only)")
    sp.add_argument("--nmax", type=int, default=16, help="database word-length cap")


def build_parser() -> _Parser:
    parser = _Parser(prog="zetachain")
    sub = parser.add_subparsers(dest="command", required=True)

    ifs = sub.add_parser("ifs").add_subparsers(dest="verb", required=True)
    b = ifs.add_parser("build")
    _add_scheme_args(b)
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=_cmd_ifs_build)

    words = sub.add_parser("words").add_subparsers(dest="verb", required=True)
    d = words.add_parser("dump")
    _add_scheme_args(d)
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(func=_cmd_words_dump)
    c = words.add_parser("census")
    _add_scheme_args(c)
    c.add_argument("--length", type=int, required=True)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=_cmd_words_census)

    zt = sub.add_parser("zeta").add_subparsers(dest="verb", required=True)
    e = zt.add_parser("eval")
    _add_scheme_args(e)
    e.add_argument("--s", required=True, help="complex s as re,im")
    e.add_argument("--z", default="1,0", help="complex z as re,im")
    e.add_argument("--order", type=int)
    e.add_argument("--adaptive", action="store_true")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=_cmd_zeta_eval)

    rs = sub.add_parser("resonances").add_subparsers(dest="verb", required=True)
    f = rs.add_parser("find")
    _add_scheme_args(f)
    f.add_argument("--window", required=True, help="re_min,re_max,im_min,im_max")
    f.add_argument("--order", type=int)
    f.add_argument("--adaptive", action="store_true", default=True)
    f.add_argument("--grid-h", dest="grid_h", type=float)
    f.add_argument("--no-verify", dest="no_verify", action="store_true")
    f.add_argument("--threads", type=int, default=_default_threads())
    f.add_argument("-o", "--output", required=True)
    f.set_defaults(func=_cmd_resonances_find)

    poly = sub.add_parser("poly").add_subparsers(dest="verb", required=True)
    pc = poly.add_parser("coeffs")
    pc.add_argument("--n", required=True)
    pc.add_argument("-o", "--output", required=True)
    pc.set_defaults(func=_cmd_poly_coeffs)
    pr = poly.add_parser("roots")
    pr.add_argument("--n", required=True)
    pr.add_argument("-o", "--output", required=True)
    pr.set_defaults(func=_cmd_poly_roots)
    pch = poly.add_parser("chains")
    pch.add_argument("--n", required=True)
    pch.add_argument("--window", required=True)
    pch.add_argument("-o", "--output", required=True)
    pch.set_defaults(func=_cmd_poly_chains)

    cmp_ = sub.add_parser("compare").add_subparsers(dest="verb", required=True)
    cr = cmp_.add_parser("run")
    cr.add_argument("--n", required=True)
    cr.add_argument("--ell", type=float, required=True)
    cr.add_argument("--window", required=True, help="rescaled window re0,re1,im0,im1")
    cr.add_argument("--cutoff", type=float, default=0.1)
    cr.add_argument("--on-boundary", dest="on_boundary", choices=("error", "expand"),
                    default="expand")
    cr.add_argument("--order", type=int)
    cr.add_argument("--adaptive", action="store_true", default=True)
    cr.add_argument("--no-verify", dest="no_verify", action="store_true")
    cr.add_argument("--threads", type=int, default=_default_threads())
    cr.add_argument("--nmax", type=int, default=16)
    cr.add_argument("-o", "--output", required=True)
    cr.set_defaults(func=_cmd_compare_run)

    th = sub.add_parser("theorem3").add_subparsers(dest="verb", required=True)
    tr = th.add_parser("run")
    tr.add_argument("--n", required=True)
    tr.add_argument("--ells", required=True, help="comma-separated ell values")
    tr.add_argument("--sgrid", required=True, help="re0,re1,im0,im1")
    tr.add_argument("--z", default="1")
    tr.add_argument("--grid-n", dest="grid_n", type=int, default=41)
    tr.add_argument("--order", type=int)
    tr.add_argument("--nmax", type=int, default=14)
    tr.set_defaults(func=_cmd_theorem3_run)
    tr.add_argument("-o", "--output", required=True)

    return parser


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        return ns.func(ns)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except ZetaChainError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return err.exit_code
    except ValueError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
