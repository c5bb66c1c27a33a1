"""Command-line front end.

Subcommands: gen, classes, blocks, density, boost, tile, verify, loe,
plot.  Artifacts are JSON with every number in the canonical exact text
form; decimal approximations are printed with a leading "~" and never
read back.  Exit status: 0 success, 1 verification failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .generators import GeneratorSpec, generate
from .loe import build_loe, verify_loe
from .pipeline import (Schedule, TiledSection, build_schedule,
                       full_pipeline, sparse_tile,
                       verify_uniform_frequency)
from .quadratic import QuadReal, parse_quadreal, quad
from .reachable import ShiftProblem, frequency_boost
from .render import section_svg
from .tiles import (FreqBand, Params, TileVector, alpha_frequency,
                    default_params, density_witness, enumerate_tileable,
                    eps_dense)
from .windows import OrbitWindow, chain_classes, two_class_block


class UsageError(ValueError):
    pass


def _params(args) -> Params:
    alpha = parse_quadreal(args.alpha) if args.alpha else quad(1)
    beta = parse_quadreal(args.beta) if args.beta else quad(0, 1)
    return Params(alpha, beta, Fraction(args.rho))


def _seed(args) -> int:
    env = os.environ.get("FLOWTILE_SEED")
    return int(env) if env is not None else args.seed


def _write_json(path: str, data: dict):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)


def _load_schedule(args, params: Params) -> Schedule:
    if getattr(args, "schedule", None):
        with open(args.schedule) as fh:
            data = json.load(fh)
        params = Params(parse_quadreal(data["alpha"]), parse_quadreal(data["beta"]),
                        Fraction(data["rho"]))
        return build_schedule(params, depth=data["depth"],
                              k_seq=[parse_quadreal(k) for k in data["K"]])
    return build_schedule(params, depth=args.depth)


def _approx(x: QuadReal) -> str:
    return f"{x} ({x.approx()})"


def cmd_gen(args) -> int:
    spec = GeneratorSpec(kind=args.kind, count=args.n, seed=_seed(args),
                         k0=parse_quadreal(args.k0) if args.k0 else None,
                         ratio=args.ratio,
                         angle=parse_quadreal(args.angle) if args.angle else None,
                         path=args.infile)
    w = generate(spec)
    _write_json(args.out, w.to_json())
    print(f"wrote {len(w)} points to {args.out}; span {_approx(w.span())}")
    return 0


def cmd_classes(args) -> int:
    with open(args.infile) as fh:
        w = OrbitWindow.from_json(json.load(fh))
    k = parse_quadreal(args.k)
    cc = chain_classes(w, k)
    print(f"threshold {k}: {len(cc.classes)} classes, sizes "
          f"{[len(c) for c in cc.classes]}")
    if args.out:
        _write_json(args.out, {"threshold": str(k),
                               "classes": [list(c) for c in cc.classes]})
    return 0


def cmd_blocks(args) -> int:
    ks = [parse_quadreal(tok) for tok in args.k_list.split(",")]
    pts, length = two_class_block(ks)
    print(f"block of {len(pts)} points, length {_approx(length)}")
    for p in pts:
        print(" ", p)
    if args.out:
        _write_json(args.out, {"positions": [str(p) for p in pts],
                               "length": str(length)})
    return 0


def cmd_density(args) -> int:
    params = _params(args)
    lo, hi = (Fraction(tok) for tok in args.band.split(","))
    wit = density_witness(params, parse_quadreal(args.eps), FreqBand(lo, hi))
    print(f"threshold {_approx(wit.threshold)}")
    print(f"family: {wit.describe()}")
    ok = True
    width = params.beta * 20
    for i in range(args.windows):
        wlo = wit.threshold + width * (2 * i)
        whi = wlo + width
        vals = [v for v, _ in wit.values_in(wlo, whi)]
        rep = eps_dense(vals, wlo, whi, wit.eps)
        print(f"window {i}: [{wlo}, {whi}] "
              f"{'dense' if rep.ok else f'MISS at {rep.witness}'}")
        ok = ok and rep.ok
    return 0 if ok else 1


def cmd_boost(args) -> int:
    with open(args.infile) as fh:
        data = json.load(fh)
    params = Params(parse_quadreal(data["alpha"]), parse_quadreal(data["beta"]),
                    Fraction(data["rho"]))
    prob = ShiftProblem(
        params, parse_quadreal(data["eps"]),
        [parse_quadreal(d) for d in data["gaps"]],
        [[TileVector(p, q) for p, q in rk] for rk in data["choices"]])
    el = frequency_boost(prob, Fraction(args.gamma), Fraction(args.zeta),
                         Fraction(args.eta), enforce_bound=not args.test_mode)
    print(f"value {_approx(el.value)} frequency {alpha_frequency(el.counts)}")
    if args.out:
        _write_json(args.out, {"value": str(el.value),
                               "counts": list(el.counts),
                               "witness": [list(y) for y in el.witness]})
    return 0


def cmd_tile(args) -> int:
    params = _params(args)
    sched = _load_schedule(args, params)
    seed = _seed(args)

    def tile_one(w: OrbitWindow) -> TiledSection:
        if args.mode == "full":
            return full_pipeline(w, sched, seed=seed)
        t = sparse_tile(w, sched)
        from .pipeline import attach_witnesses
        attach_witnesses(t)
        return t

    if args.batch:
        # JSON-lines in, JSON-lines out: one window / section per line
        count = 0
        with open(args.infile) as src, open(args.out, "w") as dst:
            for line in src:
                line = line.strip()
                if not line:
                    continue
                t = tile_one(OrbitWindow.from_json(json.loads(line)))
                dst.write(json.dumps(t.to_json()) + "\n")
                count += 1
        print(f"tiled {count} windows into {args.out}")
        return 0
    with open(args.infile) as fh:
        w = OrbitWindow.from_json(json.load(fh))
    t = tile_one(w)
    _write_json(args.out, t.to_json())
    cnt = t.counts()
    print(f"tiled {len(t.positions)} points; counts {cnt.p} alpha / {cnt.q} "
          f"beta; frequency {alpha_frequency(cnt)}")
    return 0


def cmd_verify(args) -> int:
    with open(args.infile) as fh:
        t = TiledSection.from_json(json.load(fh))
    params = t.params
    bad = [i for i, ch in enumerate(t.letters) if ch is None]
    gaps = t.gap_values()
    for i, (g, ch) in enumerate(zip(gaps, t.letters)):
        want = params.alpha if ch == "a" else params.beta if ch == "b" else None
        if want is not None and g != want:
            print(f"FAIL gap {i}: letter {ch} but size {g}")
            return 1
    if bad:
        print(f"FAIL: {len(bad)} untiled gaps")
        return 1
    rep = verify_uniform_frequency(t, Fraction(args.eta))
    if rep.n_eta is None:
        print(f"FAIL: no uniform run length for eta={args.eta}; "
              f"counterexample window {rep.counterexample}")
        return 1
    if rep.witnesses_ok is False:
        print("FAIL: stored partition witnesses do not replay")
        return 1
    print(f"OK: N({args.eta}) = {rep.n_eta}; {len(t.witnesses)} witnesses replay")
    return 0


def cmd_loe(args) -> int:
    with open(args.a) as fh:
        t1 = TiledSection.from_json(json.load(fh))
    with open(args.b) as fh:
        t2 = TiledSection.from_json(json.load(fh))
    m = build_loe(t1, t2)
    rep = verify_loe(m, t1.params)
    _write_json(args.out, m.to_json())
    print(f"{rep.piece_count} pieces; residue {len(m.residue_src)} src / "
          f"{len(m.residue_dst)} dst; "
          f"{'OK' if rep.ok else 'FAIL: ' + '; '.join(rep.failures)}")
    return 0 if rep.ok else 1


def cmd_plot(args) -> int:
    with open(args.infile) as fh:
        t = TiledSection.from_json(json.load(fh))
    svg = section_svg(t)
    with open(args.svg, "w") as fh:
        fh.write(svg)
    print(f"wrote {args.svg}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flowtile",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", help="short tile length (exact text form)")
    ap.add_argument("--beta", help="long tile length (exact text form)")
    ap.add_argument("--rho", default="1/2", help="target alpha frequency")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic orbit window")
    g.add_argument("--kind", default="uniform",
                   choices=["uniform", "sparse_geometric", "rotation_suspension",
                            "file"])
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--k0", help="base gap scale (exact text form)")
    g.add_argument("--ratio", type=int, default=2)
    g.add_argument("--angle", help="rotation angle (exact text form)")
    g.add_argument("--in", dest="infile", help="window JSON for kind=file")
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_gen)

    c = sub.add_parser("classes", help="chain classes of a window")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--k", required=True, help="threshold (exact text form)")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_classes)

    b = sub.add_parser("blocks", help="nested two-class block for thresholds")
    b.add_argument("k_list", help="comma-separated thresholds, e.g. 2,4,8")
    b.add_argument("--out")
    b.set_defaults(fn=cmd_blocks)

    d = sub.add_parser("density", help="banded density witness family")
    d.add_argument("--eps", required=True)
    d.add_argument("--band", required=True, help="lo,hi rational frequencies")
    d.add_argument("--windows", type=int, default=10)
    d.set_defaults(fn=cmd_density)

    bo = sub.add_parser("boost", help="steer a reachable sum's frequency")
    bo.add_argument("--in", dest="infile", required=True,
                    help="shift problem JSON")
    bo.add_argument("--gamma", required=True)
    bo.add_argument("--zeta", required=True)
    bo.add_argument("--eta", required=True)
    bo.add_argument("--test-mode", action="store_true",
                    help="skip the length bound (verified a posteriori)")
    bo.add_argument("--out")
    bo.set_defaults(fn=cmd_boost)

    t = sub.add_parser("tile", help="run a tiling pipeline on a window")
    t.add_argument("--mode", choices=["sparse", "full"], default="full")
    t.add_argument("--schedule", help="schedule JSON (else built from params)")
    t.add_argument("--depth", type=int, default=2)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--batch", action="store_true",
                   help="treat input/output as JSON-lines of windows/sections")
    t.add_argument("--in", dest="infile", required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(fn=cmd_tile)

    v = sub.add_parser("verify", help="check a tiled section end to end")
    v.add_argument("--eta", default="1/8")
    v.add_argument("infile")
    v.set_defaults(fn=cmd_verify)

    lo = sub.add_parser("loe", help="piecewise-translation map between sections")
    lo.add_argument("--a", required=True)
    lo.add_argument("--b", required=True)
    lo.add_argument("--out", required=True)
    lo.set_defaults(fn=cmd_loe)

    p = sub.add_parser("plot", help="render a tiled section to SVG")
    p.add_argument("infile")
    p.add_argument("--svg", required=True)
    p.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (UsageError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"verification failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
