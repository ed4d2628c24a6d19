"""Command-line entry point: ``minimaxlab <subcommand> ...``.

Exit codes: 0 success, 1 a replication case failed, 2 bad input
(argument or JSON parse error), 3 dimension mismatch, 4 unknown fixture.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Any, Callable

import numpy as np

from . import envelope as env
from . import fixtures
from . import linalg_core as la
from . import optimality as opt
from . import quadratic_games as qg
from . import stability as stab
from .dynamics import AlgorithmSpec, Family, simulate

EXIT_FAIL, EXIT_PARSE, EXIT_DIM, EXIT_FIXTURE = 1, 2, 3, 4


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# deterministic JSON


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = "%.17g" % x
    if all(c not in s for c in ".eEn"):
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.generic)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# input helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def load_game(path: str) -> qg.QuadraticGame:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InputError("game file must hold a JSON object")
    try:
        return qg.QuadraticGame.from_dict(data)
    except la.DimensionMismatch:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _oracle_and_point(args) -> tuple[env.SmoothGameOracle, np.ndarray, qg.QuadraticGame | None]:
    if getattr(args, "game", None):
        game = load_game(args.game)
        oracle = env.quadratic_oracle(game, os.path.basename(args.game))
        if args.point:
            point = np.array(_floats(args.point))
        else:
            st = qg.stationary_set(game)
            if st.empty:
                raise InputError("game has no stationary point; pass --point")
            point = st.basepoint
        return oracle, point, game
    if not getattr(args, "fixture", None):
        raise InputError("pass a fixture id or --game FILE")
    fx = fixtures.get(args.fixture)
    point = np.array(_floats(args.point)) if args.point else fx.point
    return fx.oracle, point, fx.game


def _spec(args) -> AlgorithmSpec:
    fam = Family.parse(args.algo)
    limit = bool(getattr(args, "limit", False))
    beta = args.beta
    if fam in (Family.EG, Family.PAST_EG) and beta is None:
        beta = 1.0
    if fam in (Family.HB, Family.NAG) and beta is None:
        beta = 0.0
    if fam is Family.EG and beta is not None and math.isinf(beta):
        limit = True
    k = 2.0 if args.k is None else args.k
    if fam is Family.OGD and k == 1.0:
        limit = True
    return AlgorithmSpec(fam, args.alpha1, args.alpha2, beta=beta or 0.0, k=k,
                         alternating=args.alternating, limit=limit)


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    game = load_game(args.game_file)
    _emit(qg.classify(game, args.tol).to_dict())
    return 0


def cmd_check(args) -> int:
    fx = fixtures.get(args.fixture)
    oracle = fx.oracle
    point = np.array(_floats(args.point)) if args.point else fx.point
    if point.size != oracle.n + oracle.m:
        raise la.DimensionMismatch(f"point needs {oracle.n + oracle.m} entries")
    eps = tuple(_floats(args.eps)) if args.eps else None
    x_radius = args.x_radius if args.x_radius is not None else fx.notes.get("x_radius")
    c = args.concept
    if c == "minimax":
        out = env.verify_local_minimax(oracle, point, eps or (0.1, 0.05, 0.01), x_radius,
                                       shape=args.shape).to_dict()
    elif c == "maximin":
        x, y = oracle.split(point)
        out = env.verify_local_minimax(oracle.mirrored(), np.concatenate([y, x]),
                                       eps or (0.1, 0.05, 0.01), x_radius, shape=args.shape).to_dict()
    elif c == "lrp":
        out = env.verify_lrp(oracle, point, eps or (0.1, 0.05, 0.01), x_radius,
                             shape=args.shape).to_dict()
    elif c == "saddle":
        out = opt.local_saddle_check(oracle, point, radius=args.radius).to_dict()
    else:
        out = opt.second_order_invertible(oracle, point).to_dict()
    out.update({"fixture": fx.id, "concept": c, "point": point.tolist()})
    _emit(out)
    return 0


def cmd_stability(args) -> int:
    oracle, point, _ = _oracle_and_point(args)
    v = stab.exponential_stability(_spec(args), oracle, point)
    _emit(v.to_dict())
    return 0


def cmd_simulate(args) -> int:
    oracle, point, _ = _oracle_and_point(args)
    z0 = np.array(_floats(args.z0))
    if z0.size != oracle.n + oracle.m:
        raise la.DimensionMismatch(f"z0 needs {oracle.n + oracle.m} entries")
    spec = _spec(args)
    rec = simulate(spec, oracle, z0, args.max_iters, args.stop_tol, target=point)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            rec.to_csv(fh)
    out = rec.to_dict(include_iterates=args.iterates)
    out["spec"] = spec.describe()
    _emit(out)
    return 0


def cmd_schur(args) -> int:
    coeffs = np.array(_floats(args.coeffs))
    ok = stab.schur_real(coeffs)
    inside, rho = stab.roots_inside(coeffs)
    roots = la.companion_roots(coeffs)
    _emit({"coefficients": coeffs.tolist(), "schur_stable": ok, "companion_stable": inside,
           "max_root_modulus": rho, "roots": [[r.real, r.imag] for r in roots]})
    return 0


def cmd_region(args) -> int:
    window = tuple(_floats(args.window)) if args.window else stab.DEFAULT_WINDOW
    if len(window) != 4:
        raise InputError("--window takes re_min,re_max,im_min,im_max")
    res = (args.res, args.res)
    if args.algo:
        fam = Family.parse(args.algo)
        param = args.param
        if fam is Family.EG and param is None:
            param = 1.0
        if fam is Family.OGD and param is None:
            param = 2.0
        if fam in (Family.HB, Family.NAG) and param is None:
            param = 0.0
        name = fam.value.lower() + ("" if param is None else f"_{param:g}")
        rasters = {name: stab.region_raster(fam, param, window, res, args.threads)}
    else:
        rasters = stab.raster_table(window, res, args.momentum_beta, args.threads)
    if args.out:
        stab.write_raster_csv(args.out, rasters)
    else:
        stab.write_raster_csv(sys.stdout, rasters)
    return 0


# ---------------------------------------------------------------------------
# replication cases


def _case_nc():
    o = fixtures.get("nc").oracle
    v, xs = env.global_minimax_grid(o)
    w, pairs = env.global_maximin_grid(o)
    ok = (abs(v) <= 1e-3 and np.all(np.abs(xs) <= 0.01) and abs(w + 0.25) <= 1e-3
          and len(pairs) > 0 and np.all(np.abs(np.abs(pairs[:, 0]) - 1) <= 0.01)
          and np.all(np.abs(pairs[:, 1]) <= 0.01))
    return ok, f"minimax {v:.4g} at x={xs.tolist()}, maximin {w:.4g} at {pairs.tolist()}"


def _case_lrp_sweep():
    grid = np.arange(-2, 2.0001, 0.25)
    bad = 0
    for a in grid:
        for b in grid:
            for c in grid:
                expect = (c == 0 and a >= 0 >= b) or (c != 0 and c * c >= a * b)
                got = qg.classify(qg.QuadraticGame.one_dim(a, b, c)).lrp.exists
                bad += expect != got
    return bad == 0, f"{grid.size ** 3} games, {bad} mismatches"


def _classify_case(fid, want):
    def run():
        rep = qg.classify(fixtures.get(fid).game)
        got = {k: getattr(rep, k).exists for k in want}
        return got == want, str(got)
    return run


def _verify_case(fid, concept, want):
    def run():
        fx = fixtures.get(fid)
        if concept == "minimax":
            v = env.verify_local_minimax(fx.oracle, fx.point, x_radius=fx.notes.get("x_radius"))
        else:
            v = env.verify_lrp(fx.oracle, fx.point, (0.0, 0.1, 0.05, 0.01),
                               fx.notes.get("x_radius"))
        return v.status == want, v.status
    return run


def _case_critical():
    ok = True
    msg = []
    for fid, expect in (("rem_critical", 0), ("rem_higher_order", 2)):
        fx = fixtures.get(fid)
        x, y = fx.oracle.split(fx.point)
        p = env.critical_directions(fx.oracle, x, y)
        ok &= len(p.critical) == expect
        msg.append(f"{fid}: {len(p.critical)} critical")
    fx = fixtures.get("counter_jin")
    p = env.critical_directions(fx.oracle, np.zeros(2), np.zeros(2))
    ok &= len(p.critical) == 2 and all(abs(t[1]) < 1e-12 for t in p.critical)
    msg.append(f"counter_jin: {[np.round(t, 6).tolist() for t in p.critical]}")
    return bool(ok), "; ".join(msg)


def _case_second_order():
    ho = fixtures.get("rem_higher_order").oracle
    cj = fixtures.get("counter_jin").oracle
    a = env.second_order_necessary_term(ho, [0.0], [0.0], [1.0])
    b = env.second_order_necessary_term(cj, [0.0, 0.0], [0.0, 0.0], [1.0, 0.0])
    return abs(a - 6) <= 0.1 and abs(b - 2) <= 0.05, f"{a:.6g}, {b:.6g}"


def _case_thm_all():
    o = fixtures.get("no_local_saddle").oracle
    z = np.zeros(2)
    bad = 0
    for a1 in np.linspace(0.05, 2, 8):
        for a2 in np.linspace(0.05, 4, 8):
            for fam, p in ((Family.GDA, None), (Family.HB, 0.4), (Family.NAG, 0.4)):
                spec = AlgorithmSpec(fam, a1, a2, beta=p or 0.0)
                bad += stab.exponential_stability(spec, o, z).stable
    ogd = stab.exponential_stability(AlgorithmSpec(Family.OGD, 0.1, 2.0, k=1.01), o, z).stable
    eg = stab.exponential_stability(AlgorithmSpec(Family.EG, 0.1, 1.5, limit=True), o, z).stable
    return bad == 0 and ogd and eg, f"{bad} stable momentum cells; OGD(1.01) {ogd}; EG(inf) {eg}"


def _case_failure_lrp():
    fx = fixtures.get("failure_lrp")
    lrp = qg.classify(fx.game).lrp.exists
    stable = 0
    for a1 in np.linspace(0.05, 2, 6):
        for a2 in np.linspace(0.05, 2, 6):
            for k in (1.01, 1.5, 2, 3):
                stable += stab.exponential_stability(AlgorithmSpec(Family.OGD, a1, a2, k=k), fx.oracle,
                                                     fx.point).stable
    return lrp and stable == 0, f"lrp {lrp}, {stable} stable OGD cells"


def _case_bilinear_gda():
    o = fixtures.get("bilinear").oracle
    grow = all(
        np.linalg.norm(simulate(AlgorithmSpec(Family.GDA, a, a), o, [0.1, 0.1]).iterates[-1])
        >= np.linalg.norm([0.1, 0.1])
        for a in (1e-3, 1e-2, 1e-1)
    )
    eg = simulate(AlgorithmSpec(Family.EG, 0.1, 0.1, beta=1.0), o, [0.1, 0.1], stop_tol=1e-9)
    d = float(np.linalg.norm(eg.iterates[-1]))
    return grow and d < 1e-6, f"GDA non-contracting {grow}; EG final |z| {d:.3g}"


CASES: dict[str, tuple[str, Callable[[], tuple[bool, str]]]] = {
    "nc": ("global minimax 0 at x=0, maximin -1/4 at (+-1, 0)", _case_nc),
    "lrp_1d_sweep": ("robust-point condition for 1D quadratics", _case_lrp_sweep),
    "no_local_saddle": ("-x^2+xy: minimax, no saddle",
                        _classify_case("no_local_saddle", {"local_minimax": True, "global_minimax": True,
                                                           "saddle": False})),
    "bilinear": ("xy: saddle, minimax and maximin",
                 _classify_case("bilinear", {"saddle": True, "global_minimax": True,
                                             "global_maximin": True})),
    "onedq": ("-x^2-y^2+2xy: global minimax only",
              _classify_case("onedq", {"global_minimax": True, "global_maximin": False, "saddle": False})),
    "glp": ("-x^2+xy+y^2: robust point, no minimax, no maximin",
            _classify_case("glp", {"lrp": True, "local_minimax": False, "local_maximin": False})),
    "separable": ("-x^2+y^2: no robust point", _classify_case("separable", {"lrp": False})),
    "kawa_suff": ("xy^3-y^6 local minimax", _verify_case("kawa_suff", "minimax", "yes")),
    "glbstatl": ("x^3y at (0,1) not local minimax", _verify_case("glbstatl", "minimax", "no")),
    "stationary_global_no_local": ("stationary but not local minimax",
                                   _verify_case("stationary_global_no_local", "minimax", "no")),
    "local_non_global": ("x^3-x-y^2 local minimax", _verify_case("local_non_global", "minimax", "yes")),
    "lrp_eps0": ("xy^3-x^2/(1+y^2) robust point", _verify_case("lrp_eps0", "lrp", "yes")),
    "critical_directions": ("critical direction partitions", _case_critical),
    "second_order_term": ("second-order necessary terms 6 and 2", _case_second_order),
    "thm_all": ("momentum methods never stable on -x^2+xy", _case_thm_all),
    "failure_lrp": ("OGD cannot reach the robust point", _case_failure_lrp),
    "bilinear_gda": ("GDA does not converge on xy, EG does", _case_bilinear_gda),
}


def cmd_replicate(args) -> int:
    if args.all:
        ids = list(CASES)
    elif args.case:
        if args.case not in CASES:
            raise fixtures.UnknownFixture(args.case)
        ids = [args.case]
    else:
        raise InputError("pass a case id or --all")
    failed = 0
    width = max(len(i) for i in ids)
    for cid in ids:
        desc, fn = CASES[cid]
        t0 = time.perf_counter()
        ok, detail = fn()
        dt = time.perf_counter() - t0
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {cid:<{width}}  {dt:6.2f}s  {desc}: {detail}")
    print(f"{len(ids) - failed}/{len(ids)} passed")
    return EXIT_FAIL if failed else 0


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_PARSE)


def _add_algo(p):
    p.add_argument("--algo", required=True, help="GDA, HB, NAG, EG, PastEG or OGD")
    p.add_argument("--alpha1", type=float, default=0.1, help="x step size (default 0.1)")
    p.add_argument("--alpha2", type=float, default=0.1, help="y step size (default 0.1)")
    p.add_argument("--beta", type=float, default=None,
                   help="momentum (HB/NAG, default 0) or extra-gradient ratio (EG/PastEG, default 1; inf for the limit)")
    p.add_argument("--k", type=float, default=None, help="OGD coefficient (default 2; 1 selects the k -> 1+ limit)")
    p.add_argument("--alternating", action="store_true", help="alternating updates (GDA and OGD)")
    p.add_argument("--limit", action="store_true", help="use the beta -> inf / k -> 1+ limit region")


def _add_target(p):
    p.add_argument("fixture", nargs="?", help="fixture id (see 'replicate --list')")
    p.add_argument("--game", help="quadratic game JSON file instead of a fixture")
    p.add_argument("--point", help="comma-separated point (x..., y...); defaults to the fixture point")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minimaxlab", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=42, help="seed for randomized routines (default 42)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $MINIMAXLAB_THREADS or CPU count)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="classify a quadratic game given as JSON")
    c.add_argument("game_file")
    c.add_argument("--tol", type=float, default=1e-8, help="eigenvalue / residual tolerance (default 1e-8)")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("check", help="numerically verify an optimality concept at a fixture point")
    c.add_argument("fixture")
    c.add_argument("--point")
    c.add_argument("--concept", required=True, choices=["saddle", "minimax", "maximin", "lrp", "second-order"])
    c.add_argument("--eps", help="comma-separated neighborhood radii (default 0.1,0.05,0.01)")
    c.add_argument("--x-radius", type=float, default=None,
                   help="opposite-player neighborhood radius (default eps/2 or the fixture's own)")
    c.add_argument("--shape", choices=["linf", "l2"], default="linf", help="neighborhood norm (default linf)")
    c.add_argument("--radius", type=float, default=0.1, help="sampling radius for the saddle check (default 0.1)")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("stability", help="local exponential stability verdict")
    _add_target(c)
    _add_algo(c)
    c.set_defaults(func=cmd_stability)

    c = sub.add_parser("simulate", help="run an algorithm and report the trajectory")
    _add_target(c)
    _add_algo(c)
    c.add_argument("--z0", required=True, help="comma-separated start point")
    c.add_argument("--max-iters", type=int, default=10_000, help="default 10000")
    c.add_argument("--stop-tol", type=float, default=1e-8, help="stop when |v(z)| <= this (default 1e-8)")
    c.add_argument("--csv", help="write iterates as CSV to this path")
    c.add_argument("--iterates", action="store_true", help="include every iterate in the JSON")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("schur", help="test whether polynomial roots lie in the unit disk")
    c.add_argument("coeffs", help="comma-separated coefficients, highest degree first")
    c.set_defaults(func=cmd_schur)

    c = sub.add_parser("region", help="rasterize stability regions in the lambda plane as CSV")
    c.add_argument("--algo", help="single family; omit for the default five-column table")
    c.add_argument("--param", type=float, default=None, help="beta or k for --algo (inf / 1 for limits)")
    c.add_argument("--momentum-beta", type=float, default=0.4, help="beta of the hb_b/nag_b columns (default 0.4)")
    c.add_argument("--window", help="re_min,re_max,im_min,im_max (default -2.5,0.5,-1.5,1.5)")
    c.add_argument("--res", type=int, default=801, help="pixels per axis (default 801)")
    c.add_argument("--out", help="output CSV path (default stdout)")
    c.set_defaults(func=cmd_region)

    c = sub.add_parser("replicate", help="run built-in example reproductions")
    c.add_argument("case", nargs="?")
    c.add_argument("--all", action="store_true")
    c.add_argument("--list", action="store_true", help="list case and fixture ids")
    c.set_defaults(func=cmd_replicate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        os.environ["MINIMAXLAB_THREADS"] = str(args.threads)
    np.random.seed(args.seed)
    if args.command == "replicate" and args.list:
        print("cases:   " + " ".join(CASES))
        print("fixtures: " + " ".join(fixtures.REGISTRY))
        return 0
    try:
        return args.func(args)
    except fixtures.UnknownFixture as exc:
        sys.stderr.write(f"unknown fixture or case: {exc.args[0]}\n")
        return EXIT_FIXTURE
    except la.DimensionMismatch as exc:
        sys.stderr.write(f"dimension error: {exc}\n")
        return EXIT_DIM
    except (InputError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
