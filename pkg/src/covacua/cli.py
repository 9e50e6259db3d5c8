"""Command-line front end.

Verbs: verify-axioms, module, zhu, blocks, connection, sew, conditions.
Reports are plain diffable text (or JSON with --json); every number is an
exact rational string.  Runs are deterministic for a fixed configuration:
seeds are explicit and bases canonical.  Exit codes: 0 all checks passed,
1 a check failed, 2 usage/parse error, 3 a computation failed to
stabilize.

The environment variable COVACUA_WORKERS caps worker threads; the engine
evaluates sequentially (a cap of any positive value is honored) and its
output never depends on the setting.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .exact import rat, rat_str
from .polynomials import PF1
from .virasoro import minimal_c, minimal_h, VermaModule, SimpleQuotient
from .voa import (
    MinimalModel, state_weight, verify_commutator, verify_associativity,
    verify_skew_symmetry, verify_derivation, verify_weight_shift,
    verify_theta_involution, cn_quotient_report, CurrentAlgebra,
)
from .zhu import zhu_algebra, condition_report
from .blocks import (
    CovacuaProblem, INF, block_dimension, check_propagation,
    check_decomposition, check_factorization, sewing_identity_check,
    relation_matrix,
)
from .connection import (
    connection_data, depth_stability_check, flatness_check, export_ode,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_UNSTABLE = 3


class CliError(Exception):
    pass


def _workers_cap():
    cap = os.environ.get("COVACUA_WORKERS")
    if cap is None:
        return None
    try:
        n = int(cap)
    except ValueError:
        raise CliError(f"COVACUA_WORKERS must be a positive integer, got {cap!r}")
    if n < 1:
        raise CliError("COVACUA_WORKERS must be >= 1")
    return n


def parse_module_label(model: MinimalModel | None, text: str):
    """Labels: 'p/q/r/s', 'dual:p/q/r/s', or 'vacuum' (needs a model)."""
    text = text.strip()
    dual = False
    if text.startswith("dual:"):
        dual = True
        text = text[len("dual:"):]
    if text == "vacuum":
        if model is None:
            raise CliError("'vacuum' label needs an explicit p/q model")
        rs = (1, 1)
    else:
        parts = text.split("/")
        if len(parts) != 4:
            raise CliError(f"module label {text!r} is not p/q/r/s")
        p, q, r, s = map(int, parts)
        if model is None:
            model = MinimalModel(p, q)
        elif (model.p, model.q) != (p, q):
            raise CliError("all modules in a problem must share one (p,q)")
        rs = (r, s)
    handle = model.dual_module(*rs) if dual else model.module(*rs)
    return model, handle


def parse_problem_file(path: str):
    """Lines 'coordinate module-label'; '#' comments; 'inf' for infinity."""
    model = None
    points = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                coord_s, label = line.split()
            except ValueError:
                raise CliError(f"{path}:{lineno}: expected 'coordinate label'")
            coord = INF if coord_s == "inf" else rat(coord_s)
            model, handle = parse_module_label(model, label)
            points.append((coord, handle))
    if model is None:
        raise CliError(f"{path}: no marked points")
    return model, points


def _model_from_args(args) -> MinimalModel:
    return MinimalModel(args.p, args.q)


def _emit(lines, payload, args):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        for ln in lines:
            print(ln)


# -- verbs ---------------------------------------------------------------


def cmd_zhu(args):
    model = _model_from_args(args)
    za = zhu_algebra(model, args.depth)
    lines = [
        f"model ({model.p},{model.q})  c = {rat_str(model.c)}",
        f"depth {za['depth']}  stabilized {za['stabilized']}",
        f"dim A_z = {za['dimension']}",
        f"min-poly {za['min_poly'].text()}",
        "roots " + " ".join(rat_str(r) for r in za["roots"]),
        f"squarefree {za['squarefree']}",
    ]
    payload = {
        "p": model.p, "q": model.q, "c": rat_str(model.c),
        "depth": za["depth"], "stabilized": za["stabilized"],
        "dimension": za["dimension"],
        "min_poly": [rat_str(x) for x in za["min_poly"].c],
        "roots": [rat_str(r) for r in za["roots"]],
        "squarefree": za["squarefree"],
    }
    _emit(lines, payload, args)
    if not za["stabilized"]:
        return EXIT_UNSTABLE
    ok = (za["dimension"] == (model.p - 1) * (model.q - 1) // 2
          and za["squarefree"]
          and za["roots"] == za["expected_roots"])
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_module(args):
    if args.label:
        parts = args.label.split("/")
        if len(parts) != 4:
            raise CliError("--label must be p/q/r/s")
        p, q, r, s = map(int, parts)
        c = minimal_c(p, q)
        h = minimal_h(p, q, r, s)
        sq = SimpleQuotient(c, h, vacuum=(h == 0))
        dims = sq.graded_dims(args.depth)
        lines = [
            f"module L(c,h) for (p,q,r,s)=({p},{q},{r},{s})",
            f"c = {rat_str(c)}  h = {rat_str(h)}",
            "graded-dims " + " ".join(map(str, dims)),
        ]
        payload = {"c": rat_str(c), "h": rat_str(h), "graded_dims": dims}
    else:
        if args.c is None or args.h is None:
            raise CliError("need --label or both --c and --h")
        c, h = rat(args.c), rat(args.h)
        verma = VermaModule(c, h)
        from .exact import rank_kernel
        dims = []
        for d in range(args.depth + 1):
            rank, ker = rank_kernel(verma.gram_sparse(d))
            dims.append(verma.dim(d) - len(ker))
        lines = [
            f"Verma-level quotient for c = {rat_str(c)}, h = {rat_str(h)}",
            "graded-dims " + " ".join(map(str, dims)),
        ]
        payload = {"c": rat_str(c), "h": rat_str(h), "graded_dims": dims}
    _emit(lines, payload, args)
    return EXIT_OK


def cmd_verify_axioms(args):
    model = _model_from_args(args)
    rng = random.Random(args.seed)
    mod = model.module(*model.labels()[-1])
    results = {}

    def probes(count, maxdepth):
        out = []
        while len(out) < count:
            d = rng.randint(0, maxdepth)
            bas = mod.basis(d)
            if not bas:
                continue
            vec = {k: rat(rng.randint(-2, 2)) for k in bas}
            vec = {k: v for k, v in vec.items() if v != 0}
            if vec:
                out.append(vec)
        return out

    def states(count, wmax):
        out = []
        while len(out) < count:
            st = model.random_state(rng.randint(2, wmax), rng)
            if st:
                out.append(st)
        return out

    # exhaustive below weight 4
    low = model.states_up_to(3)
    exhaustive = 0
    for v1 in low:
        for v2 in low:
            for m, n in [(-2, 1), (0, 0), (1, -1), (2, -2)]:
                probe = {k: rat(1) for k in mod.basis(2)} or {k: rat(1) for k in mod.basis(0)}
                assert_ok = (verify_commutator(model, v1, v2, m, n, mod, probe)
                             and verify_associativity(model, v1, v2, m, n, mod, probe)
                             and verify_skew_symmetry(model, v1, v2, n))
                exhaustive += 1
                if not assert_ok:
                    results["exhaustive"] = "FAIL"
    results.setdefault("exhaustive", f"pass ({exhaustive} cases)")

    ca = CurrentAlgebra(model)
    checks = {"commutator": 0, "associativity": 0, "skew": 0,
              "derivation": 0, "weight-shift": 0, "theta-involution": 0,
              "jacobi": 0}
    failed = False
    for _ in range(args.samples):
        v1, v2 = states(2, args.weight)
        m, n = rng.randint(-3, 3), rng.randint(-3, 3)
        probe = probes(1, args.depth)[0]
        if not verify_commutator(model, v1, v2, m, n, mod, probe):
            failed = True
        checks["commutator"] += 1
        if not verify_associativity(model, v1, v2, m, n, mod, probe):
            failed = True
        checks["associativity"] += 1
        if not verify_skew_symmetry(model, v1, v2, n):
            failed = True
        checks["skew"] += 1
        if not verify_derivation(model, v1, n, mod, probe):
            failed = True
        checks["derivation"] += 1
        if not verify_weight_shift(model, v1, n, mod, probe):
            failed = True
        checks["weight-shift"] += 1
        if not verify_theta_involution(model, v1, n, mod, probe):
            failed = True
        checks["theta-involution"] += 1
        x = ca.element(v1, {rng.randint(-2, 2): rat(1)})
        y = ca.element(v2, {rng.randint(-2, 2): rat(1)})
        z = ca.element(states(1, args.weight)[0], {rng.randint(-2, 2): rat(1)})
        lhs = ca.bracket(ca.bracket(x, y), z)
        rhs = ca.add(ca.bracket(x, ca.bracket(y, z)),
                     ca.bracket(y, ca.bracket(x, z)), -1)
        if lhs != rhs:
            failed = True
        checks["jacobi"] += 1
    lines = [f"model ({model.p},{model.q})  seed {args.seed}",
             f"exhaustive-low-weight {results['exhaustive']}"]
    for k in sorted(checks):
        lines.append(f"{k} pass ({checks[k]} samples)" if not failed
                     else f"{k} checked ({checks[k]} samples)")
    lines.append("verdict " + ("PASS" if not failed else "FAIL"))
    payload = {"seed": args.seed, "samples": args.samples,
               "checks": checks, "pass": not failed}
    _emit(lines, payload, args)
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def cmd_conditions(args):
    model = _model_from_args(args)
    rep = condition_report(model, depth=args.depth)
    za = rep["zhu"]
    lines = [
        f"model ({model.p},{model.q})",
        f"condition-I  C2-dim {rep['c2']['total']} stabilized {rep['c2']['stabilized']}",
        f"condition-II semisimple {rep['condition_II']} (min-poly {za['min_poly'].text()})",
    ]
    for rs, info in sorted(rep["induced"].items()):
        lines.append(
            f"condition-III ({rs[0]},{rs[1]}) simple {info['simple']} "
            f"checked-depth {info['checked_depth']}")
    verdict = rep["condition_I"] and rep["condition_II"] and rep["condition_III"]
    lines.append("verdict " + ("PASS" if verdict else "FAIL"))
    payload = {
        "c2_total": rep["c2"]["total"],
        "condition_I": rep["condition_I"],
        "condition_II": rep["condition_II"],
        "condition_III": rep["condition_III"],
        "induced": {f"{rs[0]},{rs[1]}": info["simple"]
                    for rs, info in rep["induced"].items()},
    }
    _emit(lines, payload, args)
    return EXIT_OK if verdict else EXIT_CHECK_FAILED


def cmd_blocks(args):
    model, points = parse_problem_file(args.problem)
    if args.check == "factorization":
        if args.split is None:
            raise CliError("factorization requires --split")
        left, right = points[:args.split], points[args.split:]
        desc = "; ".join(
            ("inf" if c is INF else rat_str(c)) + f":{m!r}" for c, m in points)
        lines = [f"problem {desc} (left {args.split}, right scaled by {args.q_scale})",
                 f"depth {args.depth}  weight-bound {args.weight_bound}"]
        payload = {"points": desc, "depth": args.depth,
                   "weight_bound": args.weight_bound}
        status = EXIT_OK
        fact = check_factorization(model, left, right, rat(args.q_scale),
                                   args.depth, args.weight_bound)
        lines.append(f"direct {fact['direct']} stabilized {fact['direct_stabilized']}")
        for rs, ch in sorted(fact["channels"].items()):
            lines.append(f"channel ({rs[0]},{rs[1]}) left {ch['left']} "
                         f"right {ch['right']} stabilized {ch['stabilized']}")
        lines.append(f"channel-sum {fact['channel_sum']}")
        lines.append("verdict " + ("PASS" if fact["pass"] else "FAIL"))
        payload["factorization"] = {
            "direct": fact["direct"], "channel_sum": fact["channel_sum"],
            "pass": fact["pass"]}
        if not fact["pass"]:
            status = EXIT_CHECK_FAILED
        elif not fact["direct_stabilized"]:
            status = EXIT_UNSTABLE
        _emit(lines, payload, args)
        return status
    problem = CovacuaProblem(model, points)
    lines = [f"problem {problem.describe()}",
             f"depth {args.depth}  weight-bound {args.weight_bound}"]
    payload = {"points": problem.describe(), "depth": args.depth,
               "weight_bound": args.weight_bound}
    status = EXIT_OK
    if args.check == "decomposition":
        dec = check_decomposition(problem, args.depth, args.weight_bound)
        lines.append(f"lhs {dec['lhs']} stabilized {dec['lhs_stabilized']}")
        for rs, sm in sorted(dec["summands"].items()):
            lines.append(f"summand ({rs[0]},{rs[1]}) dim {sm['dim']} "
                         f"stabilized {sm['stabilized']}")
        lines.append(f"rhs {dec['rhs']}")
        lines.append("verdict " + ("PASS" if dec["pass"] else "FAIL"))
        payload["decomposition"] = {"lhs": dec["lhs"], "rhs": dec["rhs"],
                                    "pass": dec["pass"]}
        if not dec["pass"]:
            status = EXIT_CHECK_FAILED
        elif not dec["lhs_stabilized"]:
            status = EXIT_UNSTABLE
    elif args.check == "propagation":
        extras = [rat(x) for x in (args.insert or ["17/5", "23/7"])]
        rep = check_propagation(problem, extras, args.depth, args.weight_bound)
        lines.append("dims " + " ".join(map(str, rep["dims"])))
        lines.append("verdict " + ("PASS" if rep["pass"] else "FAIL"))
        payload["propagation"] = rep
        if not rep["pass"]:
            status = EXIT_CHECK_FAILED
        elif not rep["stabilized"]:
            status = EXIT_UNSTABLE
    elif args.check == "sewing":
        # the channel label: the module at infinity if marked, else the first
        slot = problem.infinity_slot()
        handle = problem.points[slot][1] if slot is not None else problem.points[0][1]
        rs = handle.base.rs if hasattr(handle, "base") else handle.rs
        rng = random.Random(args.seed if args.seed is not None else 7)
        samples = [(model.virasoro_state(), n) for n in (-2, -1, 0, 1, 2)]
        while len(samples) < 10:
            st = model.random_state(rng.randint(2, 4), rng)
            if st:
                samples.append((st, rng.randint(-2, 2)))
        ok = sewing_identity_check(model, rs, args.q_order, samples)
        lines.append(f"sewing label ({rs[0]},{rs[1]}) q-order {args.q_order}")
        lines.append("verdict " + ("PASS" if ok else "FAIL"))
        payload["sewing"] = {"label": list(rs), "pass": ok}
        if not ok:
            status = EXIT_CHECK_FAILED
    else:
        sp = block_dimension(problem, args.depth, args.weight_bound)
        lines.append(f"dimension {sp.dimension}")
        lines.append(f"stabilized-depth {sp.stabilized_depth} "
                     f"stabilized-weight {sp.stabilized_weight}")
        lines.append(f"window {sp.window.size} relations {sp.relation_rows} "
                     f"dropped {sp.dropped_rows}")
        bound = 1
        per = []
        for _, handle in problem.points:
            rep = cn_quotient_report(model, handle, 2, args.depth)
            per.append(rep["total"])
            bound *= rep["total"]
        lines.append("c2-upper-bound " + " * ".join(map(str, per)) + f" = {bound}")
        payload.update({"dimension": sp.dimension,
                        "stabilized": sp.stabilized,
                        "c2_upper_bound": bound})
        if args.dump_relations:
            m, _ = relation_matrix(problem, args.depth, args.weight_bound)
            with open(args.dump_relations, "w") as fh:
                fh.write(m.to_text())
            lines.append(f"relations-written {args.dump_relations}")
        if not sp.stabilized:
            status = EXIT_UNSTABLE
    _emit(lines, payload, args)
    return status


def cmd_connection(args):
    model, points = parse_problem_file(args.problem)
    problem = CovacuaProblem(model, points)
    lines = [f"problem {problem.describe()}"]
    payload = {"points": problem.describe()}
    status = EXIT_OK
    movable = args.movable if args.movable is not None else problem.finite_slots()
    cd = connection_data(problem, args.depth, args.weight_bound, movable)
    lines.append(f"dimension {cd.dimension}")
    for slot in sorted(cd.matrices):
        for i, row in enumerate(cd.matrices[slot]):
            lines.append(f"A[{slot}][{i}] " + " ".join(rat_str(v) for v in row))
    st = depth_stability_check(problem, args.depth, args.weight_bound, movable)
    lines.append(f"depth-stable {st['pass']}")
    payload["dimension"] = cd.dimension
    payload["depth_stable"] = st["pass"]
    if not st["pass"]:
        status = EXIT_UNSTABLE
    if args.flatness:
        a, b = args.flatness
        res = flatness_check(model, problem.points, a, b, args.depth,
                             args.weight_bound, degree_cap=args.degree_cap)
        lines.append(f"flatness({a},{b}) " + ("PASS" if res["pass"] else "FAIL"))
        payload["flatness"] = res["pass"]
        if not res["pass"]:
            status = EXIT_CHECK_FAILED
    if args.export_ode is not None:
        doc = export_ode(model, problem.points, args.export_ode, args.depth,
                         args.weight_bound, degree_cap=args.degree_cap)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(doc)
            lines.append(f"ode-written {args.output}")
        else:
            lines.append(doc.rstrip("\n"))
    _emit(lines, payload, args)
    return status


def cmd_sew(args):
    model = _model_from_args(args)
    rng = random.Random(args.seed)
    samples = [(model.virasoro_state(), 0)]
    while len(samples) < args.samples:
        st = model.random_state(rng.randint(2, 4), rng)
        if st:
            samples.append((st, rng.randint(-2, 2)))
    ok = sewing_identity_check(model, (args.r, args.s), args.q_order, samples)
    lines = [f"model ({model.p},{model.q}) label ({args.r},{args.s})",
             f"q-order {args.q_order} samples {len(samples)} seed {args.seed}",
             "verdict " + ("PASS" if ok else "FAIL")]
    payload = {"q_order": args.q_order, "samples": len(samples), "pass": ok}
    _emit(lines, payload, args)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser():
    ap = argparse.ArgumentParser(
        prog="covacua",
        description="Exact Virasoro minimal-model modules, Zhu algebras, "
                    "conformal blocks on P^1, and their connection.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def add_pq(p):
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--q", type=int, required=True)

    pz = sub.add_parser("zhu", help="Zhu algebra presentation")
    add_pq(pz)
    pz.add_argument("--depth", type=int, default=None)
    pz.add_argument("--json", action="store_true")
    pz.set_defaults(func=cmd_zhu)

    pm = sub.add_parser("module", help="graded dimensions of a module")
    pm.add_argument("--label", help="p/q/r/s")
    pm.add_argument("--c")
    pm.add_argument("--h")
    pm.add_argument("--depth", type=int, default=6)
    pm.add_argument("--json", action="store_true")
    pm.set_defaults(func=cmd_module)

    pv = sub.add_parser("verify-axioms", help="exact axiom verification")
    add_pq(pv)
    pv.add_argument("--depth", type=int, default=4)
    pv.add_argument("--weight", type=int, default=6)
    pv.add_argument("--samples", type=int, default=50)
    pv.add_argument("--seed", type=int, default=7)
    pv.add_argument("--json", action="store_true")
    pv.set_defaults(func=cmd_verify_axioms)

    pc = sub.add_parser("conditions", help="Condition I/II/III report")
    add_pq(pc)
    pc.add_argument("--depth", type=int, default=8)
    pc.add_argument("--json", action="store_true")
    pc.set_defaults(func=cmd_conditions)

    pb = sub.add_parser("blocks", help="conformal-block dimensions and checks")
    pb.add_argument("problem", help="problem file: lines 'coordinate label'")
    pb.add_argument("--depth", type=int, default=6)
    pb.add_argument("--weight-bound", type=int, default=4)
    pb.add_argument("--check",
                    choices=["propagation", "decomposition", "factorization",
                             "sewing"])
    pb.add_argument("--split", type=int, help="factorization: left-side size")
    pb.add_argument("--q-scale", default="1/3")
    pb.add_argument("--insert", nargs="*", help="propagation: coordinates")
    pb.add_argument("--q-order", type=int, default=4, help="sewing: q order")
    pb.add_argument("--seed", type=int, default=7)
    pb.add_argument("--dump-relations", help="write relation matrix (text)")
    pb.add_argument("--json", action="store_true")
    pb.set_defaults(func=cmd_blocks)

    pn = sub.add_parser("connection", help="connection matrices and flatness")
    pn.add_argument("problem")
    pn.add_argument("--depth", type=int, default=4)
    pn.add_argument("--weight-bound", type=int, default=4)
    pn.add_argument("--movable", type=int, nargs="*")
    pn.add_argument("--flatness", type=int, nargs=2, metavar=("A", "B"))
    pn.add_argument("--export-ode", type=int, metavar="SLOT")
    pn.add_argument("--output")
    pn.add_argument("--degree-cap", type=int, default=24)
    pn.add_argument("--json", action="store_true")
    pn.set_defaults(func=cmd_connection)

    ps = sub.add_parser("sew", help="sewing-element identity")
    add_pq(ps)
    ps.add_argument("--r", type=int, required=True)
    ps.add_argument("--s", type=int, required=True)
    ps.add_argument("--q-order", type=int, default=4)
    ps.add_argument("--samples", type=int, default=10)
    ps.add_argument("--seed", type=int, default=7)
    ps.add_argument("--json", action="store_true")
    ps.set_defaults(func=cmd_sew)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _workers_cap()
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
