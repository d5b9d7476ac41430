"""Command line front end: ``pacinv dims|graph|mu|learn|experiment|generate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import dims, mugame
from .constructions import generate
from .core import Sample, load_problem, problem_to_dict
from .exceptions import PacInvError, SearchBudgetExceeded
from .experiment import plot_data, run_config, write_csv
from .learners.spec import KINDS, LearnerSpec
from .oig import build_graph, orient


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(doc, out=None):
    text = json.dumps(doc, indent=2, default=_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _int_list(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _ids_to_index(problem, ids) -> list:
    index = problem.space.index
    out = []
    for v in ids:
        if v in index:
            out.append(index[v])
        elif str(v) in index:
            out.append(index[str(v)])
        else:
            raise SystemExit(f"unknown instance id {v!r}")
    return out


def load_sample(path, problem) -> tuple[Sample, list | None]:
    """Read ``{"pairs": [{"x": id, "y": 0|1} | [id, y], ...], "unlabeled": [id, ...]}``."""
    with open(path) as fh:
        doc = json.load(fh)
    pairs = doc["pairs"] if isinstance(doc, dict) else doc
    xs, ys = [], []
    for p in pairs:
        x, y = (p["x"], p["y"]) if isinstance(p, dict) else p
        xs.append(x)
        ys.append(int(y))
    S = Sample(np.array(_ids_to_index(problem, xs), dtype=np.int64), np.array(ys, dtype=np.uint8))
    unlabeled = None
    if isinstance(doc, dict) and doc.get("unlabeled") is not None:
        unlabeled = _ids_to_index(problem, doc["unlabeled"])
    return S, unlabeled


# ----------------------------------------------------------------- verbs

def cmd_dims(args):
    problem, _ = load_problem(args.problem)
    measures = ["vcdim", "vc_o", "vc_ao", "dim_hg"] if args.measure == "all" else [args.measure]
    out = {}
    for name in measures:
        if name == "vcdim":
            out[name] = dims.vcdim(problem)
        elif name == "vc_o":
            out[name] = dims.vc_o(problem)
        elif name == "vc_ao":
            out[name] = dims.vc_ao(problem)
        else:
            try:
                out[name] = dims.dim_hg(problem, args.kmax)
            except SearchBudgetExceeded as exc:
                out[name] = exc.lower_bound
                out[f"{name}_lower_bound_only"] = True
    _emit(out, args.out)


def cmd_graph(args):
    problem, _ = load_problem(args.problem)
    X = _ids_to_index(problem, json.loads(f"[{args.instances}]")) if args.instances else \
        list(range(problem.n_instances))
    kind, eta = args.cls, None
    if kind.startswith("eta:"):
        kind, eta = "eta", float(kind.split(":", 1)[1])
    cls = dims.restrict(problem, X, kind, eta)
    doc = {"base_instances": [problem.space.instances[i] for i in cls.base_instances],
           "class": args.cls, "vertices": cls.labelings.tolist()}
    if cls.empty:
        doc.update(edges=[], winners=[], bound=None, empty=True)
    else:
        g = build_graph(cls)
        o = orient(g)
        doc.update(edges=g.edges.tolist(), winners=o.winner.tolist(), bound=o.bound,
                   vcdim=dims.vcdim(cls.labelings))
    _emit(doc, args.out)


def cmd_mu(args):
    problem, _ = load_problem(args.problem)
    if args.orbits:
        phi = _int_list(args.orbits)
        sol = mugame.solve_mu(problem, phi, args.tolerance)
        doc = {"phi": phi, "mu": sol.mu, "duality_gap": sol.duality_gap}
    else:
        if not args.exhaustive or args.t is None:
            raise SystemExit("give --orbits, or --t with --exhaustive")
        flagged = False
        try:
            best = mugame.mu_over_tuples(problem, args.t, args.budget, args.tolerance)
        except SearchBudgetExceeded as exc:
            best, flagged = exc.lower_bound, True
        phi = list(best.phi)
        sol = mugame.solve_mu(problem, phi, args.tolerance)
        doc = {"t": args.t, "phi": phi, "mu": sol.mu, "duality_gap": sol.duality_gap,
               "lower_bound_only": flagged}
    rows = sol.game.cands
    top = np.argsort(-sol.P_star)[: args.top]
    doc["witness_P"] = [{"f": rows.B_f[r].tolist(),
                         "x": [problem.space.instances[i] for i in rows.B_x[r]],
                         "p": float(sol.P_star[r])} for r in top if sol.P_star[r] > 0]
    doc["witness_w"] = [{"f_lo": list(e[0]), "f_hi": list(e[1]),
                         "x": problem.space.instances[e[2]], "coordinate": e[3],
                         "w_lo": float(w[0]), "w_hi": float(w[1])}
                        for e, w in zip(sol.game.graph.edges, sol.w_star)]
    _emit(doc, args.out)


def cmd_learn(args):
    problem, _ = load_problem(args.problem)
    S, unlabeled = load_sample(args.sample, problem)
    params = {}
    if args.tie:
        params["tie_rule"] = args.tie
    if args.delta is not None:
        params["delta"] = args.delta
    if args.split is not None:
        params["split"] = int(args.split) if args.split >= 1 else args.split
    if args.rounds_cap is not None:
        params["rounds_cap"] = args.rounds_cap
    if args.eta is not None:
        params["eta"] = args.eta
    if args.learner == "CONF_BOOSTED":
        params = {"inner": {"kind": args.inner, **params}, "n_rounds": args.n_rounds,
                  "validation_size": args.validation_size}
    spec = LearnerSpec(args.learner, params)
    est = spec.build(problem, np.random.default_rng(args.seed))
    if args.learner == "ADAPTIVE_AGNOSTIC":
        est.fit(S.xs, S.ys, X_unlabeled=unlabeled)
    else:
        est.fit(S.xs, S.ys)
    labels = est.predict(np.arange(problem.n_instances))
    meta = dict(getattr(est.model_, "meta", {}))
    meta.update(learner=spec.to_dict(), sample_size=len(S))
    _emit({"instances": list(problem.space.instances), "predictor": labels.tolist(), "meta": meta}, args.out)


def cmd_experiment(args):
    with open(args.config) as fh:
        config = json.load(fh)
    result = run_config(config, args.seed, args.trials, args.threads)
    write_csv(result, args.out)
    if args.emit_plotdata:
        _emit(plot_data(result), args.emit_plotdata)
    for r in result.rows:
        logging.info("%s m=%d mean_err=%.4f se=%.4f", r.learner, r.m, r.mean_err, r.se)


def cmd_generate(args):
    params = {}
    for item in args.param or []:
        key, val = item.split("=", 1)
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    c = generate(args.name, params, verify=args.verify)
    problem = c.problem
    D = None
    if args.with_target or problem is None:
        target = c.sample_target(np.random.default_rng(args.seed))
        problem, D = target.problem, target.D
    _emit(problem_to_dict(problem, D), args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pacinv", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("dims", help="combinatorial dimensions of a problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--measure", choices=["vcdim", "vc_o", "vc_ao", "dim_hg", "all"], default="all")
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("graph", help="one-inclusion graph and orientation")
    p.add_argument("--problem", required=True)
    p.add_argument("--instances", help="comma separated instance ids (JSON literals)")
    p.add_argument("--class", dest="cls", default="invariant",
                   help="invariant | orbit | eta:<value> | raw")
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("mu", help="game value of an orbit multiset")
    p.add_argument("--problem", required=True)
    p.add_argument("--orbits", help="comma separated orbit indices, repeats allowed")
    p.add_argument("--t", type=int)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--budget", type=int, default=10**4)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("learn", help="train a learner and print its predictor")
    p.add_argument("--problem", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--learner", choices=KINDS, required=True)
    p.add_argument("--inner", choices=KINDS, default="OIG_INVARIANT")
    p.add_argument("--tie", choices=["first_index", "uniform_random"])
    p.add_argument("--delta", type=float)
    p.add_argument("--split", type=float)
    p.add_argument("--rounds-cap", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--n-rounds", type=int, default=1)
    p.add_argument("--validation-size", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("experiment", help="Monte-Carlo sample complexity curves")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--emit-plotdata", metavar="PATH")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("generate", help="write a construction as problem.json")
    p.add_argument("name")
    p.add_argument("--param", action="append", help="key=value, value parsed as JSON")
    p.add_argument("--with-target", action="store_true", help="include a sampled distribution")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except PacInvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
