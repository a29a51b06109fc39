"""Benchmark command line: learn components, build ensembles, evaluate.

Subcommands: learn-extra, ensemble, eval, mi, stats, bench. Reports are
JSON, tables and traces CSV. The data directory comes from --data-dir or
the SPNFOREST_DATA_DIR environment variable. Exit code 0 on success;
failures print a JSON error record to stderr and exit nonzero.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .data import default_data_dir, load_bundle
from .diagnostics import empirical_pairwise_mi, mi_gap, model_pairwise_mi, write_mi_csv
from .em import EmConfig, em_fit
from .ensembles import EnsembleConfig, build_resspn, build_rspf, write_link_audit
from .graph import structure_stats, validate
from .inference import log_likelihood
from .learning import LearnConfig, learn_extra_spn, sample_mu
from .model_io import load_model, save_model


# Published single-tree baselines (edges, layers) for context in structure
# reports; reference values only, never reproduced by this package.
LEARNSPN_REFERENCE_STRUCTURES = {
    "nltcs": {"edges": 7509, "layers": 4},
    "msnbc": {"edges": 22350, "layers": 4},
    "plants": {"edges": 55668, "layers": 6},
    "audio": {"edges": 70036, "layers": 8},
    "jester": {"edges": 36528, "layers": 4},
    "netflix": {"edges": 17742, "layers": 4},
}


def reference_structure_line(dataset):
    ref = LEARNSPN_REFERENCE_STRUCTURES.get((dataset or "").lower())
    if ref is None:
        return None
    return f"LearnSPN/{dataset}: {ref['edges']} edges, {ref['layers']} layers"


def mean_ll(graph, data):
    return float(np.mean(log_likelihood(graph, data)))


def _stats_dict(graph):
    s = structure_stats(graph)
    return {
        "n_nodes": s.n_nodes, "n_edges": s.n_edges, "n_layers": s.n_layers,
        "n_sum": s.n_sum, "n_product": s.n_product, "n_leaf": s.n_leaf,
    }


def _subsample(data, fraction, rng):
    if fraction >= 1.0:
        return data
    n = max(1, int(round(fraction * data.shape[0])))
    idx = rng.choice(data.shape[0], size=n, replace=False)
    return data[np.sort(idx)]


def _write_report(report, out_dir, name="report.json"):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _em_config(args, max_iters=None):
    if max_iters is None:
        max_iters = args.em_max_iters if args.em_max_iters is not None else 1000
    return EmConfig(
        max_iters=max_iters,
        window=args.em_window,
        var_tol=args.em_var_tol,
        leaf_alpha=args.em_leaf_alpha,
        update_leaves=not args.em_freeze_leaves,
    )


def learn_components(bundle, args, seed):
    """Learn n ExtraSPNs with per-component mu drawn from [1, |D|/gamma]."""
    rng = np.random.default_rng(seed)
    train = _subsample(bundle.train, args.subsample_rows, rng)
    components, mus = [], []
    for _ in range(args.n_components):
        mu = sample_mu(train.shape[0], args.gamma, rng)
        cfg = LearnConfig(
            mu=mu, beta=args.beta, gamma=args.gamma, alpha=args.alpha,
            cluster_mode=args.cluster_mode,
        )
        components.append(learn_extra_spn(train, config=cfg, rng=rng))
        mus.append(mu)
    return components, mus, train


def cmd_learn_extra(args):
    bundle = load_bundle(default_data_dir(args.data_dir), args.dataset)
    t0 = time.time()
    components, mus, train = learn_components(bundle, args, args.seed)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    best = None
    for i, comp in enumerate(components):
        report = validate(comp)
        if not report.ok:
            raise RuntimeError(f"component {i} invalid: {report}")
        path = os.path.join(out_dir, f"extraspn_{i:02d}.json")
        save_model(comp, path)
        fitted = comp.copy()
        _, trace = em_fit(fitted, train, _em_config(args))
        row = {
            "component": i,
            "mu": mus[i],
            "model": path,
            "train_ll": mean_ll(fitted, bundle.train),
            "valid_ll": mean_ll(fitted, bundle.valid),
            "test_ll": mean_ll(fitted, bundle.test),
            "em_iterations": len(trace),
            "stats": _stats_dict(comp),
        }
        rows.append(row)
        if best is None or row["test_ll"] > best["test_ll"]:
            best = row
    report = {
        "command": "learn-extra",
        "dataset": args.dataset,
        "config": _echo_config(args),
        "components": rows,
        "best_extraspn_test_ll": best["test_ll"],
        "wall_clock_s": time.time() - t0,
    }
    path = _write_report(report, out_dir)
    print(path)
    return 0


def cmd_ensemble(args):
    bundle = load_bundle(default_data_dir(args.data_dir), args.dataset)
    rng = np.random.default_rng(args.seed)
    train = _subsample(bundle.train, args.subsample_rows, rng)
    t0 = time.time()
    if args.components:
        components = [load_model(p) for p in args.components]
    else:
        components, _, train = learn_components(bundle, args, args.seed)
    if any(c.n_vars != bundle.n_vars for c in components):
        raise ValueError("component universe does not match the dataset")

    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    default_iters = 10 if args.kind == "inforesspn" else None
    em_cfg = _em_config(args, max_iters=args.em_max_iters or default_iters or 1000)

    candidates = []
    if args.kind == "rspf":
        ks = [None]
    else:
        ks = list(args.k)
    for k in ks:
        if args.kind == "rspf":
            model, records, _snapshot = build_rspf(components), [], None
        else:
            cfg = EnsembleConfig(
                n_components=len(components), k=k,
                informed=(args.kind == "inforesspn"), seed=args.seed,
            )
            model, records, _snapshot = build_resspn(components, data=train, config=cfg)
        _, trace = em_fit(model, train, em_cfg)
        candidates.append({
            "k": k,
            "model": model,
            "records": records,
            "trace": trace,
            "train_ll": mean_ll(model, bundle.train),
            "valid_ll": mean_ll(model, bundle.valid),
        })
    # select on validation likelihood, ties broken by smaller k
    best = max(candidates, key=lambda c: (c["valid_ll"], -(c["k"] or 0.0)))
    model = best["model"]
    model_path = os.path.join(out_dir, f"{args.kind}.json")
    save_model(model, model_path)
    trace_path = os.path.join(out_dir, "em_trace.csv")
    best["trace"].write_csv(trace_path)
    audit_path = None
    if best["records"]:
        audit_path = os.path.join(out_dir, "residual_links.csv")
        write_link_audit(best["records"], audit_path)
    report = {
        "command": "ensemble",
        "kind": args.kind,
        "dataset": args.dataset,
        "config": _echo_config(args),
        "selected_k": best["k"],
        "per_k": [
            {"k": c["k"], "train_ll": c["train_ll"], "valid_ll": c["valid_ll"],
             "em_iterations": len(c["trace"]), "stop_reason": c["trace"].stop_reason}
            for c in candidates
        ],
        "train_ll": best["train_ll"],
        "valid_ll": best["valid_ll"],
        "test_ll": mean_ll(model, bundle.test),
        "stats": _stats_dict(model),
        "model": model_path,
        "em_trace": trace_path,
        "residual_link_audit": audit_path,
        "n_links_accepted": sum(1 for r in best["records"] if r.accepted),
        "wall_clock_s": time.time() - t0,
    }
    path = _write_report(report, out_dir)
    print(path)
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    bundle = load_bundle(default_data_dir(args.data_dir), args.dataset)
    split = getattr(bundle, args.split)
    value = mean_ll(model, split)
    print(json.dumps({"model": args.model, "dataset": args.dataset,
                      "split": args.split, "mean_ll": value}))
    return 0


def cmd_mi(args):
    model = load_model(args.model)
    bundle = load_bundle(default_data_dir(args.data_dir), args.dataset)
    emp = empirical_pairwise_mi(bundle.train)
    mod = model_pairwise_mi(model)
    os.makedirs(args.out, exist_ok=True)
    emp_path = os.path.join(args.out, "mi_empirical.csv")
    mod_path = os.path.join(args.out, "mi_model.csv")
    write_mi_csv(emp, emp_path)
    write_mi_csv(mod, mod_path)
    gap = mi_gap(mod, emp)
    print(json.dumps({"empirical": emp_path, "model": mod_path, "gap": gap}))
    return 0


def cmd_stats(args):
    model = load_model(args.model)
    out = _stats_dict(model)
    ref = reference_structure_line(args.dataset)
    if ref is not None:
        out["reference"] = ref
    print(json.dumps(out))
    return 0


def cmd_bench(args):
    """Benchmark sweep: RSPF and ResSPN for each ensemble size."""
    bundle = load_bundle(default_data_dir(args.data_dir), args.dataset)
    rng = np.random.default_rng(args.seed)
    train = _subsample(bundle.train, args.subsample_rows, rng)
    t0 = time.time()
    rows = []
    for n in args.sizes:
        args.n_components = n
        components, mus, _ = learn_components(bundle, args, args.seed + n)
        rspf = build_rspf(components)
        em_cfg = _em_config(args)
        _, rspf_trace = em_fit(rspf, train, em_cfg)
        entry = {
            "n_components": n,
            "mus": mus,
            "rspf": {
                "train_ll": mean_ll(rspf, bundle.train),
                "test_ll": mean_ll(rspf, bundle.test),
                "stats": _stats_dict(rspf),
                "em_iterations": len(rspf_trace),
            },
        }
        best = None
        for k in args.k:
            cfg = EnsembleConfig(n_components=n, k=k, informed=args.informed,
                                 seed=args.seed + n)
            model, records, _ = build_resspn(components, data=train, config=cfg)
            _, trace = em_fit(model, train, em_cfg)
            cand = {
                "k": k,
                "train_ll": mean_ll(model, bundle.train),
                "valid_ll": mean_ll(model, bundle.valid),
                "test_ll": mean_ll(model, bundle.test),
                "stats": _stats_dict(model),
                "em_iterations": len(trace),
                "links_accepted": sum(1 for r in records if r.accepted),
            }
            if best is None or cand["valid_ll"] > best["valid_ll"]:
                best = cand
        entry["resspn" if not args.informed else "inforesspn"] = best
        rows.append(entry)
    report = {
        "command": "bench",
        "dataset": args.dataset,
        "reference": reference_structure_line(args.dataset),
        "subsampled": args.subsample_rows < 1.0,
        "config": _echo_config(args),
        "results": rows,
        "wall_clock_s": time.time() - t0,
    }
    path = _write_report(report, args.out, name="bench.json")
    print(path)
    return 0


def _echo_config(args):
    echo = {k: v for k, v in vars(args).items() if k != "func"}
    echo["version"] = __version__
    return echo


def _add_common(p, with_learn=True):
    p.add_argument("--data-dir", default=None,
                   help="dataset directory (or $SPNFOREST_DATA_DIR, default ./data)")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/out")
    p.add_argument("--subsample-rows", type=float, default=1.0,
                   help="fraction of training rows to keep (desk-scale control)")
    if with_learn:
        p.add_argument("--n-components", type=int, default=10)
        p.add_argument("--beta", type=float, default=0.6)
        p.add_argument("--gamma", type=float, default=5.0)
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--cluster-mode", choices=["random", "kmeans"], default="random")
    p.add_argument("--em-max-iters", type=int, default=None)
    p.add_argument("--em-window", type=int, default=5)
    p.add_argument("--em-var-tol", type=float, default=1e-7)
    p.add_argument("--em-leaf-alpha", type=float, default=0.1)
    p.add_argument("--em-freeze-leaves", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="spnforest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn-extra", help="learn n ExtraSPN components")
    _add_common(p)
    p.set_defaults(func=cmd_learn_extra)

    p = sub.add_parser("ensemble", help="build and train an ensemble model")
    _add_common(p)
    p.add_argument("--kind", choices=["rspf", "resspn", "inforesspn"], default="rspf")
    p.add_argument("--k", type=float, nargs="+", default=[0.1, 0.2],
                   help="residual-link ratio grid; selection by valid LL")
    p.add_argument("--components", nargs="*", default=None,
                   help="paths to serialized component models (default: learn fresh)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("eval", help="mean log-likelihood of a model on a split")
    p.add_argument("model")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", choices=["train", "valid", "test"], default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mi", help="empirical and model MI matrices + gap")
    p.add_argument("model")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default="runs/mi")
    p.set_defaults(func=cmd_mi)

    p = sub.add_parser("stats", help="structure statistics of a model")
    p.add_argument("model")
    p.add_argument("--dataset", default=None,
                   help="include the published single-tree baseline row if known")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="RSPF/ResSPN sweep over ensemble sizes")
    _add_common(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[3, 5, 10])
    p.add_argument("--k", type=float, nargs="+", default=[0.1, 0.2])
    p.add_argument("--informed", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # report failures as machine-readable records
        record = {"error": type(exc).__name__, "message": str(exc),
                  "command": getattr(args, "command", None)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
