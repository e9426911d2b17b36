"""Command-line interface: generate | cluster | sweep | spectrum | eigvec.

Every command with a --seed flag is bit-reproducible: rerunning with the
same inputs produces byte-identical output files (wall-clock timings are
kept out of the deterministic outputs).

Exit codes: 0 ok, 2 bad config or input values, 3 I/O or parse failure,
4 eigensolver failure, 5 pipeline ran but found no detectable structure.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .clustering import ClusterOptions, cluster, embedding_from_fixed_tau
from .config import Policy, load_model_config, load_sweep_config
from .errors import (
    BeyondDetectableRankError,
    ConfigError,
    EdgeListFormatError,
    EmptyGraphError,
    SolverError,
)
from .graph import (
    estimate_c_phi,
    generate_dcsbm,
    load_edge_list,
    load_labels,
    save_edge_list,
    save_labels,
)
from .metrics import overlap
from .operators import find_zeta, informative_eigenvector, reg_laplacian_eigs, spectrum_report
from .sweep import run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4
EXIT_NO_STRUCTURE = 5


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _provenance_header(fh, command, params):
    fh.write(f"# sparsecomm {command}\n")
    fh.write(f"# version={__version__}\n")
    for key, val in params.items():
        fh.write(f"# {key}={val}\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate(args):
    config = load_model_config(args.config)
    graph, truth = generate_dcsbm(config, args.seed)
    save_edge_list(graph, f"{args.out}.edges")
    save_labels(truth.labels, f"{args.out}.labels")
    print(
        f"wrote {args.out}.edges ({graph.n} nodes, {graph.num_edges} edges, "
        f"mean degree {graph.degrees.mean():.3f}) and {args.out}.labels"
    )
    return EXIT_OK


def cmd_cluster(args):
    graph = load_edge_list(args.edge_list)
    if graph.n == 0 or graph.num_edges == 0:
        raise EmptyGraphError("edge list has no edges; nothing to cluster")
    opts = ClusterOptions(seed=args.seed, restarts=args.restarts, route=args.route)
    result = cluster(graph, opts)
    payload = {
        "n": graph.n,
        "k_hat": result.k_hat,
        "no_detectable_structure": result.no_detectable_structure,
        "seed": args.seed,
        "route": args.route,
        "overlap_convention": "permutation-maximized",
        "diagnostics": result.diagnostics,
        "labels": [int(v) for v in result.labels],
    }
    if args.truth:
        truth = load_labels(args.truth)
        if truth.shape[0] != graph.n:
            raise EdgeListFormatError(
                f"truth file has {truth.shape[0]} labels for {graph.n} nodes",
                path=args.truth,
            )
        k_ov = max(int(truth.max()) + 1, result.k_hat, 2)
        report = overlap(result.labels, truth, k_ov, degrees=graph.degrees)
        payload["overlap"] = {
            "overlap": report.overlap,
            "overlap_identity": report.overlap_identity,
            "overlap_positive_degree": report.overlap_positive_degree,
            "best_permutation": list(report.best_permutation),
            "k": k_ov,
        }
    text = json.dumps(payload, indent=2, allow_nan=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_NO_STRUCTURE if result.no_detectable_structure else EXIT_OK


def cmd_sweep(args):
    cfg = load_sweep_config(args.config)
    records = run_sweep(cfg, base_seed=args.seed, workers=args.workers, out_path=args.out)
    failures = sum(1 for r in records if r.error)
    print(f"wrote {args.out}: {len(records)} records, {failures} errors")
    return EXIT_OK


def cmd_spectrum(args):
    graph = load_edge_list(args.edge_list)
    if graph.n == 0 or graph.num_edges == 0:
        raise EmptyGraphError("edge list has no edges")
    count = min(args.count, graph.n)
    values = spectrum_report(
        graph, args.tau, count, scale_by_r=args.scale_by_r, seed=args.seed
    )
    with open(args.out, "w", newline="") as fh:
        _provenance_header(
            fh, "spectrum",
            {
                "edge_list": args.edge_list,
                "n": graph.n,
                "tau": _fmt(float(args.tau)),
                "count": count,
                "scale_by_r": args.scale_by_r,
                "seed": args.seed,
            },
        )
        writer = csv.writer(fh)
        writer.writerow(["rank", "eigenvalue"])
        for rank, val in enumerate(values, start=1):
            writer.writerow([rank, _fmt(float(val))])
    print(f"wrote {args.out}: {count} eigenvalues")
    return EXIT_OK


def _eigvec_for_policy(graph, policy, p, seed):
    """Returns (entries, tau_value, zeta_or_nan)."""
    nan = float("nan")
    if policy.kind in ("fixed", "c_phi_minus_one"):
        tau = policy.tau if policy.kind == "fixed" else estimate_c_phi(graph) - 1.0
        pairs = reg_laplacian_eigs(graph, tau, p, seed=seed)
        return pairs.vectors[:, p - 1], tau, nan
    c_phi_hat = estimate_c_phi(graph)
    zres = find_zeta(graph, p, c_phi_hat, seed=seed)
    tau = zres.zeta**2 - 1.0
    if policy.kind == "zeta_adaptive":
        pairs = reg_laplacian_eigs(graph, tau, p, seed=seed)
        return pairs.vectors[:, p - 1], tau, zres.zeta
    info = informative_eigenvector(graph, p, zres.zeta, seed=seed)
    return info.vector, tau, zres.zeta


def cmd_eigvec(args):
    graph = load_edge_list(args.edge_list)
    if graph.n == 0 or graph.num_edges == 0:
        raise EmptyGraphError("edge list has no edges")
    policy = Policy.parse(args.policy)
    truth = None
    if args.truth:
        truth = load_labels(args.truth)
        if truth.shape[0] != graph.n:
            raise EdgeListFormatError(
                f"truth file has {truth.shape[0]} labels for {graph.n} nodes",
                path=args.truth,
            )
    entries, tau, zeta = _eigvec_for_policy(graph, policy, args.p, args.seed)
    with open(args.out, "w", newline="") as fh:
        _provenance_header(
            fh, "eigvec",
            {
                "edge_list": args.edge_list,
                "n": graph.n,
                "p": args.p,
                "policy": str(policy),
                "tau_value": _fmt(float(tau)),
                "zeta": _fmt(float(zeta)),
                "seed": args.seed,
            },
        )
        writer = csv.writer(fh)
        header = ["node", "degree", "entry"]
        if truth is not None:
            header.append("true_label")
        writer.writerow(header)
        for i in range(graph.n):
            row = [i, int(graph.degrees[i]), _fmt(float(entries[i]))]
            if truth is not None:
                row.append(int(truth[i]))
            writer.writerow(row)
    print(f"wrote {args.out}: {graph.n} rows")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparsecomm",
        description="Spectral community detection on sparse graphs with "
        "difficulty-adapted regularization",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a graph from a model config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix (.edges/.labels)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", help="run the full detection pipeline")
    p.add_argument("edge_list")
    p.add_argument("--truth", help="ground-truth labels file; adds overlap to output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument(
        "--route", choices=("bethe_hessian", "laplacian"), default="bethe_hessian",
        help="which operator's eigenvectors form the embedding",
    )
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="run a benchmark grid from a sweep config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="dump leading Laplacian eigenvalues")
    p.add_argument("edge_list")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--scale-by-r", action="store_true", dest="scale_by_r",
                   help="report sqrt(tau+1) * eigenvalues")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("eigvec", help="dump one informative eigenvector per node")
    p.add_argument("edge_list")
    p.add_argument("--p", type=int, default=2, help="eigenvector rank (default 2)")
    p.add_argument("--policy", default="zeta_adaptive",
                   help="zeta_adaptive | bethe_hessian_direct | c_phi_minus_one | fixed:<tau>")
    p.add_argument("--truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eigvec)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EmptyGraphError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EdgeListFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverError, BeyondDetectableRankError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
