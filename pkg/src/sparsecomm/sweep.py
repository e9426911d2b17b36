"""Benchmark harness: run the detection pipeline over a (c_in, c_out) grid
under several regularization policies, collecting one record per
(sweep point x policy x seed).

Each trial (one generated graph) is an independent task with its own RNG
stream derived from the base seed and the trial index, so results do not
depend on worker scheduling. Rows are appended to a crash-safe partial file
as trials complete and rewritten sorted (with a summary block) at the end;
per-row runtimes go to a separate timing sidecar so the main CSV is
byte-reproducible.
"""

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, fields

import numpy as np

from . import __version__ as _version
from .clustering import build_embedding, embedding_from_fixed_tau, kmeans
from .errors import BeyondDetectableRankError
from .graph import estimate_c_phi, generate_dcsbm
from .metrics import detectability, gap_profile, overlap
from .operators import bethe_hessian_smallest, estimate_k, find_zeta, reg_laplacian_eigs

__all__ = ["TrialRecord", "run_sweep", "write_sweep_csv", "CSV_COLUMNS"]


@dataclass
class TrialRecord:
    """One sweep observation: a policy evaluated on one generated graph."""

    point_index: int
    policy_index: int
    seed_index: int
    c_in: float
    c_out: float
    seed: int
    alpha: float
    alpha_c: float
    tau_policy: str
    tau_value: float
    overlap: float
    overlap_d_pos: float
    k_hat: int
    gap: float
    zeta_2: float
    note: str = ""
    error: str = ""
    runtime_ms: float = 0.0


CSV_COLUMNS = (
    "c_in", "c_out", "seed", "alpha", "alpha_c", "tau_policy", "tau_value",
    "overlap", "overlap_d_pos", "k_hat", "gap", "zeta_2", "note", "error",
)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _policy_embedding(graph, cfg, policy, k_hat, c_phi_hat, zeta_cache):
    """Build the policy's embedding. Returns (matrix, k_used, tau_value, gap, note)."""
    nan = float("nan")

    def zeta(p):
        if p not in zeta_cache:
            zeta_cache[p] = find_zeta(
                graph, p, c_phi_hat, r_tol=cfg.zeta_rtol, eig_tol=cfg.eig_tol
            ).zeta
        return zeta_cache[p]

    if policy.kind in ("fixed", "c_phi_minus_one"):
        tau = policy.tau if policy.kind == "fixed" else c_phi_hat - 1.0
        emb, values = embedding_from_fixed_tau(graph, k_hat, tau, eig_tol=cfg.eig_tol)
        gap = gap_profile(values, k_hat).gap if values.shape[0] >= k_hat + 4 else nan
        return emb.data, k_hat, tau, gap, ""

    # adaptive policies need the zero crossings; shrink on a missing one
    cols = []
    gap = nan
    k_used = k_hat
    note = ""
    for p in range(2, k_hat + 1):
        try:
            z = zeta(p)
        except BeyondDetectableRankError:
            k_used = p - 1
            note = f"k_shrunk_to_{k_used}"
            break
        if policy.kind == "zeta_adaptive":
            tau_p = z * z - 1.0
            count = min(graph.n, k_hat + 4) if p == k_hat else p
            pairs = reg_laplacian_eigs(graph, tau_p, count, tol=cfg.eig_tol)
            cols.append(pairs.vectors[:, p - 1])
            if p == k_hat and count >= k_hat + 4:
                gap = gap_profile(pairs.values, k_hat).gap
        else:  # bethe_hessian_direct
            count = min(graph.n, k_hat + 4) if p == k_hat else p
            pairs = bethe_hessian_smallest(graph, z, count, tol=cfg.eig_tol)
            cols.append(pairs.vectors[:, p - 1])
            if p == k_hat and count >= k_hat + 4:
                # isolation gap of the smallest end of H
                gap = float(pairs.values[k_hat] - pairs.values[k_hat - 1])
    if not cols:
        return None, k_used, nan, nan, note or "no_detectable_structure"
    tau_value = zeta_cache[2] ** 2 - 1.0
    return np.column_stack(cols), len(cols) + 1, tau_value, gap, note


def run_trial(cfg, base_seed, point_index, seed_index):
    """Evaluate every policy on one generated graph. Returns TrialRecords."""
    nan = float("nan")
    c_in = cfg.c_in_values[point_index]
    c_out = cfg.c_out(c_in)
    state = np.random.SeedSequence(
        (base_seed, point_index, seed_index)
    ).generate_state(1 + len(cfg.policies), dtype=np.uint64)
    graph_seed = int(state[0])

    graph, truth = generate_dcsbm(cfg.point_config(c_in), graph_seed)
    det = detectability(c_in, c_out, cfg.c, truth.phi)
    base = dict(
        point_index=point_index,
        seed_index=seed_index,
        c_in=c_in,
        c_out=c_out,
        seed=seed_index,
        alpha=det.alpha,
        alpha_c=det.alpha_c,
    )

    records = []
    zeta_cache = {}
    try:
        c_phi_hat = estimate_c_phi(graph)
        k_hat = estimate_k(graph, c_phi_hat)
        prep_error = None
    except Exception as exc:  # pragma: no cover - defensive
        prep_error = f"{type(exc).__name__}: {exc}"
        k_hat = 0

    for pol_idx, policy in enumerate(cfg.policies):
        t0 = time.perf_counter()
        rec = TrialRecord(
            policy_index=pol_idx,
            tau_policy=str(policy),
            tau_value=nan,
            overlap=nan,
            overlap_d_pos=nan,
            k_hat=k_hat,
            gap=nan,
            zeta_2=nan,
            **base,
        )
        try:
            if prep_error is not None:
                rec.error = prep_error
            else:
                if k_hat < 2:
                    labels = np.zeros(graph.n, dtype=np.int64)
                    rec.note = "no_detectable_structure"
                    if policy.kind == "fixed":
                        rec.tau_value = policy.tau
                    elif policy.kind == "c_phi_minus_one":
                        rec.tau_value = c_phi_hat - 1.0
                else:
                    emb, k_used, tau_value, gap, note = _policy_embedding(
                        graph, cfg, policy, k_hat, c_phi_hat, zeta_cache
                    )
                    rec.tau_value = tau_value
                    rec.gap = gap
                    rec.note = note
                    if emb is None or k_used < 2:
                        labels = np.zeros(graph.n, dtype=np.int64)
                    else:
                        labels = kmeans(
                            emb, k_used,
                            restarts=cfg.kmeans_restarts,
                            seed=int(state[1 + pol_idx]),
                        )
                k_ov = max(cfg.k, int(labels.max()) + 1, 2)
                report = overlap(labels, truth.labels, k_ov, degrees=graph.degrees)
                rec.overlap = report.overlap
                rec.overlap_d_pos = report.overlap_positive_degree
                if 2 in zeta_cache:
                    rec.zeta_2 = zeta_cache[2]
        except Exception as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
        rec.runtime_ms = (time.perf_counter() - t0) * 1000.0
        records.append(rec)
    return records


def _summary_lines(records):
    lines = []
    seen = []
    for rec in records:
        key = (rec.point_index, rec.policy_index)
        if key not in seen:
            seen.append(key)
    for point_index, policy_index in sorted(seen):
        group = [
            r for r in records
            if r.point_index == point_index and r.policy_index == policy_index
            and not r.error and not math.isnan(r.overlap)
        ]
        if not group:
            continue
        ref = group[0]
        ov = np.array([r.overlap for r in group])
        ovd = np.array([r.overlap_d_pos for r in group])
        sd = ov.std(ddof=1) if len(group) > 1 else 0.0
        sdd = ovd.std(ddof=1) if len(group) > 1 else 0.0
        lines.append(
            f"# summary c_in={_fmt(ref.c_in)} policy={ref.tau_policy} trials={len(group)}"
            f" overlap_mean={_fmt(float(ov.mean()))} overlap_sd={_fmt(float(sd))}"
            f" overlap_d_pos_mean={_fmt(float(ovd.mean()))} overlap_d_pos_sd={_fmt(float(sdd))}"
        )
    return lines


def _header_lines(cfg, base_seed):
    lines = [
        "# sparsecomm sweep",
        f"# version={_version}",
        f"# base_seed={base_seed}",
    ]
    for key, val in cfg.provenance().items():
        lines.append(f"# {key}={val}")
    lines.append("# overlap=permutation-maximized, all nodes; overlap_d_pos=degree>0 nodes only")
    lines.append("# rows sorted by (c_in position, policy position, seed); timings in sidecar .timing.csv")
    return lines


def _row(rec):
    return [_fmt(getattr(rec, col)) for col in CSV_COLUMNS]


def write_sweep_csv(records, cfg, base_seed, out_path):
    """Write the final sorted CSV (header, rows, summary block)."""
    records = sorted(records, key=lambda r: (r.point_index, r.policy_index, r.seed_index))
    tmp = f"{out_path}.tmp"
    with open(tmp, "w", newline="") as fh:
        for line in _header_lines(cfg, base_seed):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(_row(rec))
        for line in _summary_lines(records):
            fh.write(line + "\n")
    os.replace(tmp, out_path)


def _write_timing(records, out_path):
    records = sorted(records, key=lambda r: (r.point_index, r.policy_index, r.seed_index))
    with open(f"{out_path}.timing.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["c_in", "tau_policy", "seed", "runtime_ms"])
        for rec in records:
            writer.writerow([_fmt(rec.c_in), rec.tau_policy, rec.seed, f"{rec.runtime_ms:.3f}"])


def run_sweep(cfg, base_seed=0, workers=1, out_path=None):
    """Execute the full grid. Returns all TrialRecords (sorted).

    With out_path, rows are appended to `<out_path>.partial` as trials finish
    (crash-safe), and the final sorted CSV plus a `.timing.csv` sidecar are
    written at the end.
    """
    tasks = [
        (point_index, seed_index)
        for point_index in range(len(cfg.c_in_values))
        for seed_index in range(cfg.seeds)
    ]
    partial_path = f"{out_path}.partial" if out_path else None
    partial = open(partial_path, "w", newline="") if partial_path else None
    if partial:
        writer = csv.writer(partial)
        writer.writerow(CSV_COLUMNS)
        partial.flush()

    def consume(trial_records, bucket):
        bucket.extend(trial_records)
        if partial:
            w = csv.writer(partial)
            for rec in trial_records:
                w.writerow(_row(rec))
            partial.flush()

    records = []
    try:
        if workers <= 1:
            for point_index, seed_index in tasks:
                consume(run_trial(cfg, base_seed, point_index, seed_index), records)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(run_trial, cfg, base_seed, point_index, seed_index)
                    for point_index, seed_index in tasks
                ]
                for fut in as_completed(futures):
                    consume(fut.result(), records)
    finally:
        if partial:
            partial.close()

    records.sort(key=lambda r: (r.point_index, r.policy_index, r.seed_index))
    if out_path:
        write_sweep_csv(records, cfg, base_seed, out_path)
        _write_timing(records, out_path)
        os.remove(partial_path)
    return records
