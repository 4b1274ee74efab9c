"""Command-line front end: single points, parallel sweeps, and data export.

Sweeps execute (parameter point x sample) tasks on a process pool with one
writer appending JSON-lines records incrementally, so an interrupted run can
be resumed without losing finished samples.  Per-point seeds derive from the
global seed and the grid indices, which keeps every task reproducible under
any scheduling and makes grid edits leave unrelated tasks untouched.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import INF_REPLICA, ProtocolParams, couplings_from
from .estimators import (
    LN2,
    Renyi2Result,
    SampleRecord,
    decode_active,
    entropy_from_kappa,
    jackknife_mean,
    kappa_from_correlators,
    record_from_ancestral,
    record_from_outcome,
    renyi2_from_replica,
)
from .lattice import build_planar_code, lattice_dump
from .oracle import coherent_info_exact, enumerate_outcomes, prepare_logical_bell
from .sampler import AncestralSampler, derive_point_seed, sample_nishimori
from .scaling import CollapseResult, ScalingDataset, collapse, find_crossing
from .tn import build_gates, contract

RECORDS_SCHEMA = 1
SEED_RULE = "point_seed = SeedSequence((seed, d, t_idx, theta_idx)); streams keyed (point_seed, sample_idx)"


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# config handling


def _load_toml(path: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _as_grid(value, field):
    if isinstance(value, dict):
        for key in ("start", "stop", "num"):
            if key not in value:
                raise ConfigError(f"{field}: range table needs start/stop/num")
        return [float(x) for x in np.linspace(value["start"], value["stop"], int(value["num"]))]
    if isinstance(value, (list, tuple)):
        return [float(x) for x in value]
    raise ConfigError(f"{field}: expected list or start/stop/num table")


def parse_sweep_config(cfg: dict) -> dict:
    grid = cfg.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("grid: missing [grid] table")
    run = cfg.get("run")
    if not isinstance(run, dict):
        raise ConfigError("run: missing [run] table")
    out = {}
    out["t_over_pi"] = _as_grid(grid.get("t_over_pi", []), "grid.t_over_pi")
    if not out["t_over_pi"]:
        raise ConfigError("grid.t_over_pi: empty grid")
    for t in out["t_over_pi"]:
        if not 0.0 <= t <= 0.25:
            raise ConfigError(f"grid.t_over_pi: value {t} outside [0, 0.25]")
    out["theta_over_pi"] = _as_grid(grid.get("theta_over_pi", [0.0]), "grid.theta_over_pi")
    for th in out["theta_over_pi"]:
        if not 0.0 <= th <= 0.5:
            raise ConfigError(f"grid.theta_over_pi: value {th} outside [0, 0.5]")
    ds = grid.get("d", [])
    if not isinstance(ds, list) or not ds:
        raise ConfigError("grid.d: empty distance list")
    for d in ds:
        if int(d) < 2:
            raise ConfigError(f"grid.d: distance {d} < 2")
    out["d"] = [int(d) for d in ds]
    reps = grid.get("n_replica", [1])
    out["n_replica"] = []
    for n in reps:
        if n in (1, 2):
            out["n_replica"].append(int(n))
        elif n in ("inf", math.inf):
            out["n_replica"].append(INF_REPLICA)
        else:
            raise ConfigError(f"grid.n_replica: {n!r} not in {{1, 2, 'inf'}}")
    out["samples"] = int(run.get("samples", 0))
    if 1 in out["n_replica"] and out["samples"] < 1:
        raise ConfigError("run.samples: need >= 1 for Born sampling")
    out["seed"] = int(run.get("seed", 0))
    out["chi_max"] = int(run.get("chi_max", 256))
    if out["chi_max"] < 2:
        raise ConfigError("run.chi_max: must be >= 2")
    out["svd_cutoff"] = float(run.get("svd_cutoff", 1e-10))
    if not 0.0 <= out["svd_cutoff"] < 1.0:
        raise ConfigError("run.svd_cutoff: must be in [0, 1)")
    out["workers"] = int(run.get("workers", 0)) or None
    out["out_dir"] = str(run.get("out_dir", "sweep_out"))
    out["chunk"] = int(run.get("chunk", 25))
    return out


def resolve_workers(requested=None) -> int:
    env = os.environ.get("TELECODE_WORKERS")
    if env:
        return max(1, int(env))
    if requested:
        return max(1, int(requested))
    return max(1, os.cpu_count() or 1)


# --------------------------------------------------------------------------
# sweep execution


def _worker_init():
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except Exception:
        pass


_LATTICES = {}


def _lattice(d: int):
    if d not in _LATTICES:
        _LATTICES[d] = build_planar_code(d)
    return _LATTICES[d]


_SAMPLERS = {}


def _ancestral(d, t_over_pi, theta_over_pi, chi_max, svd_cutoff):
    key = (d, t_over_pi, theta_over_pi, chi_max, svd_cutoff)
    if key not in _SAMPLERS:
        _SAMPLERS.clear()  # one cached sampler per worker is enough
        _SAMPLERS[key] = AncestralSampler(
            _lattice(d), t_over_pi * math.pi, theta_over_pi * math.pi,
            chi_max, svd_cutoff)
    return _SAMPLERS[key]


def run_task(task: dict) -> list:
    """Execute one sweep task; returns record dicts."""
    _worker_init()
    d = task["d"]
    lat = _lattice(d)
    params = ProtocolParams(
        t_over_pi=task["t_over_pi"], theta_over_pi=task["theta_over_pi"], d=d,
        n_replica=task["n_replica"], seed=task["point_seed"],
        chi_max=task["chi_max"], svd_cutoff=task["svd_cutoff"])
    out = []
    if task["n_replica"] == 1:
        use_iid = params.theta_over_pi in (0.0, 0.5)
        if use_iid:
            cache = {}
            c = couplings_from(params.t, params.theta)
            for k in task["sample_indices"]:
                oc = sample_nishimori(lat, params.t, params.theta,
                                      task["point_seed"], k)
                out.append(record_from_outcome(lat, params, oc, couplings=c,
                                               gate_cache=cache))
        else:
            samp = _ancestral(d, params.t_over_pi, params.theta_over_pi,
                              params.chi_max, params.svd_cutoff)
            for k in task["sample_indices"]:
                out.append(record_from_ancestral(samp, params, task["point_seed"], k))
    elif task["n_replica"] == 2:
        t0 = time.perf_counter()
        res = renyi2_from_replica(lat, params)
        out.append(SampleRecord(
            t_over_pi=params.t_over_pi, theta_over_pi=params.theta_over_pi, d=d,
            n_replica=2, seed_path=(task["point_seed"], 0),
            kappa_x=res.kappa_sq, kappa_z=0.0, entropy=res.i_c2, log_p=math.nan,
            chi_used=params.chi_max, discarded_weight=0.0,
            wall_time=time.perf_counter() - t0))
    else:  # forced all-plus
        t0 = time.perf_counter()
        c = couplings_from(params.t, params.theta)
        gates = build_gates(lat, c, n_replica=INF_REPLICA)
        corr, bs = contract(lat, gates, params.chi_max, params.svd_cutoff)
        kx, kz = kappa_from_correlators(corr["czz"], corr["cxx"])
        out.append(SampleRecord(
            t_over_pi=params.t_over_pi, theta_over_pi=params.theta_over_pi, d=d,
            n_replica=INF_REPLICA, seed_path=(task["point_seed"], 0),
            kappa_x=kx, kappa_z=kz, entropy=entropy_from_kappa(kx, kz),
            log_p=math.nan, chi_used=bs.chi_used,
            discarded_weight=bs.cum_discarded_weight,
            wall_time=time.perf_counter() - t0))
    return [r.to_json_dict() for r in out]


def _record_key(rec: dict):
    return (rec["d"], rec["t_over_pi"], rec["theta_over_pi"], str(rec["n_replica"]),
            tuple(rec["seed_path"]))


def build_tasks(cfg: dict, done_keys=frozenset()) -> list:
    tasks = []
    for d in cfg["d"]:
        for ti, t in enumerate(cfg["t_over_pi"]):
            for hi, th in enumerate(cfg["theta_over_pi"]):
                for n in cfg["n_replica"]:
                    pseed = derive_point_seed(cfg["seed"], d, ti, hi)
                    if n == 1:
                        pending = [
                            k for k in range(cfg["samples"])
                            if (d, t, th, "1", (pseed, k)) not in done_keys
                        ]
                        for lo in range(0, len(pending), cfg["chunk"]):
                            tasks.append({
                                "d": d, "t_over_pi": t, "theta_over_pi": th,
                                "n_replica": 1, "point_seed": pseed,
                                "chi_max": cfg["chi_max"],
                                "svd_cutoff": cfg["svd_cutoff"],
                                "sample_indices": pending[lo:lo + cfg["chunk"]],
                            })
                    else:
                        tag = "inf" if math.isinf(n) else str(n)
                        if (d, t, th, tag, (pseed, 0)) in done_keys:
                            continue
                        tasks.append({
                            "d": d, "t_over_pi": t, "theta_over_pi": th,
                            "n_replica": n, "point_seed": pseed,
                            "chi_max": cfg["chi_max"],
                            "svd_cutoff": cfg["svd_cutoff"],
                        })
    return tasks


def load_records(path: str) -> list:
    """Read a records file, validating the schema header."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "_schema" in rec:
                major = int(str(rec["_schema"]).split(".")[0])
                if major > RECORDS_SCHEMA:
                    raise ValueError(f"records schema {rec['_schema']} too new")
                continue
            out.append(rec)
    return out


def aggregate_records(records: list) -> list:
    """Deterministic aggregate rows per (d, t, theta, n_replica)."""
    groups = {}
    for rec in records:
        key = (rec["d"], rec["t_over_pi"], rec["theta_over_pi"], str(rec["n_replica"]))
        groups.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        recs = sorted(groups[key], key=lambda r: tuple(r["seed_path"]))
        vals = [r["entropy"] for r in recs]
        if len(vals) == 1:
            mean, se = vals[0], 0.0
        else:
            mean, se = jackknife_mean(vals)
        rows.append({
            "d": key[0], "t_over_pi": key[1], "theta_over_pi": key[2],
            "n_replica": key[3], "mean": mean, "se": se, "n_samples": len(vals),
        })
    return rows


def write_aggregate_csv(rows: list, path: str):
    cols = ["d", "t_over_pi", "theta_over_pi", "n_replica", "mean", "se", "n_samples"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([
                r["d"], repr(float(r["t_over_pi"])), repr(float(r["theta_over_pi"])),
                r["n_replica"], repr(float(r["mean"])), repr(float(r["se"])),
                r["n_samples"],
            ])


def run_sweep(config_path: str, resume: bool = False, workers: int = None,
              quiet: bool = False) -> int:
    try:
        cfg = parse_sweep_config(_load_toml(config_path))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    workers = resolve_workers(workers or cfg["workers"])
    os.makedirs(cfg["out_dir"], exist_ok=True)
    records_path = os.path.join(cfg["out_dir"], "records.jsonl")
    agg_path = os.path.join(cfg["out_dir"], "aggregate.csv")
    manifest_path = os.path.join(cfg["out_dir"], "manifest.json")

    done = set()
    existing = []
    if resume and os.path.exists(records_path):
        existing = load_records(records_path)
        done = {_record_key(r) for r in existing}
    tasks = build_tasks(cfg, done)
    started = time.time()
    failures = []
    mode = "a" if (resume and existing) else "w"
    with open(records_path, mode) as fh:
        if mode == "w":
            fh.write(json.dumps({"_schema": RECORDS_SCHEMA}) + "\n")
        if workers == 1:
            for task in tasks:
                try:
                    for rec in run_task(task):
                        fh.write(json.dumps(rec) + "\n")
                    fh.flush()
                except Exception as exc:  # noqa: BLE001 - record and continue
                    failures.append({"task": _task_id(task), "error": str(exc)})
        else:
            with ProcessPoolExecutor(max_workers=workers,
                                     initializer=_worker_init) as pool:
                futs = {pool.submit(run_task, t): t for t in tasks}
                for fut in as_completed(futs):
                    task = futs[fut]
                    try:
                        for rec in fut.result():
                            fh.write(json.dumps(rec) + "\n")
                        fh.flush()
                    except Exception as exc:  # noqa: BLE001
                        failures.append({"task": _task_id(task), "error": str(exc)})
    records = load_records(records_path)
    rows = aggregate_records(records)
    write_aggregate_csv(rows, agg_path)
    manifest = {
        "tool": "telecode",
        "version": __version__,
        "records_schema": RECORDS_SCHEMA,
        "config": cfg,
        "config_path": os.path.abspath(config_path),
        "seed_rule": SEED_RULE,
        "outputs": {"records": records_path, "aggregate": agg_path},
        "workers": workers,
        "started_at": started,
        "finished_at": time.time(),
        "n_records": len(records),
        "failures": failures,
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    if not quiet:
        print(f"{len(records)} records -> {agg_path} "
              f"({len(failures)} failed tasks, {workers} workers)")
    return 1 if failures else 0


def _task_id(task: dict):
    return {k: v for k, v in task.items() if k != "sample_indices"}


def aggregate_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# --------------------------------------------------------------------------
# exports


def export_plotdata(records: list, kind: str, out_dir: str) -> list:
    """Write tidy CSV files for external plotting; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    rows = aggregate_records(records)
    paths = []
    if kind == "curves":
        path = os.path.join(out_dir, "curves.csv")
        write_aggregate_csv(rows, path)
        paths.append(path)
    elif kind == "collapse":
        groups = {}
        for r in rows:
            groups.setdefault((r["theta_over_pi"], r["n_replica"]), []).append(r)
        for (th, n), grp in sorted(groups.items()):
            path = os.path.join(out_dir, f"collapse_theta{th}_n{n}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["d", "t_over_pi", "mean", "se"])
                for r in grp:
                    w.writerow([r["d"], repr(float(r["t_over_pi"])),
                                repr(float(r["mean"])), repr(float(r["se"]))])
            paths.append(path)
    elif kind == "phase_diagram":
        path = os.path.join(out_dir, "phase_diagram.csv")
        groups = {}
        for r in rows:
            groups.setdefault((r["theta_over_pi"], r["n_replica"]), []).append(r)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta_over_pi", "n_replica", "t_c", "t_c_err"])
            for (th, n), grp in sorted(groups.items()):
                if len({g["d"] for g in grp}) < 2:
                    continue
                try:
                    ds = ScalingDataset.from_rows(grp)
                except ValueError:
                    continue
                cross = find_crossing(ds)
                if not cross.found:
                    continue
                spread = (np.std([c[2] for c in cross.pair_crossings])
                          if len(cross.pair_crossings) > 1 else 0.0)
                w.writerow([repr(float(th)), n, repr(float(cross.t_cross)),
                            repr(float(spread))])
        paths.append(path)
    else:
        raise ValueError(f"unknown export kind {kind!r}")
    return paths


# --------------------------------------------------------------------------
# subcommands


def _cmd_lattice(args) -> int:
    lat = build_planar_code(args.d)
    if args.dump:
        print(lattice_dump(lat))
    else:
        print(f"d={lat.d} qubits={lat.n_qubits} spins={lat.n_spins} "
              f"slice_width={lat.slice_width}")
    return 0


def _cmd_oracle(args) -> int:
    n = INF_REPLICA if args.n == "inf" else int(args.n)
    state = prepare_logical_bell(args.d)
    outcomes = enumerate_outcomes(state, args.t * math.pi, args.theta * math.pi,
                                  args.phi * math.pi)
    ic = coherent_info_exact(outcomes, n)
    print(f"I_c(n={args.n}) = {ic!r} nats = {ic / LN2!r} bits")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps({"_schema": RECORDS_SCHEMA}) + "\n")
            for r in outcomes:
                fh.write(json.dumps({
                    "outcomes": r.outcomes.tolist(), "p": r.p,
                    "kappa": list(r.kappa), "entropy": r.entropy(),
                }) + "\n")
        print(f"wrote {len(outcomes)} outcome rows -> {args.out}")
    return 0


def _cmd_sample(args) -> int:
    _worker_init()
    lat = build_planar_code(args.d)
    params = ProtocolParams(t_over_pi=args.t, theta_over_pi=args.theta, d=args.d,
                            seed=args.seed, chi_max=args.chi_max,
                            svd_cutoff=args.svd_cutoff)
    use_iid = args.theta in (0.0, 0.5)
    recs = []
    if use_iid:
        c = couplings_from(params.t, params.theta)
        cache = {}
        for k in range(args.n_samples):
            oc = sample_nishimori(lat, params.t, params.theta, args.seed, k)
            recs.append(record_from_outcome(lat, params, oc, couplings=c,
                                            gate_cache=cache))
    else:
        samp = AncestralSampler(lat, params.t, params.theta, args.chi_max,
                                args.svd_cutoff)
        for k in range(args.n_samples):
            recs.append(record_from_ancestral(samp, params, args.seed, k))
    with open(args.out, "w") as fh:
        fh.write(json.dumps({"_schema": RECORDS_SCHEMA}) + "\n")
        for r in recs:
            fh.write(json.dumps(r.to_json_dict()) + "\n")
    mean, se = jackknife_mean([r.entropy for r in recs])
    print(f"{len(recs)} samples -> {args.out}; I_c = {mean:.6f} +- {se:.6f} nats")
    return 0


def _cmd_sweep(args) -> int:
    return run_sweep(args.config, resume=args.resume, workers=args.workers)


def _cmd_renyi2(args) -> int:
    _worker_init()
    lat = build_planar_code(args.d)
    params = ProtocolParams(t_over_pi=args.t, theta_over_pi=args.theta, d=args.d,
                            n_replica=2, chi_max=args.chi_max,
                            svd_cutoff=args.svd_cutoff)
    res = renyi2_from_replica(lat, params)
    print(json.dumps({"d": args.d, "t_over_pi": args.t, "theta_over_pi": args.theta,
                      "i_c2_nats": res.i_c2, "kappa_sq": res.kappa_sq}))
    return 0


def _cmd_decode(args) -> int:
    _worker_init()
    lat = build_planar_code(args.d)
    params = ProtocolParams(t_over_pi=args.t, theta_over_pi=args.theta, d=args.d,
                            seed=args.seed, chi_max=args.chi_max,
                            svd_cutoff=args.svd_cutoff)
    if args.theta in (0.0, 0.5):
        oc = sample_nishimori(lat, params.t, params.theta, args.seed,
                              args.sample_index)
    else:
        samp = AncestralSampler(lat, params.t, params.theta, args.chi_max,
                                args.svd_cutoff)
        oc, _ = samp.sample(args.seed, args.sample_index)
    res = decode_active(lat, params, oc)
    print(json.dumps({
        "kappa_x": res.kappa_x, "kappa_z": res.kappa_z,
        "z_flip": bool(res.z_flip), "status": res.status,
        "bell_fidelity": res.bell_fidelity(),
        "outcomes": oc.values.tolist(),
    }))
    return 0


def _cmd_collapse(args) -> int:
    rows = []
    with open(args.infile) as fh:
        for row in csv.DictReader(fh):
            rows.append({"d": int(row["d"]), "t_over_pi": float(row["t_over_pi"]),
                         "mean": float(row["mean"]), "se": float(row["se"])})
    ds = ScalingDataset.from_rows(rows)
    res = collapse(ds, args.tc0, args.nu0, n_bootstrap=args.bootstrap,
                   seed=args.seed)
    print(json.dumps({
        "t_c_over_pi": res.t_c_over_pi, "t_c_err": res.t_c_err,
        "nu": res.nu, "nu_err": res.nu_err,
        "quality_chi2red": res.quality, "converged": res.converged,
    }, indent=2))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["d", "x_scaling", "mean", "se"])
            for d, t, m, se in ds.points:
                x = (t - res.t_c_over_pi) * d ** (1.0 / res.nu)
                w.writerow([d, repr(x), repr(m), repr(se)])
        print(f"collapse-transformed data -> {args.out}")
    return 0


def _cmd_export(args) -> int:
    records = load_records(args.records)
    try:
        paths = export_plotdata(records, args.kind, args.out_dir)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="telecode",
        description="Teleportation-threshold simulator for the planar code "
                    "under weak Bell measurements.  All angle flags are in "
                    "units of pi (e.g. --t 0.143 means t = 0.143*pi).")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("lattice", help="inspect the code lattice")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--dump", action="store_true", help="print site/bond tables")
    p.set_defaults(fn=_cmd_lattice)

    p = sub.add_parser("oracle", help="dense small-d reference enumeration")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--n", choices=["1", "2", "inf"], default="1")
    p.add_argument("--out", help="write the per-outcome table as JSON lines")
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("sample", help="draw Born samples at one point")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--n-samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chi-max", type=int, default=256)
    p.add_argument("--svd-cutoff", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("sweep", help="run a gridded sweep from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--workers", type=int)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("renyi2", help="deterministic 2-replica contraction")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--chi-max", type=int, default=256)
    p.add_argument("--svd-cutoff", type=float, default=1e-10)
    p.set_defaults(fn=_cmd_renyi2)

    p = sub.add_parser("decode", help="sample one outcome and decode it")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-index", type=int, default=0)
    p.add_argument("--chi-max", type=int, default=256)
    p.add_argument("--svd-cutoff", type=float, default=1e-10)
    p.set_defaults(fn=_cmd_decode)

    p = sub.add_parser("collapse", help="finite-size-scaling collapse of a CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tc0", type=float, required=True)
    p.add_argument("--nu0", type=float, required=True)
    p.add_argument("--bootstrap", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write collapse-transformed CSV")
    p.set_defaults(fn=_cmd_collapse)

    p = sub.add_parser("export", help="export plot data from records")
    p.add_argument("--records", required=True)
    p.add_argument("--kind", choices=["curves", "collapse", "phase_diagram"],
                   required=True)
    p.add_argument("--out-dir", default="plotdata")
    p.set_defaults(fn=_cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
