"""Command line experiment runner.

Subcommands: spectrum | simulate | sweep | check | jsr. Every run is
fully determined by the config document plus its seed; outputs are CSV
('.' decimals, '#' metadata line embedding the config hash) and JSON
with sorted keys, so reruns diff clean.

Exit codes: 0 success, 2 config or input error, 3 numeric failure
(estimator non-convergence only escalates under --strict).
"""

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from hashlib import sha256
from pathlib import Path

import numpy as np

from .cml import make_sync_report, report_to_csv, simulate
from .config import (
    ExperimentConfig,
    apply_parameter,
    build_map,
    build_source,
    config_hash,
    initial_state,
    probe_seed,
)
from .errors import (
    ConfigError,
    NetsyncError,
    OrbitDivergedError,
    SingularMatrixError,
    StateDivergedError,
    UnknownParameterError,
)
from .estimators import (
    default_t0_samples,
    estimate_hajnal_diameter,
    estimate_scalar_lyapunov,
    estimate_sigma1,
)
from .graphs import from_matrix, has_spanning_tree, is_scrambling_graph, union
from .jsr import DEFAULT_MAX_LEN, DEFAULT_TOL, gripenberg
from .linalg import is_stochastic, project, projection_basis

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load_config(args):
    try:
        raw = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {args.config}: {exc}") from exc
    if args.seed is not None:
        raw["seed"] = args.seed
    return raw, ExperimentConfig.from_json_dict(raw)


def _outdir(args, cfg):
    path = Path(args.out or cfg.out or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _run_sigma1(cfg, source):
    return estimate_sigma1(
        source,
        horizon=cfg.estimator.horizon,
        renorm_every=cfg.estimator.renorm_every,
        n_vectors=cfg.estimator.n_vectors,
        seed=probe_seed(cfg),
    )


def run_sync_experiment(cfg):
    """Estimate sigma1 and mu, simulate, and assemble the SyncReport.

    The single code path behind both `simulate` and each `sweep` row, so
    a one-value sweep reproduces the simulate summary exactly.
    """
    source = build_source(cfg)
    fmap = build_map(cfg)
    mu = cfg.map_spec.get("mu")
    if mu is None:
        mu = estimate_scalar_lyapunov(
            fmap.f, fmap.df, 0.3, cfg.estimator.mu_burn, cfg.estimator.mu_horizon
        )
        mu_source = "estimated"
    else:
        mu_source = "supplied"
    sig = _run_sigma1(cfg, source)
    x0 = initial_state(cfg, source.m, fmap)
    run = simulate(
        source, fmap, x0, cfg.simulation.steps, cfg.simulation.record_every
    )
    report = make_sync_report(run, sig.value, mu, mu_source)
    return run, report, sig


def cmd_spectrum(args) -> int:
    raw, cfg = _load_config(args)
    h = config_hash(cfg)
    out = _outdir(args, cfg)
    source = build_source(cfg)
    sig = _run_sigma1(cfg, source)
    diam_est = estimate_hajnal_diameter(
        source,
        horizon=cfg.estimator.horizon,
        t0_samples=cfg.estimator.t0_samples,
        renorm_every=cfg.estimator.renorm_every,
    )

    lines = [
        f"# config_hash={h} m={source.m} horizon={cfg.estimator.horizon}"
        f" renorm_every={cfg.estimator.renorm_every} collapsed={sig.collapsed}"
        f" converged={sig.converged}"
    ]
    lines.append("t,sigma1_estimate")
    for i, v in enumerate(sig.trace):
        lines.append(f"{(i + 1) * cfg.estimator.renorm_every},{repr(float(v))}")
    (out / "sigma1_trace.csv").write_text("\n".join(lines) + "\n")

    _write_json(
        out / "diam_estimate.json",
        {
            "config_hash": h,
            "diam": diam_est.to_json_dict(),
            "sigma1": sig.to_json_dict(),
        },
    )
    print(
        f"sigma1={sig.value:.6g} collapsed={sig.collapsed} converged={sig.converged}"
        f" | diam rate={diam_est.value:.6g} converged={diam_est.converged}"
    )
    print(f"wrote {out / 'sigma1_trace.csv'} and {out / 'diam_estimate.json'}")
    if args.strict and not (sig.converged and diam_est.converged):
        print("strict: estimate did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_simulate(args) -> int:
    raw, cfg = _load_config(args)
    h = config_hash(cfg)
    out = _outdir(args, cfg)
    run, report, sig = run_sync_experiment(cfg)

    csv_text = report_to_csv(
        report,
        extra_meta={
            "config_hash": h,
            "seed": cfg.seed,
            "map": cfg.map_spec["name"],
            "alpha": repr(cfg.map_spec["alpha"]),
            "x0_policy": cfg.simulation.x0_policy,
        },
    )
    (out / "sync_report.csv").write_text(csv_text)

    _write_json(
        out / "summary.json",
        {
            "config_hash": h,
            "m": report.m,
            "steps": report.steps,
            "sigma1": report.sigma1,
            "sigma1_converged": sig.converged,
            "sigma1_collapsed": sig.collapsed,
            "mu": report.mu,
            "mu_source": report.mu_source,
            "W": report.W,
            "predicted_sync": report.predicted_sync,
            "observed_sync": report.observed_sync,
            "indeterminate": report.indeterminate,
            "K_post_transient": run.k_final_quarter,
            "final_diam": report.diam_series[-1],
        },
    )
    verdict = "indeterminate" if report.indeterminate else (
        "sync predicted" if report.predicted_sync else "sync not predicted"
    )
    print(
        f"W={report.W:.6g} ({verdict}; mu {report.mu_source}),"
        f" observed_sync={report.observed_sync},"
        f" K_post_transient={run.k_final_quarter:.6g}"
    )
    print(f"wrote {out / 'sync_report.csv'} and {out / 'summary.json'}")
    if args.strict and not sig.converged:
        print("strict: sigma1 estimate did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _sweep_row(raw_doc: dict) -> dict:
    cfg = ExperimentConfig.from_json_dict(raw_doc)
    run, report, sig = run_sync_experiment(cfg)
    return {
        "K": run.k_final_quarter,
        "W": report.W,
        "predicted_sync": report.predicted_sync,
        "observed_sync": report.observed_sync,
        "indeterminate": report.indeterminate,
        "converged": sig.converged or sig.collapsed,
    }


def _sweep_worker(raw_json: str) -> dict:
    return _sweep_row(json.loads(raw_json))


def _parse_values(text: str):
    try:
        vals = json.loads(text)
        if not isinstance(vals, list):
            raise ValueError
        return vals
    except (json.JSONDecodeError, ValueError):
        pass
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            vals.append(int(tok))
        except ValueError:
            try:
                vals.append(float(tok))
            except ValueError as exc:
                raise ConfigError("values", f"cannot parse {tok!r}") from exc
    return vals


def cmd_sweep(args) -> int:
    raw, cfg = _load_config(args)
    h = config_hash(cfg)
    out = _outdir(args, cfg)
    values = _parse_values(args.values)
    if not values:
        raise ConfigError("values", "sweep needs at least one value")
    docs = [apply_parameter(raw, args.parameter, v) for v in values]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_worker, [json.dumps(d) for d in docs]))
    else:
        rows = [_sweep_row(d) for d in docs]

    lines = [f"# config_hash={h} parameter={args.parameter}"]
    lines.append("parameter,K,W,predicted_sync,observed_sync")
    for v, row in zip(values, rows):
        lines.append(
            f"{repr(float(v))},{repr(float(row['K']))},{repr(float(row['W']))},"
            f"{str(row['predicted_sync']).lower()},{str(row['observed_sync']).lower()}"
        )
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    if args.strict and not all(r["converged"] for r in rows):
        print("strict: a sigma1 estimate did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_check(args) -> int:
    raw, cfg = _load_config(args)
    h = config_hash(cfg)
    out = _outdir(args, cfg)
    if args.t_max < 1:
        raise ConfigError("t_max", "must be >= 1")
    source = build_source(cfg)
    t0s = cfg.estimator.t0_samples or default_t0_samples(cfg.estimator.horizon)

    found = None
    for T in range(1, args.t_max + 1):
        if all(
            has_spanning_tree(
                union([from_matrix(source.at(t0 + k)) for k in range(T)])
            )
            is not None
            for t0 in t0s
        ):
            found = T
            break
    report_T = found if found is not None else args.t_max
    windows = []
    for t0 in t0s:
        g = union([from_matrix(source.at(t0 + k)) for k in range(report_T)])
        windows.append(
            {
                "t0": t0,
                "T": report_T,
                "has_tree": has_spanning_tree(g) is not None,
                "scrambling": is_scrambling_graph(g),
            }
        )
    _write_json(
        out / "check_report.json",
        {"config_hash": h, "t_max": args.t_max, "t_found": found, "windows": windows},
    )
    if found is None:
        print(f"no window length T <= {args.t_max} gives all sampled unions a spanning tree")
    else:
        print(f"smallest window with spanning-tree unions at all sampled starts: T={found}")
    print(f"wrote {out / 'check_report.json'}")
    return EXIT_OK


def cmd_jsr(args) -> int:
    try:
        data = json.loads(Path(args.matrix_set).read_text())
    except OSError as exc:
        raise ConfigError("matrix_set", f"cannot read {args.matrix_set}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("matrix_set", f"invalid JSON: {exc}") from exc
    mats_raw = data.get("matrices") if isinstance(data, dict) else data
    if not isinstance(mats_raw, list) or not mats_raw:
        raise ConfigError("matrix_set.matrices", "expected a nonempty list of matrices")
    mats = []
    for k, M in enumerate(mats_raw):
        arr = np.asarray(M, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ConfigError(f"matrix_set.matrices[{k}]", "not a square matrix")
        if arr.shape != (mats[0].shape if mats else arr.shape):
            raise ConfigError(f"matrix_set.matrices[{k}]", "dimension mismatch")
        if arr.shape[0] < 2:
            raise ConfigError(f"matrix_set.matrices[{k}]", "need at least 2x2")
        if not is_stochastic(arr, tol=1e-9):
            raise ConfigError(f"matrix_set.matrices[{k}]", "not row stochastic")
        mats.append(arr)

    h = sha256(
        json.dumps([[list(r) for r in M] for M in mats], separators=(",", ":")).encode()
    ).hexdigest()[:16]
    basis = projection_basis(mats[0].shape[0], "difference")
    projected = [project(M, basis) for M in mats]
    bounds = gripenberg(projected, tol=args.tol, max_len=args.max_len)

    obj = {"config_hash": h, **bounds.to_json_dict(), "mu": args.mu}
    line = (
        f"jsr bounds: [{bounds.lower:.8g}, {bounds.upper:.8g}]"
        f" converged={bounds.converged}"
    )
    if args.mu is not None:
        log_upper = math.log(bounds.upper) if bounds.upper > 0 else -math.inf
        W_bound = log_upper + args.mu
        verdict = "synchronized" if W_bound < 0 else "not guaranteed"
        obj["log_upper_plus_mu"] = W_bound
        obj["verdict"] = verdict
        line += f" | W bound {W_bound:.6g} -> {verdict}"
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "jsr_bounds.json", obj)
    print(line)
    print(f"wrote {out / 'jsr_bounds.json'}")
    if args.strict and not bounds.converged:
        print("strict: bounds gap above tolerance", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _add_common(sp):
    sp.add_argument("--config", required=True, help="path to a JSON experiment config")
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--out", default=None, help="output directory (default: config out or cwd)")
    sp.add_argument("--strict", action="store_true", help="non-convergence exits 3")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="netsync",
        description="Synchronization analysis of coupled map lattices over time-varying networks",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="sigma1 trace and Hajnal diameter rate")
    _add_common(sp)
    sp.set_defaults(handler=cmd_spectrum)

    sp = sub.add_parser("simulate", help="run the lattice and report K(t), diam(t), W")
    _add_common(sp)
    sp.set_defaults(handler=cmd_simulate)

    sp = sub.add_parser("sweep", help="rerun the experiment over a parameter grid")
    _add_common(sp)
    sp.add_argument("--parameter", required=True, help="config field to vary (e.g. p or source.p)")
    sp.add_argument("--values", required=True, help="JSON list or comma-separated values")
    sp.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    sp.set_defaults(handler=cmd_sweep)

    sp = sub.add_parser("check", help="smallest window length with spanning-tree unions")
    _add_common(sp)
    sp.add_argument("--t-max", type=int, default=8, dest="t_max")
    sp.set_defaults(handler=cmd_check)

    sp = sub.add_parser("jsr", help="certified bounds on the projection joint spectral radius")
    sp.add_argument("matrix_set", help="JSON file: list of stochastic matrices or {'matrices': [...]}")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN, dest="max_len")
    sp.add_argument("--mu", type=float, default=None, help="scalar map exponent for the verdict")
    sp.add_argument("--out", default=None)
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(handler=cmd_jsr)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (StateDivergedError, OrbitDivergedError, SingularMatrixError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NetsyncError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
