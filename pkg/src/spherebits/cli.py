"""Command-line experiment harness.

Subcommands: phi-curve, isotropy, lemma1, scenario, oracle-2d.  Every run is
a deterministic function of its flags (including --seed); reruns with a
different --workers count produce byte-identical output.  Exit codes: 0 on
success (whatever the verdicts say), 2 for invalid arguments, 1 for
operational failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict

import numpy as np

from .entropy import SecrecyAdvantageReport
from .estimation import (
    ANGLE_PRODUCT,
    MODES,
    isotropy_test,
    lemma1_order_check,
    phi_curve,
    phi_oracle_2d,
)
from .geometry import point_at_distance, sample_sphere_point
from .scenario import (
    ChannelConfig,
    EffectiveSampleSizeError,
    InequalityReport,
    ScenarioReport,
    inequality_I_check,
    run_scenario,
)

DEFAULTS = {
    "epsilon": 0.1,
    "samples": 1_000_000,
    "mode": ANGLE_PRODUCT,
    "z_threshold": 4.0,
    "seed": 0,
    "workers": 1,
    "format": "csv",
    "out": "-",
    "grid": 1_000_000,
    "trials": 10_000,
    "thetas_per_trial": 100,
    "ineq_trials": 2000,
    "posterior_samples": 8192,
}


def _num(x) -> str:
    """Serialize one numeric field with 12 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _parse_distances(spec: str) -> list[float]:
    """Comma list ("0,0.05,0.1") or inclusive grid ("min:max:steps")."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("grid syntax is min:max:steps")
        lo, hi = float(parts[0]), float(parts[1])
        steps = int(parts[2])
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if steps == 1:
            if lo != hi:
                raise ValueError("steps=1 requires min == max")
            return [lo]
        return [float(v) for v in np.linspace(lo, hi, steps)]
    return [float(v) for v in spec.split(",")]


def _write_report(config: dict, results: list[dict], verdicts: dict, fmt: str, out: str) -> None:
    if fmt == "json":
        text = json.dumps(
            {"config": config, "results": results, "verdicts": verdicts}, indent=2
        ) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if results:
            header = list(results[0].keys())
            writer.writerow(header)
            for row in results:
                writer.writerow(
                    [v if isinstance(v, str) else _num(v) for v in (row[k] for k in header)]
                )
        text = buf.getvalue()
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _config_dict(args: argparse.Namespace, keys: list[str]) -> dict:
    cfg = {"command": args.command}
    for k in keys:
        cfg[k] = getattr(args, k)
    cfg["seed"] = args.seed
    cfg["workers"] = args.workers
    cfg["format"] = args.format
    cfg["out"] = args.out
    return cfg


def _advantage_dict(adv: SecrecyAdvantageReport) -> dict:
    return asdict(adv)


def _scenario_dict(report: ScenarioReport) -> dict:
    return {
        "mean_sq_dist_xy": report.mean_sq_dist_xy,
        "mean_sq_dist_xz": report.mean_sq_dist_xz,
        "sq_dist_diff": report.sq_dist_diff,
        "sq_dist_diff_se": report.sq_dist_diff_se,
        "ck_advantage_se": report.ck_advantage_se,
        "joint_counts": report.joint.counts.ravel().tolist(),
        "advantage": _advantage_dict(report.advantage),
        "chain_verdict": report.chain_verdict,
    }


def _inequality_dict(report: InequalityReport) -> dict:
    return {
        "trials": report.trials,
        "z_threshold": report.z_threshold,
        "conditional_mean_attains_min": report.conditional_mean_attains_min,
        "strategies": [asdict(r) for r in report.results],
    }


def cmd_phi_curve(args) -> int:
    rng = np.random.default_rng(args.seed)
    curve = phi_curve(
        args.dim, args.epsilon, args.distances, args.samples, args.mode, rng,
        workers=args.workers,
    )
    results = [
        {
            "d": p.distance,
            "mean": p.mean,
            "std_error": p.std_error,
            "samples": p.samples,
            "mode": p.mode,
        }
        for p in curve.points
    ]
    config = _config_dict(args, ["dim", "epsilon", "samples", "mode"])
    config["distances"] = list(args.distances)
    _write_report(config, results, {}, args.format, args.out)
    return 0


def cmd_isotropy(args) -> int:
    rng = np.random.default_rng(args.seed)
    report = isotropy_test(
        args.dim, args.epsilon, args.distance, args.pairs, args.samples, args.mode,
        rng, z_threshold=args.z_threshold, workers=args.workers,
    )
    results = [
        {
            "pair": i,
            "d": report.distance,
            "mean": est.mean,
            "std_error": est.std_error,
            "samples": est.samples,
            "mode": est.mode,
            "max_pairwise_z": report.max_pairwise_z,
            "verdict": report.verdict,
        }
        for i, est in enumerate(report.estimates)
    ]
    verdicts = {
        "max_pairwise_z": report.max_pairwise_z,
        "z_threshold": report.z_threshold,
        "verdict": report.verdict,
    }
    config = _config_dict(
        args, ["dim", "epsilon", "distance", "pairs", "samples", "mode", "z_threshold"]
    )
    _write_report(config, results, verdicts, args.format, args.out)
    return 0


def cmd_lemma1(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = []
    tally = {"agree": 0, "disagree": 0, "indeterminate": 0}
    for i in range(args.triples):
        d_xy, d_xz = rng.uniform(0.0, args.epsilon, size=2)
        x = sample_sphere_point(args.dim, args.epsilon, rng)
        y = point_at_distance(x, d_xy, rng)
        z = point_at_distance(x, d_xz, rng)
        check = lemma1_order_check(x, y, z, args.samples, args.mode, rng, workers=args.workers)
        tally[check.verdict] += 1
        rows.append(
            {
                "triple": i,
                "d_xy": check.d_xy,
                "d_xz": check.d_xz,
                "phi_xy": check.phi_xy.mean,
                "se_xy": check.phi_xy.std_error,
                "phi_xz": check.phi_xz.mean,
                "se_xz": check.phi_xz.std_error,
                "samples": args.samples,
                "verdict": check.verdict,
            }
        )
    for row in rows:
        row["agree_total"] = tally["agree"]
        row["disagree_total"] = tally["disagree"]
        row["indeterminate_total"] = tally["indeterminate"]
    config = _config_dict(args, ["dim", "epsilon", "triples", "samples", "mode"])
    _write_report(config, rows, dict(tally), args.format, args.out)
    return 0


def cmd_scenario(args) -> int:
    cfg = ChannelConfig(
        dimension=args.dim,
        epsilon=args.epsilon,
        sigma_b=args.sigma_b,
        sigma_e=args.sigma_e,
        trials=args.trials,
        thetas_per_trial=args.thetas_per_trial,
        mode=args.mode,
        seed=args.seed,
    )
    report = run_scenario(cfg, workers=args.workers)
    scen = _scenario_dict(report)
    results_json: dict = {"scenario": scen}
    verdicts = {
        "chain_verdict": report.chain_verdict,
        "ordering_verdict": report.advantage.ordering_verdict,
        "wyner_applicable": report.advantage.wyner_applicable,
    }
    rows = []
    flat = dict(scen)
    adv = flat.pop("advantage")
    joint = flat.pop("joint_counts")
    for k, v in flat.items():
        rows.append({"field": k, "value": v if isinstance(v, str) else _num(v)})
    for k, v in adv.items():
        rows.append({"field": f"advantage.{k}", "value": v if isinstance(v, str) else _num(v)})
    for idx, count in enumerate(joint):
        rows.append({"field": f"joint_counts[{idx:03b}]", "value": str(count)})
    if args.check_inequality_I:
        ineq = inequality_I_check(
            cfg,
            trials=args.ineq_trials,
            posterior_samples=args.posterior_samples,
        )
        results_json["inequality"] = _inequality_dict(ineq)
        verdicts["conditional_mean_attains_min"] = ineq.conditional_mean_attains_min
        for res in ineq.results:
            for metric in (
                "mean_sq_error",
                "std_error",
                "excess_vs_conditional_mean",
                "excess_se",
                "excess_z",
            ):
                rows.append(
                    {
                        "field": f"strategy.{res.name}.{metric}",
                        "value": _num(getattr(res, metric)),
                    }
                )
        rows.append(
            {
                "field": "conditional_mean_attains_min",
                "value": _num(ineq.conditional_mean_attains_min),
            }
        )
    config = _config_dict(
        args,
        ["dim", "epsilon", "sigma_b", "sigma_e", "trials", "thetas_per_trial", "mode"],
    )
    config["check_inequality_I"] = bool(args.check_inequality_I)
    config["ineq_trials"] = args.ineq_trials
    config["posterior_samples"] = args.posterior_samples
    if args.format == "json":
        _write_report(config, [results_json], verdicts, args.format, args.out)
    else:
        _write_report(config, rows, verdicts, args.format, args.out)
    return 0


def cmd_oracle_2d(args) -> int:
    results = [
        {"d": d, "phi": phi_oracle_2d(args.epsilon, d, grid=args.grid), "grid": args.grid}
        for d in args.distances
    ]
    config = _config_dict(args, ["epsilon", "grid"])
    config["distances"] = list(args.distances)
    _write_report(config, results, {}, args.format, args.out)
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=DEFAULTS["seed"], help="rng seed")
    sub.add_argument("--workers", type=int, default=DEFAULTS["workers"],
                     help="worker threads (never changes the output)")
    sub.add_argument("--out", default=DEFAULTS["out"], help="output path, '-' for stdout")
    sub.add_argument("--format", choices=("csv", "json"), default=DEFAULTS["format"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherebits",
        description="Distance-to-bit hashing experiments on spheres",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("phi-curve", help="disagreement rate over a distance grid")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULTS["epsilon"])
    p.add_argument("--distances", required=True,
                   help="comma list or min:max:steps (inclusive)")
    p.add_argument("--samples", type=int, default=DEFAULTS["samples"])
    p.add_argument("--mode", choices=MODES, default=DEFAULTS["mode"])
    _add_common(p)

    p = subs.add_parser("isotropy", help="rate spread across pairs at one distance")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULTS["epsilon"])
    p.add_argument("--distance", type=float, required=True)
    p.add_argument("--pairs", type=int, required=True)
    p.add_argument("--samples", type=int, default=DEFAULTS["samples"])
    p.add_argument("--mode", choices=MODES, default=DEFAULTS["mode"])
    p.add_argument("--z-threshold", type=float, default=DEFAULTS["z_threshold"])
    _add_common(p)

    p = subs.add_parser("lemma1", help="distance vs rate ordering on random triples")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULTS["epsilon"])
    p.add_argument("--triples", type=int, required=True)
    p.add_argument("--samples", type=int, default=DEFAULTS["samples"])
    p.add_argument("--mode", choices=MODES, default=DEFAULTS["mode"])
    _add_common(p)

    p = subs.add_parser("scenario", help="full wiretap chain experiment")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULTS["epsilon"])
    p.add_argument("--sigma-b", type=float, required=True)
    p.add_argument("--sigma-e", type=float, required=True)
    p.add_argument("--trials", type=int, default=DEFAULTS["trials"])
    p.add_argument("--thetas-per-trial", type=int, default=DEFAULTS["thetas_per_trial"])
    p.add_argument("--mode", choices=MODES, default=DEFAULTS["mode"])
    p.add_argument("--check-inequality-I", action="store_true",
                   help="also race opponent strategies against the posterior mean")
    p.add_argument("--ineq-trials", type=int, default=DEFAULTS["ineq_trials"])
    p.add_argument("--posterior-samples", type=int, default=DEFAULTS["posterior_samples"])
    _add_common(p)

    p = subs.add_parser("oracle-2d", help="direct quadrature of the rate at n=2")
    p.add_argument("--epsilon", type=float, default=DEFAULTS["epsilon"])
    p.add_argument("--distances", required=True,
                   help="comma list or min:max:steps (inclusive)")
    p.add_argument("--grid", type=int, default=DEFAULTS["grid"])
    _add_common(p)

    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if hasattr(args, "epsilon") and not 0.0 < args.epsilon < 1.0:
        parser.error(f"--epsilon must lie in (0, 1), got {args.epsilon}")
    if getattr(args, "dim", 2) < 2:
        parser.error(f"--dim must be >= 2, got {args.dim}")
    if getattr(args, "samples", 1) < 1:
        parser.error("--samples must be >= 1")
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    if hasattr(args, "distances"):
        try:
            args.distances = _parse_distances(args.distances)
        except ValueError as exc:
            parser.error(f"--distances: {exc}")
        lo, hi = min(args.distances), max(args.distances)
        if lo < 0.0 or hi > 2.0 * args.epsilon:
            parser.error(
                f"--distances must lie within [0, 2*epsilon] = [0, {2 * args.epsilon}]"
            )
        if sorted(args.distances) != args.distances:
            parser.error("--distances must be ascending")
    if hasattr(args, "distance") and not 0.0 <= args.distance <= 2.0 * args.epsilon:
        parser.error(
            f"--distance must lie within [0, 2*epsilon] = [0, {2 * args.epsilon}]"
        )
    if getattr(args, "pairs", 2) < 2:
        parser.error("--pairs must be >= 2")
    if getattr(args, "triples", 1) < 1:
        parser.error("--triples must be >= 1")
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be >= 1")
    if getattr(args, "thetas_per_trial", 1) < 1:
        parser.error("--thetas-per-trial must be >= 1")
    if getattr(args, "sigma_b", 0.0) < 0.0 or getattr(args, "sigma_e", 0.0) < 0.0:
        parser.error("noise scales must be nonnegative")
    if getattr(args, "grid", 1) < 1:
        parser.error("--grid must be >= 1")
    if getattr(args, "ineq_trials", 2) < 2:
        parser.error("--ineq-trials must be >= 2")
    if getattr(args, "posterior_samples", 1) < 1:
        parser.error("--posterior-samples must be >= 1")


_HANDLERS = {
    "phi-curve": cmd_phi_curve,
    "isotropy": cmd_isotropy,
    "lemma1": cmd_lemma1,
    "scenario": cmd_scenario,
    "oracle-2d": cmd_oracle_2d,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        return _HANDLERS[args.command](args)
    except EffectiveSampleSizeError as exc:
        print(f"spherebits: estimation failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"spherebits: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
