"""Command-line entry point: generate / fit / evaluate / rate-study / benchmark.

Every run takes a TOML or JSON config file plus a handful of flags, writes
its outputs as JSON (and CSV where tabular) into --out, and embeds the
sha256 of the resolved config and the seed in every file for audit.  The
only timestamp lives in the manifest's created_at field, so rerunning a
command with the same config and seed reproduces every other byte.

Exit codes: 0 success, 2 config/input error, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10 fallback
    import tomli as tomllib

from .benchmark import (
    IhdpSource,
    benchmark_report_to_json_dict,
    benchmark_table,
    default_roster,
    run_benchmark,
)
from .dataset import fold_plan, load_csv, make_split, write_csv
from .empirical_bayes import fit_report_to_json_dict
from .errors import NumericalError, ParseError, ShapeError, ValidationError
from .estimators import estimator_spec_from_json_dict, fit_estimator
from .gp import model_from_json_dict, model_to_json_dict, predict
from .metrics import (
    pehe,
    rate_study_result_to_json_dict,
    rate_study_table,
    run_rate_study,
)
from .synthgen import generate, generator_config_from_json_dict

log = logging.getLogger("causalgp")

THREADS_ENV = "CAUSALGP_THREADS"

# single-model GP entries; the others have no lone artifact to persist
_FITTABLE = ("mtgp_info", "mtgp_lik", "gp_aug_lik")


# --------------------------------------------------------------------------
# config plumbing


def _load_config(path: str) -> dict:
    if path.endswith(".toml"):
        try:
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if path.endswith(".json"):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    raise ValidationError(f"config file must end in .toml or .json, got {path!r}")


def _check_keys(cfg: dict, allowed: set, command: str) -> None:
    extra = cfg.keys() - allowed
    if extra:
        raise ValidationError(
            f"{command} config: unknown top-level keys {sorted(extra)}; allowed: {sorted(allowed)}"
        )


def _config_digest(command: str, cfg: dict, seed: int, scale: float) -> str:
    blob = json.dumps(
        {"command": command, "config": cfg, "seed": seed, "scale": scale},
        sort_keys=True,
        separators=(",", ":"),
        default=str,
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: str, command: str, digest: str, seed: int, outputs) -> str:
    path = os.path.join(out_dir, "manifest.json")
    _write_json(
        path,
        {
            "command": command,
            "config_sha256": digest,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "outputs": sorted(outputs),
            "seed": seed,
        },
    )
    return path


def _scaled_replicates(value, scale: float) -> int:
    return max(int(round(int(value) * scale)), 1)


def _load_dataset(cfg: dict, seed: int, command: str):
    """Resolve the `data` path / `generator` table pair into a dataset."""
    has_path = "data" in cfg
    has_gen = "generator" in cfg
    if has_path == has_gen:
        raise ValidationError(
            f"{command} config: exactly one of 'data' or '[generator]' is required"
        )
    if has_path:
        return load_csv(cfg["data"])
    gen = generator_config_from_json_dict(cfg["generator"])
    return generate(replace(gen, seed=seed))


def _split_for(cfg: dict, ds, J: int, seed: int):
    spec = cfg.get("split", {"kind": "folds"})
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("split: expected a table with a 'kind' field")
    kind = spec["kind"]
    if kind == "folds":
        if spec.keys() - {"kind"}:
            raise ValidationError(f"split: unknown keys {sorted(spec.keys() - {'kind'})}")
        return fold_plan(ds, J, seed)
    if kind == "fractions":
        if spec.keys() - {"kind", "fractions"}:
            raise ValidationError(
                f"split: unknown keys {sorted(spec.keys() - {'kind', 'fractions'})}"
            )
        fractions = tuple(spec.get("fractions", (0.6, 0.2, 0.2)))
        return make_split(ds, fractions, J, seed)
    raise ValidationError(f"split: unknown kind {kind!r}, expected 'folds' or 'fractions'")


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(cfg: dict, args, digest: str) -> list:
    _check_keys(cfg, {"generator", "seed"}, "generate")
    if "generator" not in cfg:
        raise ValidationError("generate config: missing [generator] section")
    gen = generator_config_from_json_dict(cfg["generator"])
    ds = generate(replace(gen, seed=args.resolved_seed))
    csv_path = os.path.join(args.out, "dataset.csv")
    write_csv(csv_path, ds)
    log.info("wrote %s (n=%d, d=%d)", csv_path, ds.n, ds.d)
    return ["dataset.csv"]


def cmd_fit(cfg: dict, args, digest: str) -> list:
    _check_keys(cfg, {"data", "generator", "estimator", "split", "seed"}, "fit")
    if "estimator" not in cfg:
        raise ValidationError("fit config: missing [estimator] section")
    spec = estimator_spec_from_json_dict(cfg["estimator"])
    if spec.name not in _FITTABLE:
        raise ValidationError(
            f"fit supports a single-model estimator {_FITTABLE}, got {spec.name!r};"
            " use the benchmark subcommand for roster baselines"
        )
    seed = args.resolved_seed
    ds = _load_dataset(cfg, seed, "fit")
    split = _split_for(cfg, ds, spec.J, seed)
    fitted = fit_estimator(spec, ds, split, seed=seed)
    report = fitted.reports[0]
    stamp = {"config_sha256": digest, "seed": seed}
    _write_json(
        os.path.join(args.out, "model.json"),
        dict(stamp, model=model_to_json_dict(report.model)),
    )
    _write_json(
        os.path.join(args.out, "fit_report.json"),
        dict(stamp, report=fit_report_to_json_dict(report)),
    )
    chosen = report.candidates[report.selected_index]
    log.info("selected smoothness %s with %s=%.6g", chosen.smoothness, report.criterion, chosen.risk)
    return ["model.json", "fit_report.json"]


def cmd_evaluate(cfg: dict, args, digest: str) -> list:
    _check_keys(cfg, {"model", "data", "seed"}, "evaluate")
    for key in ("model", "data"):
        if key not in cfg:
            raise ValidationError(f"evaluate config: missing {key!r} entry")
    with open(cfg["model"], "r", encoding="utf-8") as fh:
        artifact = json.load(fh)
    if not isinstance(artifact, dict) or "model" not in artifact:
        raise ValidationError(f"{cfg['model']}: not a model artifact (no 'model' entry)")
    model = model_from_json_dict(artifact["model"])
    ds = load_csv(cfg["data"])
    d_model = model.features.shape[1]
    if d_model != ds.d:
        raise ShapeError(
            f"model expects {d_model} feature columns, dataset has {ds.d}"
        )
    summary = predict(model, ds.features)
    factual = np.where(ds.treatments == 1, summary.mean1, summary.mean0)
    payload = {
        "config_sha256": digest,
        "seed": args.resolved_seed,
        "n": ds.n,
        "d": ds.d,
        "factual_rmse": float(np.sqrt(np.mean((factual - ds.outcomes) ** 2))),
    }
    if ds.true_ite is not None:
        payload["pehe"] = pehe(summary.ite_mean, ds.true_ite)
        payload["sqrt_pehe"] = float(np.sqrt(payload["pehe"]))
    _write_json(os.path.join(args.out, "evaluation.json"), payload)
    return ["evaluation.json"]


def cmd_rate_study(cfg: dict, args, digest: str) -> list:
    _check_keys(cfg, {"generator", "estimator", "sizes", "R", "query_points", "seed"}, "rate-study")
    for key in ("generator", "estimator", "sizes"):
        if key not in cfg:
            raise ValidationError(f"rate-study config: missing {key!r} entry")
    gen = generator_config_from_json_dict(cfg["generator"])
    spec = estimator_spec_from_json_dict(cfg["estimator"])
    result = run_rate_study(
        gen,
        spec,
        cfg["sizes"],
        R=_scaled_replicates(cfg.get("R", 10), args.scale),
        seed=args.resolved_seed,
        query_points=int(cfg.get("query_points", 500)),
        workers=args.resolved_threads,
    )
    stamp = {"config_sha256": digest, "seed": args.resolved_seed}
    _write_json(
        os.path.join(args.out, "rate_study.json"),
        dict(stamp, study=rate_study_result_to_json_dict(result)),
    )
    with open(os.path.join(args.out, "rate_samples.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "replicate", "pehe"])
        for n, ri, value in result.samples:
            writer.writerow([n, ri, repr(float(value))])
    print(rate_study_table(result))
    return ["rate_study.json", "rate_samples.csv"]


def cmd_benchmark(cfg: dict, args, digest: str) -> list:
    _check_keys(cfg, {"source", "roster", "R", "fractions", "seed"}, "benchmark")
    if "source" not in cfg:
        raise ValidationError("benchmark config: missing [source] section")
    src = cfg["source"]
    if not isinstance(src, dict) or "kind" not in src:
        raise ValidationError("source: expected a table with a 'kind' field")
    if src["kind"] == "ihdp_analog":
        extra = src.keys() - {"kind", "n", "surface_seed"}
        if extra:
            raise ValidationError(f"source: unknown keys {sorted(extra)}")
        source = IhdpSource(n=src.get("n", 747), surface_seed=src.get("surface_seed", 0))
    elif src["kind"] == "generator":
        if src.keys() - {"kind", "config"}:
            raise ValidationError(f"source: unknown keys {sorted(src.keys() - {'kind', 'config'})}")
        source = generator_config_from_json_dict(src.get("config", {}))
    else:
        raise ValidationError(f"source: unknown kind {src['kind']!r}")
    roster = (
        tuple(estimator_spec_from_json_dict(e) for e in cfg["roster"])
        if "roster" in cfg
        else default_roster()
    )
    report = run_benchmark(
        source,
        roster=roster,
        R=_scaled_replicates(cfg.get("R", 50), args.scale),
        seed=args.resolved_seed,
        fractions=tuple(cfg.get("fractions", (0.6, 0.2, 0.2))),
        workers=args.resolved_threads,
    )
    _write_json(
        os.path.join(args.out, "benchmark.json"),
        {
            "config_sha256": digest,
            "seed": args.resolved_seed,
            "benchmark": benchmark_report_to_json_dict(report),
        },
    )
    print(benchmark_table(report))
    return ["benchmark.json"]


_COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "rate-study": cmd_rate_study,
    "benchmark": cmd_benchmark,
}


# --------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalgp",
        description="Treatment-effect estimation with coupled Gaussian processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "draw a synthetic dataset and write it as CSV",
        "fit": "run the hyperparameter search and persist the model",
        "evaluate": "score a persisted model on a dataset CSV",
        "rate-study": "measure error decay against the closed-form exponent",
        "benchmark": "compare the estimator roster over replicated draws",
    }
    for name in _COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, help="TOML or JSON config file")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", default="out", help="output directory (created if missing)")
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help=f"worker processes; the {THREADS_ENV} env var overrides this",
        )
        p.add_argument(
            "--scale",
            type=float,
            default=1.0,
            help="multiplies replicate counts (rate-study, benchmark)",
        )
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _resolve_threads(flag_value: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    else:
        value = flag_value
    if value < 1:
        raise ValidationError(f"thread count must be at least 1, got {value}")
    return value


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _load_config(args.config)
        if not isinstance(cfg, dict):
            raise ValidationError(f"{args.config}: config root must be a table/object")
        args.resolved_seed = (
            args.seed if args.seed is not None else int(cfg.get("seed", 0))
        )
        args.resolved_threads = _resolve_threads(args.threads)
        if args.scale <= 0:
            raise ValidationError(f"--scale must be positive, got {args.scale}")
        digest = _config_digest(args.command, cfg, args.resolved_seed, args.scale)
        os.makedirs(args.out, exist_ok=True)
        outputs = _COMMANDS[args.command](cfg, args, digest)
        manifest = _write_manifest(
            args.out, args.command, digest, args.resolved_seed, outputs
        )
        print(f"wrote {len(outputs) + 1} files to {args.out} (manifest: {manifest})")
        return 0
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
