"""Command-line runner: run, sweep, validate, print-defaults.

Exit codes: 0 success, 1 usage or config errors, 2 physics-validity
failure (from ``validate`` only; ``run`` reports validity problems in
its output files but still succeeds).  All files are written atomically
so concurrent sweeps never interleave partial output.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .config import ConfigError, KEY_DOCS, _STR_KEYS, _coerce, config_hash, emit_defaults, parse_config
from .experiment import (
    bob_train,
    default_fringe_window,
    fringe_visibility,
    monte_carlo_detect,
    no_signaling_distance,
    singles_pattern,
)
from .optics import validate_sampling

__all__ = ["RunManifest", "cmd_run", "cmd_sweep", "cmd_validate", "main"]


class _UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunManifest:
    """What a run produced: config identity, tool version, output files."""

    config_hash: str
    tool_version: str
    outputs: tuple  # of (role, path) pairs

    def path(self, role):
        for r, p in self.outputs:
            if r == role:
                return p
        raise KeyError(role)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_float(v):
    return f"{v:.12e}"


def _run_outputs(cfg):
    """Compute everything one run reports; pure, no I/O."""
    cfg.validate()
    validity = cfg.filter_validity()
    sampling = validate_sampling(cfg.grid(), bob_train(cfg))
    pattern = singles_pattern(cfg)
    try:
        visibility = fringe_visibility(pattern, default_fringe_window(cfg))
    except ValueError:
        visibility = 0.0  # no flux in the central window
    distance = no_signaling_distance(cfg)
    record = None
    if cfg.n_photons > 0:
        record = monte_carlo_detect(pattern, cfg.n_photons, cfg.seed)
    summary = {
        "visibility": visibility,
        "total_weight": pattern.total_weight,
        "no_signaling_l1": distance.l1,
        "no_signaling_linf": distance.linf,
        "angular_tolerance_ratio": validity.hf_ratio,
        "r_condition_ratio": validity.r_ratio,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "tool_version": __version__,
    }
    return pattern, summary, record, validity, sampling


def cmd_run(config_path, out_dir, seed=None) -> RunManifest:
    """Execute one experiment and write its output files.

    Writes pattern.csv, summary.json, validity_report.json, a manifest,
    and hits.csv when the config requests Monte Carlo photons.
    """
    cfg, warnings = parse_config(config_path)
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    pattern, summary, record, validity, sampling = _run_outputs(cfg)

    outputs = []
    pattern_path = os.path.join(out_dir, "pattern.csv")
    rows = ["y_m,intensity_per_m"]
    rows += [
        f"{_csv_float(y)},{_csv_float(i)}"
        for y, i in zip(pattern.grid.coords, pattern.intensity)
    ]
    _atomic_write(pattern_path, "\n".join(rows) + "\n")
    outputs.append(("pattern_csv", pattern_path))

    summary_path = os.path.join(out_dir, "summary.json")
    _atomic_write(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs.append(("summary_json", summary_path))

    validity_path = os.path.join(out_dir, "validity_report.json")
    report = {
        "angular_tolerance": validity.angular_tolerance,
        "hf_ratio": validity.hf_ratio,
        "r_ratio": validity.r_ratio,
        "passes_hf_condition": validity.passes_hf_condition,
        "passes_r_condition": validity.passes_r_condition,
        "threshold": validity.threshold,
        "sampling_flags": list(sampling.flags),
        "config_warnings": warnings,
    }
    _atomic_write(validity_path, json.dumps(report, indent=2) + "\n")
    outputs.append(("validity_report", validity_path))

    if record is not None:
        hits_path = os.path.join(out_dir, "hits.csv")
        _atomic_write(hits_path, "\n".join(["y_m"] + [_csv_float(h) for h in record.hits]) + "\n")
        outputs.append(("hits_csv", hits_path))

    manifest = RunManifest(summary["config_hash"], __version__, tuple(outputs))
    manifest_path = os.path.join(out_dir, "manifest.json")
    _atomic_write(
        manifest_path,
        json.dumps(
            {
                "config_hash": manifest.config_hash,
                "tool_version": manifest.tool_version,
                "outputs": [{"role": r, "path": p} for r, p in manifest.outputs],
            },
            indent=2,
        )
        + "\n",
    )
    return manifest


def _parse_sweep_spec(spec):
    key, sep, values = spec.partition("=")
    key = key.strip()
    if not sep:
        raise _UsageError("--sweep expects KEY=v1,v2,...")
    if key not in KEY_DOCS:
        raise _UsageError(f"unknown sweep key {key!r}")
    if key in _STR_KEYS:
        raise _UsageError(f"sweep key must be numeric, {key!r} is not")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not items:
        raise _UsageError("sweep value list is empty")
    try:
        return key, [_coerce(key, v) for v in items]
    except ValueError as exc:
        raise _UsageError(f"bad sweep value: {exc}") from None


def cmd_sweep(config_path, sweep_spec, out_dir, seed=None, threads=1) -> list:
    """Run one experiment per sweep value; returns the manifests.

    Each point lands in its own subdirectory; an aggregate sweep.csv
    collects (value, visibility, total_weight, no_signaling_l1) rows in
    sweep order.
    """
    key, values = _parse_sweep_spec(sweep_spec)
    base_cfg, warnings = parse_config(config_path)
    if seed is not None:
        base_cfg = replace(base_cfg, seed=int(seed))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)

    def one_point(item):
        index, value = item
        cfg = replace(base_cfg, **{key: value})
        cfg.validate()
        pattern, summary, record, validity, sampling = _run_outputs(cfg)
        point_dir = os.path.join(out_dir, f"point_{index:03d}")
        manifest = _write_point(point_dir, cfg, pattern, summary, record, validity, sampling)
        return value, summary, manifest

    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(one_point, enumerate(values)))

    rows = ["value,visibility,total_weight,no_signaling_l1"]
    rows += [
        f"{_csv_float(v)},{_csv_float(s['visibility'])},"
        f"{_csv_float(s['total_weight'])},{_csv_float(s['no_signaling_l1'])}"
        for v, s, _ in results
    ]
    _atomic_write(os.path.join(out_dir, "sweep.csv"), "\n".join(rows) + "\n")
    return [m for _, _, m in results]


def _write_point(out_dir, cfg, pattern, summary, record, validity, sampling):
    # sweep points reuse the run writer by faking a parse-free path
    outputs = []
    pattern_path = os.path.join(out_dir, "pattern.csv")
    rows = ["y_m,intensity_per_m"]
    rows += [
        f"{_csv_float(y)},{_csv_float(i)}"
        for y, i in zip(pattern.grid.coords, pattern.intensity)
    ]
    _atomic_write(pattern_path, "\n".join(rows) + "\n")
    outputs.append(("pattern_csv", pattern_path))
    summary_path = os.path.join(out_dir, "summary.json")
    _atomic_write(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs.append(("summary_json", summary_path))
    validity_path = os.path.join(out_dir, "validity_report.json")
    _atomic_write(
        validity_path,
        json.dumps(
            {
                "angular_tolerance": validity.angular_tolerance,
                "hf_ratio": validity.hf_ratio,
                "r_ratio": validity.r_ratio,
                "passes_hf_condition": validity.passes_hf_condition,
                "passes_r_condition": validity.passes_r_condition,
                "threshold": validity.threshold,
                "sampling_flags": list(sampling.flags),
                "config_warnings": [],
            },
            indent=2,
        )
        + "\n",
    )
    outputs.append(("validity_report", validity_path))
    if record is not None:
        hits_path = os.path.join(out_dir, "hits.csv")
        _atomic_write(hits_path, "\n".join(["y_m"] + [_csv_float(h) for h in record.hits]) + "\n")
        outputs.append(("hits_csv", hits_path))
    return RunManifest(summary["config_hash"], __version__, tuple(outputs))


def cmd_validate(config_path) -> int:
    """Print the validity report; exit 0 when every condition passes."""
    cfg, warnings = parse_config(config_path)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    validity = cfg.filter_validity()
    sampling = validate_sampling(cfg.grid(), bob_train(cfg))
    print(f"angular tolerance h/f        : {validity.angular_tolerance:.6g} rad")
    print(
        f"(h/f) / (lambda/s) ratio     : {validity.hf_ratio:.6g} "
        f"({'pass' if validity.passes_hf_condition else 'FAIL'}, threshold {validity.threshold})"
    )
    print(
        f"lambda / R ratio             : {validity.r_ratio:.6g} "
        f"({'pass' if validity.passes_r_condition else 'FAIL'}, threshold {validity.threshold})"
    )
    if sampling.flags:
        print("sampling flags:")
        for flag in sampling.flags:
            print(f"  - {flag}")
    else:
        print("sampling flags               : none")
    return 0 if (validity.ok and sampling.ok) else 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="eprsim",
        description="Wave-optics EPR pair experiment: direction-filtered double slit "
        "with position/momentum measurements on the partner photon.",
    )
    parser.add_argument("--version", action="version", version=f"eprsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write outputs")
    run.add_argument("--config", required=True, help="config file path")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")

    sweep = sub.add_parser("sweep", help="run one experiment per value of a numeric key")
    sweep.add_argument("--config", required=True, help="config file path")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--sweep", required=True, metavar="KEY=v1,v2,...",
                       help="numeric config key and comma-separated values")
    sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    sweep.add_argument("--threads", type=int, default=1, help="parallel sweep workers")

    validate = sub.add_parser("validate", help="check filter validity and sampling")
    validate.add_argument("--config", required=True, help="config file path")

    sub.add_parser("print-defaults", help="print the default config file")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version, 2 for usage errors
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "run":
            cmd_run(args.config, args.out, seed=args.seed)
            return 0
        if args.command == "sweep":
            cmd_sweep(args.config, args.sweep, args.out, seed=args.seed,
                      threads=args.threads)
            return 0
        if args.command == "validate":
            return cmd_validate(args.config)
        if args.command == "print-defaults":
            sys.stdout.write(emit_defaults())
            return 0
        raise _UsageError(f"unknown command {args.command!r}")
    except (_UsageError, ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
