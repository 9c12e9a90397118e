"""Batch front-end: configuration, run orchestration, reports.

Outputs of a full audit, all under the configured output directory:

* ``profile.json``   full multiplicity profile with exact bounds
* ``profile.csv``    plot-ready rows: epsilon, disc/amb lower, upper, certified
* ``baseline.json``  baseline coefficients plus train/test risk
* ``pool.json``      penalized-regression pool summary (when --adhoc is set)
* ``burden.csv``     per-group ambiguity (when the data carries group tags)
* ``run_manifest.json``  config echo, seeds, versions, wall times, node counts

Timing lives only in the manifest, so node-limited runs with the same
config produce byte-identical profile files.

Node-log format (``--node-log FILE``): one CSV line per incumbent
improvement, ``solve_tag,wall_seconds,nodes,upper_bound,lower_bound``.

Exit codes: 0 success, 2 input error, 3 stage failure, 4 invariant
violation (a certified bound check failed).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import platform
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import branch_bound as bnb
from .core import Dataset, InternalConsistencyError, empirical_risk
from .datasets import InputError, generate_synthetic, ingest_csv, write_csv
from .formulations import (
    FormulationParams,
    build_baseline_mip,
    build_disc_mip,
    build_flip_mip,
    classifier_from_solution,
    export_mps,
    margin_clearance,
    mps_filename,
)
from .pool import PenaltyGrid, adhoc_measures, fit_pool, pool_baseline_index
from .profiles import (
    EpsilonGrid,
    MultiplicityProfile,
    ambiguity_path,
    check_discrepancy_bound,
    discrepancy_path,
    group_burden,
    merge_profiles,
)

FULL_SCALE_LIMIT = 6 * 3600.0


class StageFailure(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    dataset: str = "xor"
    label_column: str = "label"
    group_column: Optional[str] = None
    split_fraction: float = 0.8
    split_seed: int = 0
    oversample: bool = True
    gamma: float = 1e-4
    epsilons: Optional[str] = None  # comma list; None -> default grid
    time_limit_baseline: float = 60.0
    time_limit_disc: float = 300.0  # whole discrepancy path
    time_limit_flip: float = 300.0  # whole flip batch
    node_limit: Optional[int] = None
    workers: int = 1
    outdir: str = "audit_out"
    adhoc: bool = False
    pool_alphas: int = 11
    pool_lambdas: int = 100
    seed: int = 0
    full_scale: bool = False
    node_log: Optional[str] = None

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise InputError("split fraction must lie in (0, 1)")
        for name in ("time_limit_baseline", "time_limit_disc", "time_limit_flip"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if self.full_scale:
            self.time_limit_baseline = FULL_SCALE_LIMIT
            self.time_limit_disc = FULL_SCALE_LIMIT
            self.time_limit_flip = FULL_SCALE_LIMIT


# -- data loading ----------------------------------------------------------


def load_dataset(config: RunConfig):
    """Resolve the dataset spec to (train, test, ingest_info).

    Synthetic specs ("xor", "tyranny", optionally ":scale") audit the whole
    generated dataset; CSV paths go through the split protocol.
    """
    spec = config.dataset
    name, _, scale_txt = spec.partition(":")
    if name in ("xor", "tyranny"):
        scale = int(scale_txt) if scale_txt else 1
        full = generate_synthetic(name, scale)
        if config.oversample:
            from .core import oversample_minority

            pos = int(full.weights[full.y == 1].sum())
            neg = int(full.weights[full.y == -1].sum())
            if pos != neg:
                full = oversample_minority(full, seed=config.split_seed)
        return full, None, {"source": name, "scale": scale, "dropped_rows": []}
    path = Path(spec)
    if not path.exists():
        raise InputError(f"dataset {spec!r} is neither a known generator nor a file")
    result = ingest_csv(
        path,
        label_column=config.label_column,
        group_column=config.group_column,
        split_fraction=config.split_fraction,
        split_seed=config.split_seed,
        oversample=config.oversample,
    )
    info = {
        "source": str(path),
        "dropped_rows": list(result.dropped.rows),
        "feature_names": list(result.feature_names),
    }
    return result.train, result.test, info


def resolve_grid(config: RunConfig, train: Dataset, baseline_rate) -> EpsilonGrid:
    if config.epsilons:
        values = [Fraction(part.strip()) for part in config.epsilons.split(",")]
        return EpsilonGrid.snapped(values, train.n)
    return EpsilonGrid.default(train.n, baseline_rate)


# -- serialization helpers ---------------------------------------------------


def exact_decimal(value: Fraction) -> str:
    """Shortest exact decimal when the denominator is 2^a 5^b, float repr
    otherwise."""
    frac = Fraction(value)
    if frac.denominator == 1:
        return str(frac.numerator)
    d = frac.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        return repr(float(frac))
    shift = 0
    scaled = frac
    while scaled.denominator != 1:
        scaled *= 10
        shift += 1
    digits = str(abs(scaled.numerator)).rjust(shift + 1, "0")
    sign = "-" if frac < 0 else ""
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


def _measure_json(m) -> Optional[dict]:
    if m is None:
        return None
    return {
        "lower": float(m.lower),
        "upper": float(m.upper),
        "lower_exact": str(m.lower),
        "upper_exact": str(m.upper),
        "certified": m.certified,
    }


def profile_json(profile: MultiplicityProfile) -> dict:
    return {
        "baseline": {
            "mistakes": profile.baseline.mistakes,
            "n": profile.baseline.n,
            "rate": float(profile.baseline.rate),
            "rate_exact": str(profile.baseline.rate),
        },
        "entries": [
            {
                "epsilon": exact_decimal(e.epsilon),
                "epsilon_exact": str(e.epsilon),
                "discrepancy": _measure_json(e.discrepancy),
                "ambiguity": _measure_json(e.ambiguity),
            }
            for e in profile.entries
        ],
        "witnesses": {
            str(eps): list(w.coefficients)
            for eps, w in sorted(profile.witnesses.items())
        },
    }


def profile_csv_lines(profile: MultiplicityProfile) -> list:
    lines = [
        "epsilon,disc_lower,disc_upper,disc_certified,amb_lower,amb_upper,amb_certified"
    ]
    for e in profile.entries:
        cells = [exact_decimal(e.epsilon)]
        for m in (e.discrepancy, e.ambiguity):
            if m is None:
                cells.extend(["", "", ""])
            else:
                cells.extend(
                    [
                        repr(float(m.lower)),
                        repr(float(m.upper)),
                        "true" if m.certified else "false",
                    ]
                )
        lines.append(",".join(cells))
    return lines


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _solve_summary(result) -> dict:
    return {
        "status": result.status,
        "upper_bound": result.upper_bound,
        "lower_bound": None
        if result.lower_bound in (float("inf"), float("-inf"))
        else result.lower_bound,
        "nodes": result.nodes_explored,
        "wall_time": result.wall_time,
    }


# -- audit orchestration -----------------------------------------------------


class _Deadline:
    """Shares one wall-clock budget across the solves of a stage."""

    def __init__(self, limit: Optional[float]):
        self.start = time.monotonic()
        self.limit = limit

    def budget(self, node_limit: Optional[int]) -> bnb.SolveBudget:
        if node_limit is not None:
            return bnb.SolveBudget(node_limit=node_limit)
        remaining = None
        if self.limit is not None:
            remaining = max(1e-3, self.limit - (time.monotonic() - self.start))
        return bnb.SolveBudget(time_limit=remaining)


def _node_logger(handle, tag: str):
    if handle is None:
        return None

    def log(wall, nodes, upper, lower):
        handle.write(f"{tag},{wall:.3f},{nodes},{upper},{lower}\n")

    return log


def run_audit(config: RunConfig) -> dict:
    """Full pipeline: baseline -> discrepancy path -> ambiguity path ->
    optional ad-hoc pool -> bound check -> group burden.

    Writes report files into ``config.outdir`` and returns the manifest.
    Any stage failure still leaves the prior stages' outputs on disk, with
    the manifest naming the failure point.
    """
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": dataclasses.asdict(config),
        "versions": {
            "multiplicity": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "stages": {},
        "failure": None,
    }
    params = FormulationParams(gamma=config.gamma)
    node_log_handle = (
        open(config.node_log, "a", encoding="utf-8") if config.node_log else None
    )
    state: dict = {}

    def finish_stage(name, started, **extra):
        manifest["stages"][name] = {
            "wall_time": time.monotonic() - started,
            **extra,
        }

    def fail(stage, exc):
        manifest["failure"] = {"stage": stage, "error": str(exc)}
        _write_json(outdir / "run_manifest.json", manifest)
        if node_log_handle is not None:
            node_log_handle.close()
        raise StageFailure(stage, exc) from exc

    # ingest
    t0 = time.monotonic()
    try:
        train, test, info = load_dataset(config)
    except Exception as exc:  # noqa: BLE001 - boundary reporting
        fail("ingest", exc)
    finish_stage("ingest", t0, **info, n_train=train.n, n_examples=len(train.examples))
    state["train"], state["test"] = train, test

    # baseline
    t0 = time.monotonic()
    try:
        model = build_baseline_mip(train, params)
        deadline = _Deadline(None if config.node_limit else config.time_limit_baseline)
        result = bnb.solve(
            model,
            budget=deadline.budget(config.node_limit),
            node_log=_node_logger(node_log_handle, "baseline"),
        )
        if result.incumbent is None:
            raise InternalConsistencyError("baseline training found no classifier")
        h0 = classifier_from_solution(model, result.incumbent)
        base_risk = empirical_risk(h0, train)
        min_margin, margin_ok = margin_clearance(h0, train, config.gamma)
        baseline_payload = {
            "coefficients": list(h0.coefficients),
            "train": {
                "mistakes": base_risk.mistakes,
                "n": base_risk.n,
                "rate": float(base_risk.rate),
                "rate_exact": str(base_risk.rate),
            },
            "certified": result.certified,
            "margin_clearance": {"min_abs_score": min_margin, "clears_gamma": margin_ok},
        }
        if test is not None:
            test_risk = empirical_risk(h0, test)
            baseline_payload["test"] = {
                "mistakes": test_risk.mistakes,
                "n": test_risk.n,
                "rate": float(test_risk.rate),
                "rate_exact": str(test_risk.rate),
            }
        _write_json(outdir / "baseline.json", baseline_payload)
    except StageFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        fail("baseline", exc)
    finish_stage("baseline", t0, **_solve_summary(result))
    state["h0"], state["baseline_result"] = h0, result

    grid = resolve_grid(config, train, base_risk.rate)

    # discrepancy path
    t0 = time.monotonic()
    try:
        deadline = _Deadline(None if config.node_limit else config.time_limit_disc)
        disc_profile, disc_results = discrepancy_path(
            train,
            h0,
            grid,
            budget=deadline.budget(config.node_limit),
            params=params,
            node_log=_node_logger(node_log_handle, "disc"),
        )
    except StageFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        fail("discrepancy", exc)
    finish_stage(
        "discrepancy",
        t0,
        solves=[_solve_summary(r) for r in disc_results],
    )

    # ambiguity path
    t0 = time.monotonic()
    try:
        deadline = _Deadline(None if config.node_limit else config.time_limit_flip)
        amb_profile, pool_info, flip_results = ambiguity_path(
            train,
            h0,
            grid,
            budget=deadline.budget(config.node_limit),
            workers=config.workers,
            params=params,
            baseline_certified=result.certified,
            seed_pool=list(disc_profile.witnesses.values()),
            node_log=_node_logger(node_log_handle, "flip"),
        )
    except StageFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        fail("ambiguity", exc)
    finish_stage(
        "ambiguity",
        t0,
        solves=[_solve_summary(r) for r in flip_results],
    )

    profile = merge_profiles(disc_profile, amb_profile)
    _write_json(outdir / "profile.json", profile_json(profile))
    (outdir / "profile.csv").write_text(
        "\n".join(profile_csv_lines(profile)) + "\n", encoding="utf-8"
    )

    # optional ad-hoc pool
    if config.adhoc:
        t0 = time.monotonic()
        try:
            alphas = tuple(
                round(k / max(config.pool_alphas - 1, 1), 6)
                for k in range(config.pool_alphas)
            )
            penalty_grid = PenaltyGrid(
                alphas=alphas, lambdas_per_alpha=config.pool_lambdas
            )
            models = fit_pool(train, penalty_grid, seed=config.seed)
            adhoc_profile = adhoc_measures(models, train, grid)
            base_idx = pool_baseline_index(models)
            _write_json(
                outdir / "pool.json",
                {
                    "n_models": len(models),
                    "baseline_index": base_idx,
                    "baseline_alpha": models[base_idx].alpha,
                    "baseline_lambda": models[base_idx].lam,
                    "baseline_cv_risk": models[base_idx].cv_risk,
                    "profile": profile_json(adhoc_profile),
                    "models": [
                        {
                            "alpha": m.alpha,
                            "lambda": m.lam,
                            "train_mistakes": m.train_risk.mistakes,
                            "cv_risk": m.cv_risk,
                            "converged": m.converged,
                        }
                        for m in models
                    ],
                },
            )
        except StageFailure:
            raise
        except Exception as exc:  # noqa: BLE001
            fail("adhoc", exc)
        finish_stage("adhoc", t0, n_models=len(models))

    # invariant check
    t0 = time.monotonic()
    try:
        report = check_discrepancy_bound(profile)
    except StageFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        fail("bound_check", exc)
    finish_stage(
        "bound_check", t0, min_slack=float(report.min_slack) if report.slacks else None
    )

    # group burden
    if all(ex.group is not None for ex in train.examples):
        t0 = time.monotonic()
        try:
            lines = ["group,epsilon,amb_lower,amb_upper,certified"]
            for eps in grid.values:
                for group, measure in group_burden(pool_info, train, eps).items():
                    lines.append(
                        ",".join(
                            [
                                group,
                                exact_decimal(eps),
                                repr(float(measure.lower)),
                                repr(float(measure.upper)),
                                "true" if measure.certified else "false",
                            ]
                        )
                    )
            (outdir / "burden.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        except StageFailure:
            raise
        except Exception as exc:  # noqa: BLE001
            fail("burden", exc)
        finish_stage("burden", t0)

    if node_log_handle is not None:
        node_log_handle.close()
    _write_json(outdir / "run_manifest.json", manifest)
    return manifest


# -- secondary verbs --------------------------------------------------------


def run_baseline(config: RunConfig) -> dict:
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    train, test, _ = load_dataset(config)
    params = FormulationParams(gamma=config.gamma)
    model = build_baseline_mip(train, params)
    budget = (
        bnb.SolveBudget(node_limit=config.node_limit)
        if config.node_limit
        else bnb.SolveBudget(time_limit=config.time_limit_baseline)
    )
    result = bnb.solve(model, budget=budget)
    if result.incumbent is None:
        raise InternalConsistencyError("baseline training found no classifier")
    h0 = classifier_from_solution(model, result.incumbent)
    risk = empirical_risk(h0, train)
    payload = {
        "coefficients": list(h0.coefficients),
        "train": {"mistakes": risk.mistakes, "n": risk.n, "rate": float(risk.rate)},
        "certified": result.certified,
        "nodes": result.nodes_explored,
    }
    if test is not None:
        t = empirical_risk(h0, test)
        payload["test"] = {"mistakes": t.mistakes, "n": t.n, "rate": float(t.rate)}
    _write_json(outdir / "baseline.json", payload)
    return payload


def run_export_mps(config: RunConfig, formulation: str, epsilon, flip_index) -> Path:
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    train, _, _ = load_dataset(config)
    params = FormulationParams(gamma=config.gamma)
    if formulation == "baseline":
        model = build_baseline_mip(train, params)
    else:
        base_model = build_baseline_mip(train, params)
        budget = (
            bnb.SolveBudget(node_limit=config.node_limit)
            if config.node_limit
            else bnb.SolveBudget(time_limit=config.time_limit_baseline)
        )
        result = bnb.solve(base_model, budget=budget)
        if result.incumbent is None:
            raise InternalConsistencyError("baseline training found no classifier")
        h0 = classifier_from_solution(base_model, result.incumbent)
        if formulation == "disc":
            eps = Fraction(epsilon if epsilon is not None else 0)
            model = build_disc_mip(train, h0, eps, params)
        elif formulation == "flip":
            model = build_flip_mip(train, h0, int(flip_index or 0), params)
        else:
            raise InputError(f"unknown formulation {formulation!r}")
    dataset_tag = Path(config.dataset).stem.replace(":", "x")
    path = outdir / mps_filename(dataset_tag, formulation, params)
    export_mps(model, path)
    return path


# -- argparse front-end ------------------------------------------------------

_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_config_file(path: str) -> dict:
    values = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{line_no}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_FIELDS:
            raise InputError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = _coerce_field(key, value.strip())
    return values


def _coerce_field(key: str, raw: str):
    target = _CONFIG_FIELDS[key].type
    if raw.lower() in ("none", ""):
        return None
    if "bool" in str(target):
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in str(target):
        return int(raw)
    if "float" in str(target):
        return float(raw)
    return raw


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--dataset", help="CSV path or generator name (xor, tyranny[:scale])")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--group-column", dest="group_column")
    p.add_argument("--split-fraction", dest="split_fraction", type=float)
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.add_argument("--no-oversample", dest="oversample", action="store_false", default=None)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilons", help="comma-separated error tolerances")
    p.add_argument("--time-limit-baseline", dest="time_limit_baseline", type=float)
    p.add_argument("--time-limit-disc", dest="time_limit_disc", type=float)
    p.add_argument("--time-limit-flip", dest="time_limit_flip", type=float)
    p.add_argument("--node-limit", dest="node_limit", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--outdir")
    p.add_argument("--adhoc", action="store_true", default=None)
    p.add_argument("--pool-alphas", dest="pool_alphas", type=int)
    p.add_argument("--pool-lambdas", dest="pool_lambdas", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--full-scale", dest="full_scale", action="store_true", default=None)


def _build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(_parse_config_file(args.config))
    for name in _CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiplicity",
        description="Exact predictive-multiplicity audits for linear classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for verb, help_text in (
        ("audit", "full pipeline: baseline, discrepancy, ambiguity, reports"),
        ("baseline", "fit and report the error-minimizing classifier"),
        ("discrepancy", "baseline plus the discrepancy path"),
        ("ambiguity", "baseline plus the ambiguity path"),
        ("adhoc", "penalized logistic pool measures only"),
    ):
        p = sub.add_parser(verb, help=help_text)
        _add_common_flags(p)
        p.add_argument("--node-log", dest="node_log", help="incumbent log file")

    g = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    g.add_argument("name", choices=["xor", "tyranny"])
    g.add_argument("--scale", type=int, default=1)
    g.add_argument("--out", required=True)

    e = sub.add_parser("export-mps", help="write a formulation in fixed MPS format")
    _add_common_flags(e)
    e.add_argument(
        "--formulation", choices=["baseline", "disc", "flip"], default="baseline"
    )
    e.add_argument("--epsilon", help="level-set tolerance for disc")
    e.add_argument("--flip-index", dest="flip_index", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            dataset = generate_synthetic(args.name, args.scale)
            write_csv(dataset, args.out)
            print(f"wrote {args.out} ({dataset.n} points)")
            return 0
        config = _build_config(args)
        if args.command == "audit":
            manifest = run_audit(config)
            print(f"audit complete; reports in {config.outdir}")
            return 0
        if args.command == "baseline":
            payload = run_baseline(config)
            rate = payload["train"]["rate"]
            print(
                f"baseline risk {rate:.4f} "
                f"({'certified' if payload['certified'] else 'not certified'})"
            )
            return 0
        if args.command in ("discrepancy", "ambiguity"):
            sub_config = dataclasses.replace(config)
            manifest = _run_single_path(sub_config, args.command)
            print(f"{args.command} path complete; reports in {config.outdir}")
            return 0
        if args.command == "adhoc":
            _run_adhoc_only(config)
            print(f"ad hoc pool complete; reports in {config.outdir}")
            return 0
        if args.command == "export-mps":
            path = run_export_mps(
                config, args.formulation, args.epsilon, args.flip_index
            )
            print(f"wrote {path}")
            return 0
        parser.error(f"unhandled command {args.command}")
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except InternalConsistencyError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except StageFailure as exc:
        if isinstance(exc.cause, InputError):
            code = 2
        elif isinstance(exc.cause, InternalConsistencyError):
            code = 4
        else:
            code = 3
        print(f"{exc}", file=sys.stderr)
        return code
    return 0


def _run_single_path(config: RunConfig, which: str) -> dict:
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    train, test, _ = load_dataset(config)
    params = FormulationParams(gamma=config.gamma)
    budget = (
        bnb.SolveBudget(node_limit=config.node_limit)
        if config.node_limit
        else bnb.SolveBudget(time_limit=config.time_limit_baseline)
    )
    result = bnb.solve(build_baseline_mip(train, params), budget=budget)
    if result.incumbent is None:
        raise InternalConsistencyError("baseline training found no classifier")
    h0 = classifier_from_solution(build_baseline_mip(train, params), result.incumbent)
    grid = resolve_grid(config, train, empirical_risk(h0, train).rate)
    if which == "discrepancy":
        limit = None if config.node_limit else config.time_limit_disc
        profile, _ = discrepancy_path(
            train, h0, grid, budget=_Deadline(limit).budget(config.node_limit),
            params=params,
        )
    else:
        limit = None if config.node_limit else config.time_limit_flip
        profile, _, _ = ambiguity_path(
            train, h0, grid, budget=_Deadline(limit).budget(config.node_limit),
            workers=config.workers, params=params,
            baseline_certified=result.certified,
        )
    _write_json(outdir / "profile.json", profile_json(profile))
    (outdir / "profile.csv").write_text(
        "\n".join(profile_csv_lines(profile)) + "\n", encoding="utf-8"
    )
    return profile_json(profile)


def _run_adhoc_only(config: RunConfig) -> None:
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    train, _, _ = load_dataset(config)
    alphas = tuple(
        round(k / max(config.pool_alphas - 1, 1), 6) for k in range(config.pool_alphas)
    )
    models = fit_pool(
        train, PenaltyGrid(alphas=alphas, lambdas_per_alpha=config.pool_lambdas),
        seed=config.seed,
    )
    base_idx = pool_baseline_index(models)
    base_rate = models[base_idx].train_risk.rate
    grid = resolve_grid(config, train, base_rate)
    profile = adhoc_measures(models, train, grid)
    _write_json(
        outdir / "pool.json",
        {
            "n_models": len(models),
            "baseline_index": base_idx,
            "baseline_alpha": models[base_idx].alpha,
            "baseline_lambda": models[base_idx].lam,
            "baseline_cv_risk": models[base_idx].cv_risk,
            "profile": profile_json(profile),
        },
    )


if __name__ == "__main__":
    sys.exit(main())
