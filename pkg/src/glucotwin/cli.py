"""Command-line driver for every shipped experiment.

Subcommands wrap the library one-to-one: ``ingest`` and ``gen-fixtures``
cover the CGM corpus path, ``benchmark`` the multi-seed model table,
``simulate``/``overlay`` the counterfactual engine, ``augment`` the
temporal expansion, and ``serve`` the HTTP facade. Data goes to stdout or
``--out``; diagnostics go to stderr; report paths written with ``--out``
also render figures next to the delimited files unless ``--no-plots``.

Exit codes: 0 success, 2 missing input file or usage error, 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime
from importlib import resources
from pathlib import Path

from . import __version__
from .augment import AugmentConfig, augment, flatten, sequences_to_csv, sequences_to_json
from .counterfactual import (
    InterventionScenario,
    ResponseParams,
    calibrate,
    compute_outcome,
    outcomes_to_csv,
    outcomes_to_json,
    overlay_counterfactual,
    rank_interventions,
    simulate_scenario,
    trajectories_to_csv,
)
from .errors import GlucotwinError
from .evaluation import default_seeds, run_benchmark
from .ingest import (
    ParseStats,
    derive_risk_labels,
    export_cgm_csv,
    generate_corpus,
    load_benchmark,
    load_tabular,
    parse_cgm_csv,
    parse_cgm_xml,
    summarize,
    tabular_to_csv,
)

DEFAULT_NOISE_SIGMA = 5.0


def _echo(args, text: str):
    if not args.quiet:
        print(text, end="" if text.endswith("\n") else "\n")


def _warn(text: str):
    print(text, file=sys.stderr)


def _write_out(args, name: str, content: str) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(content)
    return path


def _plots_enabled(args) -> bool:
    return args.out is not None and not args.no_plots


# -- subcommands -----------------------------------------------------------

def cmd_ingest(args) -> int:
    paths = [Path(p) for p in args.paths]
    for p in paths:
        if not p.exists():
            _warn(f"error: no such file: {p}")
            return 2
    stats = ParseStats()
    corpus = []
    tabular_rows = 0
    failed = False
    for p in paths:
        try:
            if args.kind == "cgm-xml":
                corpus.extend(parse_cgm_xml(p.read_bytes(), stats=stats))
            elif args.kind == "cgm-csv":
                corpus.append(parse_cgm_csv(p.read_bytes(), patient_id=p.stem, stats=stats))
            else:
                tabular_rows += load_tabular(p.read_bytes()).n_rows
        except GlucotwinError as exc:
            _warn(f"error: {p}: {exc}")
            if not args.skip_bad:
                return 1
            failed = True
    if args.kind == "tabular":
        doc = {"files": len(paths), "rows": tabular_rows}
        _echo(args, _format_summary(doc, args.format))
        return 0
    corpus.sort(key=lambda s: s.patient_id)
    summary = summarize(corpus)
    doc = dict(summary.to_dict())
    doc["records_rejected"] = stats.records_rejected
    _echo(args, _format_summary(doc, args.format))
    if args.out:
        _write_out(args, "summary.json", json.dumps(doc, indent=2))
        _write_out(args, "summary.csv", _format_summary(doc, "csv"))
        norm = Path(args.out) / "normalized"
        norm.mkdir(parents=True, exist_ok=True)
        for s in corpus:
            (norm / f"{s.patient_id}.csv").write_text(export_cgm_csv(s))
        if _plots_enabled(args):
            from . import plots
            plots.save_cgm_series(corpus[0], Path(args.out) / "cgm_series.png")
    return 1 if failed else 0


def cmd_gen_fixtures(args) -> int:
    manifest = generate_corpus(args.out, n_records=args.records, n_files=args.files,
                               seed=args.seed)
    doc = {"files": len(manifest.files), "total_records": manifest.total_records,
           "target_mean": manifest.target_mean, "target_std": manifest.target_std,
           "seed": manifest.seed, "out": str(args.out)}
    _echo(args, _format_summary(doc, args.format))
    return 0


def cmd_benchmark(args) -> int:
    if args.data:
        path = Path(args.data)
        if not path.exists():
            _warn(f"error: no such file: {path}")
            return 2
        ds = load_tabular(path.read_bytes())
    else:
        ds = load_benchmark()
    ds = derive_risk_labels(ds)
    seeds = default_seeds(args.seeds, args.base_seed)
    report = run_benchmark(ds, seeds=seeds)
    if args.format == "json":
        _echo(args, report.to_json())
    else:
        _echo(args, report.to_csv())
        _echo(args, _report_sections(report))
    _write_out(args, "report.csv", report.to_csv())
    _write_out(args, "report.json", report.to_json())
    if _plots_enabled(args):
        from . import plots
        plots.save_benchmark(report, Path(args.out) / "benchmark.png")
    return 0


def _report_sections(report) -> str:
    lines = ["# regression (mean over seeds): model mae rmse r2"]
    for r in report.mean_rows():
        if r.rmse is not None:
            lines.append(f"#   {r.model:8s} {r.mae:7.2f} {r.rmse:7.2f} {r.r2:6.3f}")
    lines.append("# classification (mean over seeds): model accuracy auc")
    for r in report.mean_rows():
        if r.auc is not None:
            lines.append(f"#   {r.model:8s} {r.accuracy:6.3f} {r.auc:6.3f}")
    return "\n".join(lines)


def _load_scenarios(path_or_none) -> list[InterventionScenario]:
    if path_or_none is None:
        text = resources.files("glucotwin.data").joinpath("scenarios.json").read_text()
    else:
        p = Path(path_or_none)
        if not p.exists():
            raise FileNotFoundError(p)
        text = p.read_text()
    from .service import scenario_from_dict
    return [scenario_from_dict(doc) for doc in json.loads(text)]


def _load_params(args) -> ResponseParams:
    if getattr(args, "params", None):
        p = Path(args.params)
        if not p.exists():
            raise FileNotFoundError(p)
        return ResponseParams(**json.loads(p.read_text()))
    if getattr(args, "calibrate_to", None):
        p = Path(args.calibrate_to)
        if not p.exists():
            raise FileNotFoundError(p)
        doc = json.loads(p.read_text())
    else:
        doc = json.loads(resources.files("glucotwin.data")
                         .joinpath("calibration_targets.json").read_text())
    from .service import target_from_dict
    targets = [target_from_dict(t) for t in doc["targets"]]
    return calibrate(targets).params


def cmd_simulate(args) -> int:
    scenarios = _load_scenarios(args.scenarios)
    params = _load_params(args)
    if args.noise:
        params = replace(params, noise_sigma=args.noise_sigma)
    named, outcomes = [], []
    for s in scenarios:
        traj = simulate_scenario(params, s)
        named.append((s.label, traj))
        outcomes.append(compute_outcome(traj, params, label=s.label))
    ranking = rank_interventions(outcomes)
    if args.format == "json":
        _echo(args, json.dumps({
            "params": params.to_dict(),
            "outcomes": [o.to_dict() for o in outcomes],
            "ranking": [o.label for o in ranking],
        }, indent=2))
    else:
        _echo(args, outcomes_to_csv(outcomes))
        _echo(args, "# ranking: " + " > ".join(o.label for o in ranking))
    _write_out(args, "trajectories.csv", trajectories_to_csv(named))
    _write_out(args, "outcomes.csv", outcomes_to_csv(outcomes))
    _write_out(args, "outcomes.json", outcomes_to_json(outcomes))
    _write_out(args, "params.json", json.dumps(params.to_dict(), indent=2))
    if _plots_enabled(args):
        from . import plots
        plots.save_trajectories(named, Path(args.out) / "trajectories.png",
                                tir_low=params.tir_low, tir_high=params.tir_high)
        plots.save_outcomes(outcomes, Path(args.out) / "outcomes.png")
    return 0


def cmd_augment(args) -> int:
    if args.data:
        p = Path(args.data)
        if not p.exists():
            _warn(f"error: no such file: {p}")
            return 2
        ds = load_tabular(p.read_bytes())
    else:
        ds = load_benchmark()
    cfg = AugmentConfig(seed=args.seed, sequence_length=args.length,
                        noise_sigma=args.noise_sigma)
    sequences = augment(ds, cfg)
    csv_text = sequences_to_csv(sequences)
    if args.format == "json":
        _echo(args, sequences_to_json(sequences))
    else:
        _echo(args, csv_text)
    _write_out(args, "sequences.csv", csv_text)
    _write_out(args, "sequences.json", sequences_to_json(sequences))
    _write_out(args, "flattened.csv", tabular_to_csv(flatten(sequences)))
    return 0


def cmd_overlay(args) -> int:
    p = Path(args.cgm)
    if not p.exists():
        _warn(f"error: no such file: {p}")
        return 2
    from .ingest import impute_gaps, resample
    if p.suffix.lower() == ".xml":
        series = parse_cgm_xml(p.read_bytes())[0]
    else:
        series = parse_cgm_csv(p.read_bytes(), patient_id=p.stem)
    window = impute_gaps(resample(series, 5.0), "linear")
    anchor = datetime.fromisoformat(args.anchor)
    scenarios = _load_scenarios(args.scenarios)
    params = _load_params(args)
    overlays = overlay_counterfactual(window, anchor, params, scenarios,
                                      baseline_label=args.baseline_label)
    csv_text = trajectories_to_csv(overlays)
    _echo(args, csv_text)
    _write_out(args, "overlay.csv", csv_text)
    if _plots_enabled(args):
        from . import plots
        plots.save_trajectories(overlays, Path(args.out) / "overlay.png",
                                tir_low=params.tir_low, tir_high=params.tir_high,
                                title=f"Counterfactual overlay ({series.patient_id})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    ui = args.ui if args.ui and Path(args.ui).is_dir() else None
    app = create_app(args.workspace, ui_dir=ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning" if args.quiet else "info")
    return 0


def _format_summary(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2)
    keys = list(doc)
    return ",".join(keys) + "\n" + ",".join(str(doc[k]) for k in keys) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glucotwin",
                                     description="simulation-driven diabetes digital twin")
    parser.add_argument("--version", action="version", version=f"glucotwin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--quiet", action="store_true")
        if out:
            sp.add_argument("--out", default=None, help="directory for artifacts")
            sp.add_argument("--no-plots", action="store_true",
                            help="skip figure rendering next to --out artifacts")

    sp = sub.add_parser("ingest", help="parse CGM or tabular files and summarize")
    sp.add_argument("--kind", choices=("cgm-xml", "cgm-csv", "tabular"), required=True)
    sp.add_argument("paths", nargs="+")
    sp.add_argument("--skip-bad", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("gen-fixtures", help="generate the synthetic CGM fixture corpus")
    sp.add_argument("--out", required=True)
    sp.add_argument("--files", type=int, default=24)
    sp.add_argument("--records", type=int, default=166_533)
    sp.add_argument("--seed", type=int, default=7_2401)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_gen_fixtures)

    sp = sub.add_parser("benchmark", help="multi-seed model comparison table")
    sp.add_argument("--data", default=None, help="tabular CSV (default: packaged benchmark)")
    sp.add_argument("--seeds", type=int, default=20)
    sp.add_argument("--base-seed", type=int, default=42)
    common(sp)
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("simulate", help="counterfactual scenario trajectories and ranking")
    sp.add_argument("--scenarios", default=None, help="scenario JSON (default: packaged triple)")
    sp.add_argument("--calibrate-to", default=None, help="calibration targets JSON")
    sp.add_argument("--params", default=None, help="explicit response-params JSON")
    sp.add_argument("--noise", action="store_true")
    sp.add_argument("--noise-sigma", type=float, default=DEFAULT_NOISE_SIGMA)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("augment", help="expand tabular rows into temporal sequences")
    sp.add_argument("--data", default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--length", type=int, default=6)
    sp.add_argument("--noise-sigma", type=float, default=0.05)
    common(sp)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("overlay", help="counterfactual deltas over a real CGM window")
    sp.add_argument("--cgm", required=True)
    sp.add_argument("--anchor", required=True, help="ISO timestamp inside the window")
    sp.add_argument("--scenarios", default=None)
    sp.add_argument("--calibrate-to", default=None)
    sp.add_argument("--params", default=None)
    sp.add_argument("--baseline-label", default="baseline")
    common(sp)
    sp.set_defaults(func=cmd_overlay)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--workspace", default="glucotwin-workspace")
    sp.add_argument("--ui", default="frontend/dist")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _warn(f"error: no such file: {exc}")
        return 2
    except GlucotwinError as exc:
        _warn(f"error: {exc}")
        return 1
    except ValueError as exc:
        _warn(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
