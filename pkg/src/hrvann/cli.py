"""Command-line entry point: synth, features, experiment, predict, report."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .config import PipelineConfig, load_config, with_overrides, write_config
from .errors import HrvError
from .features import FEATURE_NAMES, extract_cohort, read_feature_table, write_feature_table
from .ingest import load_cohort_lenient, read_rr_file
from .reports import atomic_write, format_table1, read_csv, write_report

log = logging.getLogger("hrvann")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _schemes(values):
    if not values:
        return None
    out = []
    for v in values:
        out.extend(s for s in v.split(",") if s)
    return tuple(dict.fromkeys(out))


def _effective_config(args) -> PipelineConfig:
    cfg = load_config(getattr(args, "config", None))
    return with_overrides(
        cfg,
        master_seed=getattr(args, "seed", None),
        out_dir=getattr(args, "out", None),
        manifest=getattr(args, "manifest", None),
        features_table=getattr(args, "features", None),
        schemes=_schemes(getattr(args, "scheme", None)),
        hidden_sizes=getattr(args, "hidden", None),
        repetitions=getattr(args, "reps", None),
    )


def cmd_synth(args) -> int:
    from .synth import CohortSpec, write_cohort

    try:
        data = yaml.safe_load(Path(args.spec).read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise HrvError(f"cannot read spec {args.spec}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise HrvError(f"spec {args.spec} is not valid YAML/JSON: {exc}") from None
    if not isinstance(data, dict):
        raise HrvError(f"spec {args.spec} must hold a mapping")
    if args.seed is not None:
        data["master_seed"] = args.seed
    spec = CohortSpec.from_dict(data)
    manifest = write_cohort(spec, args.out)
    print(f"wrote {spec.n_normal + spec.n_ihd} subjects to {manifest}")
    return 0


def build_features(cfg: PipelineConfig, jobs: int = 1, dump_dir=None) -> Path:
    if not cfg.manifest:
        raise HrvError("no manifest given (use --manifest or set 'manifest' in the config)")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records, rejects = load_cohort_lenient(cfg.manifest)
    params = cfg.feature_params()
    if dump_dir is not None:
        from .features import extract_subject

        for r in records:
            try:
                extract_subject(r, params, dump_dir)
            except HrvError:
                pass
    rows, fail = extract_cohort(records, params, jobs)
    rejects = rejects + fail
    table = out / "features.csv"
    tmp = table.with_name("features.csv.tmp")
    write_feature_table(tmp, rows)
    tmp.replace(table)
    lines = ["subject_id,reason\n"] + [f"{sid},\"{reason.replace(chr(34), chr(39))}\"\n" for sid, reason in rejects]
    atomic_write(out / "rejects.csv", "".join(lines))
    for sid, reason in rejects:
        log.warning("rejected %s: %s", sid, reason)
    if not rows:
        raise HrvError("no subject survived preprocessing; see rejects.csv")
    return table


def cmd_features(args) -> int:
    cfg = _effective_config(args)
    table = build_features(cfg, args.jobs, args.dump_dir)
    n = len(read_csv(table))
    print(f"wrote {n} subjects to {table}")
    return 0


def run_experiment_files(cfg: PipelineConfig, jobs: int = 1) -> dict:
    from .evaluation import run_experiment
    from .model import ModelBundle

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = Path(cfg.features_table) if cfg.features_table else out / "features.csv"
    if not table.exists():
        if not cfg.manifest:
            raise HrvError(f"feature table {table} not found and no manifest to build it from")
        table = build_features(cfg, jobs)
    ids, X, y = read_feature_table(table)
    ecfg = cfg.experiment_config()
    report = run_experiment(X, y, FEATURE_NAMES, ecfg, jobs=jobs)
    write_config(out / "config.json", cfg)
    (out / "schemes").mkdir(exist_ok=True)
    (out / "models").mkdir(exist_ok=True)
    input_names = {}
    for kind, scheme in report.schemes.items():
        scheme.save(out / "schemes" / f"{kind}.json")
        input_names[kind] = scheme.input_names
        print(f"{kind}: {scheme.describe()}")
    params = cfg.feature_params()
    for kind in dict.fromkeys(r.scheme for r in report.results):
        best = report.best(kind)
        if best is None:
            continue
        scheme = report.schemes.get(kind) or best.scheme_obj
        input_names.setdefault(kind, scheme.input_names)
        meta = {"scheme": kind, "hidden": best.hidden, "rep": best.rep, "seed": best.seed,
                "test_acc": best.metrics.acc, "test_auc": best.auc}
        ModelBundle(params, scheme, best.input_stats, best.network, meta).save(out / "models" / f"{kind}.json")
    paths = write_report(out, report, input_names)
    print(format_table1(read_csv(paths["table1.csv"])))
    for r in read_csv(paths["selected.csv"]):
        if r["overall_best"] == "1":
            print(f"selected: {r['scheme']} with {r['hidden']} hidden neurons (acc {float(r['acc']):.1f} %)")
    return paths


def cmd_experiment(args) -> int:
    cfg = _effective_config(args)
    run_experiment_files(cfg, args.jobs)
    if args.figures:
        cmd_report(argparse.Namespace(out=cfg.out_dir))
    return 0


def cmd_predict(args) -> int:
    from .model import ModelBundle

    model = ModelBundle.load(args.model)
    rr = read_rr_file(args.rr_file)
    gender = {"m": "male", "male": "male", "f": "female", "female": "female"}.get(args.gender.lower())
    if gender is None:
        raise HrvError(f"gender must be M or F, got {args.gender!r}")
    cls, score = model.predict_rr(rr, args.age, gender)
    print(f"class={'ihd' if cls else 'normal'} score={score:.6f}")
    return 0


def cmd_report(args) -> int:
    from .plotting import plot_distributions, plot_roc

    out = Path(args.out or "out")
    for name in ("repetitions.csv", "selected.csv", "roc_best.csv", "table1.csv"):
        if not (out / name).exists():
            raise HrvError(f"{out / name} not found; run the experiment first")
    print(format_table1(read_csv(out / "table1.csv")))
    p1 = plot_distributions(out)
    p2 = plot_roc(out)
    print(f"figures: {p1} {p2}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON pipeline config")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--out", help="output directory")

    p = argparse.ArgumentParser(prog="hrvann", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic cohort")
    s.add_argument("spec", help="cohort spec (YAML/JSON)")
    s.set_defaults(func=cmd_synth, out_required=True)

    f = sub.add_parser("features", parents=[common], help="build the per-subject feature table")
    f.add_argument("--manifest")
    f.add_argument("--dump-dir", help="write corrected series and PSD debug tables here")
    f.set_defaults(func=cmd_features)

    e = sub.add_parser("experiment", parents=[common], help="run the repeated-split ANN protocol")
    e.add_argument("--manifest")
    e.add_argument("--features", help="existing feature table")
    e.add_argument("--scheme", action="append", help="pca, stepwise or all (repeat or comma-separate)")
    e.add_argument("--hidden", type=_int_list, help="hidden sizes, e.g. 2,3,4")
    e.add_argument("--reps", type=int, help="repetitions per configuration")
    e.add_argument("--figures", action="store_true", help="also render figures")
    e.set_defaults(func=cmd_experiment)

    pr = sub.add_parser("predict", help="classify one RR recording")
    pr.add_argument("model")
    pr.add_argument("rr_file")
    pr.add_argument("--age", type=int, required=True)
    pr.add_argument("--gender", required=True, help="M or F")
    pr.set_defaults(func=cmd_predict)

    r = sub.add_parser("report", parents=[common], help="print Table-1 summary and render figures")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "out_required", False) and not args.out:
        parser.error(f"{args.command}: --out is required")
    try:
        return args.func(args)
    except HrvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
