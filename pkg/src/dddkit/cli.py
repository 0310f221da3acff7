"""Command-line interface: ``dddkit <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 pipeline error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset_io import PROFILES, SynthProfile, load_dataset, synth_dataset, write_session
from .errors import ConfigError, DataError, DDDError, InvalidProfile, PipelineError
from .features import write_features_csv
from .labeling import label_by_eeg, label_by_event, ratio_per_window
from .models import load_model
from .models.metrics import evaluate
from .pipeline import (METHODS, PipelineConfig, build_examples, compare, preset, report_json,
                       run_experiment, write_comparison, render_table)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_PIPELINE = 0, 2, 3, 4


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_PIPELINE


# -- helpers ------------------------------------------------------------------------

def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_json(args.config)
    else:
        cfg = preset(getattr(args, "method", None) or "rf", getattr(args, "preset", None) or "c2")
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "leakage_ack", False):
        cfg.leakage_ack = True
    return cfg.validate()


def _sessions(args):
    if not getattr(args, "data", None):
        raise ConfigError("--data is required for this command")
    return load_dataset(args.data)


def _dump(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# -- commands -----------------------------------------------------------------------

def cmd_synth(args):
    doc = {}
    if args.profile:
        p = Path(args.profile)
        if p.is_file():
            try:
                doc = json.loads(p.read_text())
            except json.JSONDecodeError as exc:
                raise InvalidProfile(f"profile {p} is not valid JSON: {exc}") from exc
        elif args.profile in PROFILES:
            doc = dict(PROFILES[args.profile])
        else:
            raise InvalidProfile(f"{args.profile!r} is neither a file nor one of {sorted(PROFILES)}")
    profile = SynthProfile.from_dict(doc)
    profile.validate()
    out = _out_dir(args)
    seed = 0 if args.seed is None else args.seed
    sessions = synth_dataset(profile, args.sessions, seed, args.subjects)
    for s in sessions:
        write_session(s, out / s.session_id)
    print(f"wrote {len(sessions)} session(s) to {out}")
    return EXIT_OK


def cmd_label(args):
    cfg = _config(args)
    out = _out_dir(args)
    spec = cfg.window_spec
    rows = []
    sessions = _sessions(args)
    per = [(s, spec.start_times(int(round(s.frame.duration * spec.rate)))) for s in sessions]
    if cfg.label_source == "eeg":
        ratios = [ratio_per_window(s.frame, spec, st) for s, st in per]
        groups = None
        if cfg.label_mode == "per_subject":
            groups = np.concatenate([[s.subject_id] * st.size for s, st in per])
        labels = label_by_eeg(np.concatenate(ratios), cfg.thresholds["awake_pct"],
                              cfg.thresholds["drowsy_pct"], groups)
    else:
        ratios = [np.full(st.size, np.nan) for _, st in per]
        labels = np.concatenate([label_by_event(st, s.events, cfg.event_margin, spec.length)
                                 for s, st in per])
    pos = 0
    for (s, st), r in zip(per, ratios):
        for k, t0 in enumerate(st):
            rows.append(f"{s.session_id},{s.subject_id},{float(t0 + s.offset)!r},"
                        f"{float(r[k])!r},{int(labels[pos])}")
            pos += 1
    path = out / "labels.csv"
    path.write_text("session_id,subject_id,start_time,ratio,label\n" + "\n".join(rows) + "\n")
    counts = {name: int(np.sum(labels == v)) for name, v in (("awake", 0), ("drowsy", 1),
                                                               ("unlabeled", -1))}
    print(f"{path}: {counts}")
    return EXIT_OK


def cmd_extract(args):
    cfg = _config(args)
    out = _out_dir(args)
    ex, counts = build_examples(_sessions(args), cfg)
    path = out / "features.csv"
    write_features_csv(path, ex.names, ex.X, {
        "session_id": list(ex.groups), "subject_id": list(ex.subjects),
        "start_time": [repr(float(t)) for t in ex.start_times], "label": list(ex.y)})
    print(f"{path}: {counts['examples']} examples x {ex.n_features} features")
    return EXIT_OK


def cmd_train(args):
    cfg = _config(args)
    out = _out_dir(args)
    report, model = run_experiment(cfg, _sessions(args), return_model=True)
    model.save(out / "model.json")
    (out / "report.json").write_text(report_json(report))
    m = report["metrics"]
    print(f"{cfg.method}: {report['config']['eval_target']} accuracy {m['accuracy']:.1f}% "
          f"AUC {m['auc'] if m['auc'] is None else round(m['auc'], 4)}; model -> {out / 'model.json'}")
    return EXIT_OK


def cmd_evaluate(args):
    cfg = _config(args)
    out = _out_dir(args)
    model = load_model(args.model)
    cfg.families = sorted({n.split("_")[0] for n in model.feature_names},
                          key=lambda f: ("statistical36", "wavelet8", "temporal15").index(f))
    ex, _ = build_examples(_sessions(args), cfg)
    ex = ex.columns(model.feature_names)
    metrics = evaluate(model, ex, args.threshold)
    doc = metrics.to_json()
    _dump(out / "metrics.json", doc)
    print(f"accuracy {metrics.accuracy:.1f}% precision {metrics.precision:.1f}% "
          f"recall {metrics.recall:.1f}% AUC {metrics.auc:.4f} on {metrics.n} examples")
    return EXIT_OK


def _compare_configs(args) -> list[PipelineConfig]:
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if isinstance(doc, dict):
            if set(doc) != {"configs"}:
                raise ConfigError("compare config must be a list or {\"configs\": [...]}")
            doc = doc["configs"]
        configs = [PipelineConfig.from_dict(d) for d in doc]
    else:
        methods = args.methods.split(",") if args.methods else list(METHODS)
        configs = [preset(m, args.preset or "c2") for m in methods]
    for c in configs:
        if args.seed is not None:
            c.seed = args.seed
        if args.leakage_ack:
            c.leakage_ack = True
    return configs


def cmd_compare(args):
    configs = _compare_configs(args)
    report = compare(configs, _sessions(args))
    out = write_comparison(report, _out_dir(args))
    sys.stdout.write(render_table(report))
    for w in report["warnings"]:
        print(f"warning: {w}")
    print(f"report -> {out / 'report.json'}")
    return EXIT_OK


def cmd_preset(args):
    cfg = preset(args.method, args.preset_config)
    if args.seed is not None:
        cfg.seed = args.seed
    text = json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        path = _out_dir(args) / f"{args.method}_{args.preset_config}.json"
        path.write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def _global_flags(parser, with_config=True, suppress=False):
    d = argparse.SUPPRESS if suppress else None
    if with_config:
        parser.add_argument("--config", default=d, help="pipeline config JSON")
    parser.add_argument("--seed", type=int, default=d, help="master seed")
    parser.add_argument("--data", default=d, help="manifest.json or a directory of sessions")
    parser.add_argument("--out", default=d, help="output directory")
    parser.add_argument("--leakage-ack", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="allow configs that evaluate on training data")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dddkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dddkit {__version__}")
    _global_flags(p)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, with_config=True):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, with_config=with_config, suppress=True)
        sp.set_defaults(func=func)
        return sp

    sp = add("synth", cmd_synth, "generate a synthetic dataset")
    sp.add_argument("--profile", help=f"profile JSON file or one of {sorted(PROFILES)}")
    sp.add_argument("--sessions", type=int, default=1)
    sp.add_argument("--subjects", type=int, default=None)

    for name, func, help_ in (("label", cmd_label, "write per-window labels"),
                              ("extract", cmd_extract, "write the labelled feature table"),
                              ("train", cmd_train, "run one experiment and save the model")):
        sp = add(name, func, help_)
        sp.add_argument("--method", choices=METHODS, help="preset method when --config is absent")
        sp.add_argument("--preset", choices=("c1", "c2"), help="preset configuration")

    sp = add("evaluate", cmd_evaluate, "score a saved model on a dataset")
    sp.add_argument("--model", required=True, help="model JSON written by train")
    sp.add_argument("--threshold", type=float, default=None)
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--preset", choices=("c1", "c2"))

    sp = add("compare", cmd_compare, "compare methods on shared data and split")
    sp.add_argument("--methods", help="comma-separated preset methods (default: all)")
    sp.add_argument("--preset", choices=("c1", "c2"))

    sp = add("preset", cmd_preset, "print a method preset as config JSON", with_config=False)
    sp.add_argument("--method", required=True, choices=METHODS)
    sp.add_argument("--config", dest="preset_config", choices=("c1", "c2"), default="c2")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DDDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
