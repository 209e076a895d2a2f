"""Command-line entry point: ``spate {generate,encode,quality,qnn}``.

Exit codes: 0 ok, 2 usage or invalid argument, 3 data error, 4 capacity
error, 5 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, data, harness
from .encoders import KINDS, EncoderConfig, embed, spate_params_batch
from .errors import CapacityError, DatasetError, DegenerateInputError, InvalidArgumentError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CAPACITY, EXIT_INTERNAL = 0, 2, 3, 4, 5

log = logging.getLogger("spate")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_dataset_flags(p):
    p.add_argument("--dataset", help=f"synthetic {harness.SYNTHETIC} or real {harness.REAL} (read from $"
                   f"{data.DATA_DIR_ENV}/<name>.csv)")
    p.add_argument("--csv", help="path to a CSV dataset (overrides --dataset lookup)")
    p.add_argument("--label-column", help="label column name or 0-based index (default: label)")
    p.add_argument("--config", help="JSON file mirroring ExperimentConfig; flags override it")
    p.add_argument("--seed", type=int, help="global seed (default 42)")


def _add_study_flags(p, with_grid: bool):
    _add_dataset_flags(p)
    p.add_argument("--encoders", type=_csv_list, help="comma-separated subset of " + ",".join(KINDS))
    p.add_argument("--folds", type=int, help="number of stratified folds (default 5)")
    if with_grid:
        p.add_argument("--grid", help="JSON file or inline JSON with gain/sigma/v_th/tau lists")
    p.add_argument("--no-tune", action="store_true", help="skip train-split SPATE tuning")
    p.add_argument("--out", help="output path stem; writes <stem>.csv and/or <stem>.json")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--jobs", type=int, default=1, help="worker processes over folds (output is unaffected)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spate", description="Spike-driven temporal quantum encoding benchmarks.")
    p.add_argument("--version", action="version", version=f"spate {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    g.add_argument("--dataset", required=True, choices=harness.SYNTHETIC)
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--noise", type=float)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", help="CSV path (stdout if omitted)")

    e = sub.add_parser("encode", help="embed one sample and print its probability vector")
    _add_dataset_flags(e)
    e.add_argument("--encoder", required=True)
    e.add_argument("--sample-index", type=int, default=0)
    e.add_argument("--out", help="JSON path (stdout if omitted)")

    _add_study_flags(sub.add_parser("quality", help="encoding-quality study"), with_grid=True)
    _add_study_flags(sub.add_parser("qnn", help="hybrid QNN classification study"), with_grid=True)
    return p


def _load_json_arg(text: str):
    path = Path(text)
    if path.exists():
        return json.loads(path.read_text())
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"not a JSON file or inline JSON: {text!r}") from exc


def build_config(args, study: str) -> harness.ExperimentConfig:
    base = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise InvalidArgumentError(f"config file not found: {path}")
        base = json.loads(path.read_text())
        base = base.get("manifest", {}).get("config", base)  # accept a previous report as config
    base["study"] = study
    ds = dict(base.get("dataset", {}))
    if args.dataset:
        if args.dataset not in harness.SYNTHETIC + harness.REAL and not args.csv:
            raise InvalidArgumentError(f"unknown dataset {args.dataset!r}")
        ds["name"] = args.dataset
        if not args.csv:
            ds["csv"] = None
    if args.csv:
        ds["csv"] = args.csv
        if not args.dataset:
            ds["name"] = Path(args.csv).stem
    if args.label_column is not None:
        ds["label_column"] = args.label_column
    base["dataset"] = ds
    if args.seed is not None:
        base["seed"] = args.seed
    for flag, key in (("encoders", "encoders"), ("folds", "n_folds")):
        val = getattr(args, flag, None)
        if val is not None:
            base[key] = val
    if getattr(args, "grid", None):
        base["grid"] = _load_json_arg(args.grid)
    if getattr(args, "no_tune", False):
        base["tune"] = False
    return harness.ExperimentConfig.from_dict(base)


def manifest(cfg: harness.ExperimentConfig, outputs: list[str]) -> dict:
    return {
        "config": cfg.to_dict(),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": outputs,
    }


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    spec = harness.DatasetSpec(name=args.dataset, n=args.n, noise=args.noise)
    ds = spec.load(args.seed)
    lines = [",".join([f"x{i}" for i in range(ds.n_features)] + ["label"])]
    lines += [",".join([repr(float(v)) for v in row] + [str(int(lab))]) for row, lab in zip(ds.X, ds.y)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_encode(args) -> int:
    """Embed one sample with preprocessing fitted on the whole dataset.

    Uses the quality-study register (PCA cap 8, ``n = d_enc`` for the
    baselines) and the untuned SPATE constants unless the config overrides them.
    """
    kind = args.encoder.lower()
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown encoder {args.encoder!r}; choose from {KINDS}")
    cfg = build_config(args, "quality")
    ds = cfg.dataset.load(cfg.seed)
    if not 0 <= args.sample_index < ds.n_samples:
        raise InvalidArgumentError(f"sample index {args.sample_index} outside [0, {ds.n_samples})")
    tf = harness.fit_transform(ds.X, cfg.budget.quality_pca_cap, minmax=(kind == "spate"))
    x = tf.apply(ds.X[args.sample_index:args.sample_index + 1])
    d = x.shape[1]
    doc = {"dataset": ds.name, "encoder": kind, "sample_index": args.sample_index,
           "label": int(ds.y[args.sample_index]), "d_enc": d}
    if kind == "spate":
        ecfg = cfg.spate.encoder()
        streams = harness.sample_streams(cfg.seed, [args.sample_index])
        p = embed(x, ecfg, streams)[0]
        per_seed = spate_params_batch(x, ecfg, streams)
        doc["n_qubits"] = d + ecfg.lif.n_t
        doc["spate_params"] = [{"seed": s, "alpha": sp.alpha[0].tolist(), "phi": sp.phi[0].tolist(),
                                "bins": sp.bins[0].tolist()} for s, sp in enumerate(per_seed)]
        doc["encoder_config"] = ecfg.to_dict()
    else:
        p = embed(x, EncoderConfig(kind, n_qubits=d))[0]
        doc["n_qubits"] = d
    doc["p"] = p.tolist()
    doc["manifest"] = manifest(cfg, [args.out] if args.out else [])
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _print_table(reports):
    cols = reports[0].columns
    print("dataset  encoder    " + "  ".join(f"{c:>17}" for c in cols))
    for r in reports:
        agg = r.aggregate()
        cells = "  ".join(f"{agg[c]['mean']:>8.4f}±{agg[c]['std']:<8.4f}" for c in cols)
        print(f"{r.dataset:<8} {r.encoder:<10} {cells}")


def cmd_study(args, study: str) -> int:
    cfg = build_config(args, study)
    if args.jobs < 1:
        raise InvalidArgumentError("--jobs must be at least 1")
    reports = harness.run_study(cfg, jobs=args.jobs)
    outputs = []
    if args.out:
        stem = Path(args.out)
        if stem.suffix in (".csv", ".json"):
            stem = stem.with_suffix("")
        fmts = ("csv", "json") if args.format == "both" else (args.format,)
        outputs = [str(stem.with_suffix("." + f)) for f in fmts]
    man = manifest(cfg, outputs)
    for path in outputs:
        if path.endswith(".csv"):
            _emit(harness.reports_to_csv(reports, cfg, man), path)
        else:
            _emit(harness.reports_to_json(reports, cfg, man), path)
    if not args.out:
        if args.format == "json":
            _emit(harness.reports_to_json(reports, cfg, man), None)
        elif args.format == "csv":
            _emit(harness.reports_to_csv(reports, cfg, man), None)
        else:
            _print_table(reports)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "encode":
            return cmd_encode(args)
        return cmd_study(args, args.command)
    except CapacityError as exc:
        print(f"spate: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DatasetError, DegenerateInputError) as exc:
        print(f"spate: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgumentError, json.JSONDecodeError) as exc:
        print(f"spate: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"spate: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
