"""Command-line interface.

Subcommands mirror the pipeline stages: ingest, features, cluster,
sonify, spectrogram, and a one-shot pipeline command that chains them.
Numeric output uses 6 significant digits. Exit codes: 0 success,
2 configuration error, 3 data error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import data as sample_data
from .errors import ConfigError, DataError
from .rr_ingest import (
    DEFAULT_RR_MAX_MS,
    DEFAULT_RR_MIN_MS,
    filter_artifacts,
    parse_rr_file,
    write_rr_file,
)
from .hrv_features import (
    DEFAULT_HOP_MS,
    DEFAULT_PNN_X_MS,
    DEFAULT_WINDOW_MS,
    concat_features,
    windowed_features,
)
from .clustering import FcmConfig, fcm, pairwise_plot_data, zscore
from .sonifier import (
    Formant,
    SonificationConfig,
    VowelState,
    read_wav,
    render_sonification,
    write_wav,
)
from .spectrogram import (
    DEFAULT_DFT_SIZE,
    DEFAULT_FLOOR_DB,
    DEFAULT_HOP,
    compute_spectrogram,
    render_png,
)

OUTDIR_ENV = "HRVSONIFY_OUTDIR"
FEATURES_HEADER = ["label", "window_start_ms", "avnn", "sdnn", "rmssd", "pnn50"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4


def _fmt(x) -> str:
    return f"{float(x):.6g}"


def _default_outdir() -> str:
    return os.environ.get(OUTDIR_ENV, ".")


def _load_toml(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_vowel_table(path) -> tuple[VowelState, VowelState]:
    """Read the two vowel states from a TOML key/value file.

    Expected layout: tables ``vowel_a`` and ``vowel_i``, each with
    sub-tables f1..f4 holding center_hz, bw_hz, gain_db.
    """
    doc = _load_toml(path)
    vowels = []
    for key in ("vowel_a", "vowel_i"):
        if key not in doc:
            raise ConfigError(f"{path}: missing [{key}] table")
        formants = []
        for fk in ("f1", "f2", "f3", "f4"):
            if fk not in doc[key]:
                raise ConfigError(f"{path}: missing [{key}.{fk}]")
            entry = doc[key][fk]
            try:
                formants.append(Formant(
                    center_hz=float(entry["center_hz"]),
                    bandwidth_hz=float(entry["bw_hz"]),
                    gain_db=float(entry["gain_db"]),
                ))
            except KeyError as exc:
                raise ConfigError(f"{path}: [{key}.{fk}] missing {exc}")
        vowels.append(VowelState(tuple(formants)))
    return vowels[0], vowels[1]


def write_features_csv(matrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(FEATURES_HEADER)
        for r in matrix.rows:
            w.writerow([r.record_label, _fmt(r.window_start_ms),
                        _fmt(r.avnn_ms), _fmt(r.sdnn_ms),
                        _fmt(r.rmssd_ms), _fmt(r.pnnx_pct)])


def read_features_csv(path):
    """Returns (labels, window_starts, (n,4) array) from a features CSV."""
    labels, starts, rows = [], [], []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FEATURES_HEADER:
            raise DataError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise DataError(f"{path}:{lineno}: expected 6 fields")
            try:
                labels.append(row[0])
                starts.append(float(row[1]))
                rows.append([float(v) for v in row[2:]])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field")
    if not rows:
        raise DataError(f"{path}: no feature rows")
    return labels, np.array(starts), np.array(rows)


def _write_matrix_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


# ---------------------------------------------------------------- stages


def _ingest_records(paths, unit, rr_min, rr_max):
    out = []
    for path in paths:
        series = parse_rr_file(path, unit=unit)
        series, removed = filter_artifacts(series, rr_min, rr_max)
        out.append((series, removed))
    return out


def cmd_ingest(args) -> int:
    os.makedirs(args.outdir, exist_ok=True)
    for series, removed in _ingest_records(args.records, args.unit,
                                           args.rr_min_ms, args.rr_max_ms):
        dest = os.path.join(args.outdir, f"{series.label}.rr.txt")
        write_rr_file(series, dest)
        print(f"{series.label}: {len(series)} intervals kept, "
              f"{removed} removed -> {dest}")
    return EXIT_OK


def cmd_features(args) -> int:
    records = _ingest_records(args.records, args.unit,
                              args.rr_min_ms, args.rr_max_ms)
    matrices = [
        windowed_features(series, args.window_s * 1000.0,
                          args.hop_s * 1000.0, args.pnn_x_ms,
                          strict=args.strict_pnn)
        for series, _ in records
    ]
    matrix = concat_features(matrices)
    write_features_csv(matrix, args.output)
    print(f"{len(matrix)} feature rows -> {args.output}")
    return EXIT_OK


def _run_clustering(features, cfg):
    normalized, means, stds = zscore(features,
                                     column_names=FEATURES_HEADER[2:])
    result = fcm(normalized, cfg)
    return normalized, result


def _write_cluster_outputs(outdir, labels, normalized, result):
    paths = []
    centers_path = os.path.join(outdir, "centers.csv")
    _write_matrix_csv(centers_path, ["cluster"] + FEATURES_HEADER[2:],
                      [[j + 1] + [_fmt(v) for v in row]
                       for j, row in enumerate(result.centers)])
    paths.append(centers_path)

    partition_path = os.path.join(outdir, "partition.csv")
    _write_matrix_csv(partition_path,
                      ["cluster"] + [f"p{i}" for i in range(len(labels))],
                      [[j + 1] + [_fmt(v) for v in row]
                       for j, row in enumerate(result.partition)])
    paths.append(partition_path)

    for (xf, yf), pts, hard in pairwise_plot_data(normalized,
                                                  result.partition):
        pair_path = os.path.join(outdir, f"pairs_{xf}_vs_{yf}.csv")
        _write_matrix_csv(pair_path, [xf, yf, "cluster"],
                          [[_fmt(p[0]), _fmt(p[1]), int(c) + 1]
                           for p, c in zip(pts, hard)])
        paths.append(pair_path)
    return paths


def cmd_cluster(args) -> int:
    labels, _, features = read_features_csv(args.features_csv)
    cfg = FcmConfig(n_clusters=args.clusters, fuzzifier_m=args.fuzzifier,
                    max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    normalized, result = _run_clustering(features, cfg)
    os.makedirs(args.outdir, exist_ok=True)
    paths = _write_cluster_outputs(args.outdir, labels, normalized, result)
    print(f"converged={result.converged} after {result.iterations_run} "
          f"iteration(s), final objective {_fmt(result.objective_trace[-1])}")
    for p in paths:
        print(p)
    return EXIT_OK


def _sonification_config(args) -> SonificationConfig:
    kwargs = dict(seg_dur_s=args.seg_dur, f0_min_hz=args.f0_min,
                  f0_max_hz=args.f0_max, glide_ms=args.glide_ms)
    if args.vowel_table:
        vowel_a, vowel_i = load_vowel_table(args.vowel_table)
        kwargs.update(vowel_a=vowel_a, vowel_i=vowel_i)
    return SonificationConfig(**kwargs)


def _feature_series(labels, starts, features, feature, label):
    col = {"avnn": 0, "sdnn": 1, "rmssd": 2, "pnn50": 3}.get(feature)
    if col is None:
        raise ConfigError(f"unknown feature {feature!r}")
    mask = np.array([l == label for l in labels]) if label else \
        np.ones(len(labels), dtype=bool)
    if not mask.any():
        raise DataError(f"no feature rows for label {label!r}")
    order = np.argsort(starts[mask], kind="stable")
    return features[mask][order, col]


def cmd_sonify(args) -> int:
    labels, starts, features = read_features_csv(args.features_csv)
    series = _feature_series(labels, starts, features,
                             args.feature, args.label)
    config = _sonification_config(args)
    buffer = render_sonification(series, config)
    write_wav(buffer, args.output)
    print(f"{len(series)} values -> {len(buffer)} samples -> {args.output}")
    return EXIT_OK


def cmd_spectrogram(args) -> int:
    buffer = read_wav(args.wav)
    spec = compute_spectrogram(buffer, dft_size=args.dft, hop=args.hop,
                               floor_db=args.floor_db)
    render_png(spec, args.output, height_px=args.height, width_px=args.width)
    print(f"{spec.n_frames} frames x {spec.n_bins} bins -> {args.output}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    if args.config:
        doc = _load_toml(args.config)
        _apply_config_file(args, doc)
    record_paths = args.records or sample_data.sample_record_paths()
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    inventory = []
    report = [
        "hrvsonify pipeline report",
        "",
        "parameters:",
        f"  unit={args.unit} rr_min_ms={_fmt(args.rr_min_ms)} "
        f"rr_max_ms={_fmt(args.rr_max_ms)}",
        f"  window_s={_fmt(args.window_s)} hop_s={_fmt(args.hop_s)} "
        f"pnn_x_ms={_fmt(args.pnn_x_ms)} strict_pnn={args.strict_pnn}",
        f"  clusters={args.clusters} fuzzifier={_fmt(args.fuzzifier)} "
        f"max_iter={args.max_iter} tol={_fmt(args.tol)} seed={args.seed}",
        f"  feature={args.feature} seg_dur_s={_fmt(args.seg_dur)} "
        f"f0={_fmt(args.f0_min)}..{_fmt(args.f0_max)} Hz "
        f"glide_ms={_fmt(args.glide_ms)}",
        f"  dft={args.dft} hop={args.hop} floor_db={_fmt(args.floor_db)} "
        f"image={args.width}x{args.height}",
        "",
    ]

    try:
        records = _ingest_records(record_paths, args.unit,
                                  args.rr_min_ms, args.rr_max_ms)
    except (ConfigError, DataError, OSError) as exc:
        raise type(exc)(f"ingest stage: {exc}") from exc

    try:
        matrices = {
            series.label: windowed_features(
                series, args.window_s * 1000.0, args.hop_s * 1000.0,
                args.pnn_x_ms, strict=args.strict_pnn)
            for series, _ in records
        }
        combined = concat_features(matrices.values())
    except DataError as exc:
        raise DataError(f"features stage: {exc}") from exc

    features_path = os.path.join(outdir, "features.csv")
    write_features_csv(combined, features_path)
    inventory.append(features_path)

    try:
        cfg = FcmConfig(n_clusters=args.clusters, fuzzifier_m=args.fuzzifier,
                        max_iter=args.max_iter, tol=args.tol, seed=args.seed)
        normalized, result = _run_clustering(combined.to_array(), cfg)
    except (ConfigError, DataError) as exc:
        raise type(exc)(f"clustering stage: {exc}") from exc
    inventory += _write_cluster_outputs(outdir, combined.labels,
                                        normalized, result)

    try:
        son_config = _sonification_config(args)
        col = {"avnn": 0, "sdnn": 1, "rmssd": 2, "pnn50": 3}[args.feature]
        for label, matrix in matrices.items():
            series = matrix.to_array()[:, col]
            buffer = render_sonification(series, son_config)
            wav_path = os.path.join(outdir, f"{label}.wav")
            write_wav(buffer, wav_path)
            inventory.append(wav_path)
            spec = compute_spectrogram(buffer, dft_size=args.dft,
                                       hop=args.hop, floor_db=args.floor_db)
            png_path = os.path.join(outdir, f"{label}.png")
            render_png(spec, png_path, height_px=args.height,
                       width_px=args.width)
            inventory += [png_path, png_path + ".txt"]
    except KeyError as exc:
        raise ConfigError(f"sonification stage: unknown feature {exc}") from exc
    except (ConfigError, DataError) as exc:
        raise type(exc)(f"sonification stage: {exc}") from exc

    report += [
        "clustering:",
        f"  iterations_run={result.iterations_run}",
        f"  final_objective={_fmt(result.objective_trace[-1])}",
        f"  converged={result.converged}",
        "",
        "artifact-filter removals:",
    ]
    report += [f"  {series.label}: {removed}" for series, removed in records]
    report += ["", "file inventory:"]
    report += [f"  {os.path.relpath(p, outdir)}" for p in inventory]

    report_path = os.path.join(outdir, "report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(report) + "\n")
    inventory.append(report_path)
    for p in inventory:
        print(p)
    return EXIT_OK


def _apply_config_file(args, doc) -> None:
    """Fill argparse values from a TOML document where flags were left
    at their defaults (explicit flags win)."""
    sections = {
        "ingest": {"unit": "unit", "rr_min_ms": "rr_min_ms",
                   "rr_max_ms": "rr_max_ms"},
        "features": {"window_s": "window_s", "hop_s": "hop_s",
                     "pnn_x_ms": "pnn_x_ms", "strict_pnn": "strict_pnn"},
        "cluster": {"clusters": "clusters", "fuzzifier": "fuzzifier",
                    "max_iter": "max_iter", "tol": "tol", "seed": "seed"},
        "sonify": {"feature": "feature", "seg_dur_s": "seg_dur",
                   "f0_min_hz": "f0_min", "f0_max_hz": "f0_max",
                   "glide_ms": "glide_ms", "vowel_table": "vowel_table"},
        "spectrogram": {"dft": "dft", "hop": "hop", "floor_db": "floor_db",
                        "width": "width", "height": "height"},
    }
    explicit = getattr(args, "_explicit", set())
    for section, mapping in sections.items():
        table = doc.get(section, {})
        if not isinstance(table, dict):
            raise ConfigError(f"config [{section}] must be a table")
        for key, attr in mapping.items():
            if key in table and attr not in explicit:
                setattr(args, attr, table[key])
    if "records" in doc and not args.records:
        entries = doc["records"]
        if not isinstance(entries, list):
            raise ConfigError("config 'records' must be an array of tables")
        args.records = [e["path"] for e in entries]
    if "output" in doc and "dir" in doc["output"] and "outdir" not in explicit:
        args.outdir = doc["output"]["dir"]


class _Track(argparse.Action):
    """Store action that records explicitly-passed flags, so config-file
    values never override what was typed on the command line."""

    def __call__(self, parser, namespace, values, option_string=None):
        explicit = getattr(namespace, "_explicit", None)
        if explicit is None:
            explicit = set()
            setattr(namespace, "_explicit", explicit)
        explicit.add(self.dest)
        setattr(namespace, self.dest,
                values if values is not None else True)


class _TrackTrue(_Track):
    def __init__(self, option_strings, dest, **kwargs):
        kwargs.setdefault("nargs", 0)
        super().__init__(option_strings, dest, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        super().__call__(parser, namespace, True, option_string)


def _add_ingest_args(p):
    p.add_argument("--unit", choices=["s", "ms"], default="ms",
                   action=_Track, help="unit of the RR values in the files")
    p.add_argument("--rr-min-ms", type=float, default=DEFAULT_RR_MIN_MS,
                   action=_Track, help="artifact filter lower bound")
    p.add_argument("--rr-max-ms", type=float, default=DEFAULT_RR_MAX_MS,
                   action=_Track, help="artifact filter upper bound")


def _add_feature_args(p):
    p.add_argument("--window-s", type=float,
                   default=DEFAULT_WINDOW_MS / 1000.0, action=_Track)
    p.add_argument("--hop-s", type=float, default=DEFAULT_HOP_MS / 1000.0,
                   action=_Track)
    p.add_argument("--pnn-x-ms", type=float, default=DEFAULT_PNN_X_MS,
                   action=_Track)
    p.add_argument("--strict-pnn", action=_TrackTrue, default=False,
                   help="use strict '>' instead of '>=' for pNNx")


def _add_cluster_args(p):
    p.add_argument("--clusters", type=int, default=3, action=_Track)
    p.add_argument("--fuzzifier", type=float, default=2.0, action=_Track)
    p.add_argument("--max-iter", type=int, default=100, action=_Track)
    p.add_argument("--tol", type=float, default=1e-5, action=_Track)
    p.add_argument("--seed", type=int, default=0, action=_Track)


def _add_sonify_args(p):
    p.add_argument("--feature", default="avnn",
                   choices=["avnn", "sdnn", "rmssd", "pnn50"], action=_Track)
    p.add_argument("--seg-dur", type=float, default=0.5, action=_Track)
    p.add_argument("--f0-min", type=float, default=110.0, action=_Track)
    p.add_argument("--f0-max", type=float, default=440.0, action=_Track)
    p.add_argument("--glide-ms", type=float, default=30.0, action=_Track)
    p.add_argument("--vowel-table", default=None, action=_Track,
                   help="TOML file with [vowel_a]/[vowel_i] formant tables")


def _add_spectrogram_args(p):
    p.add_argument("--dft", type=int, default=DEFAULT_DFT_SIZE, action=_Track)
    p.add_argument("--hop", type=int, default=DEFAULT_HOP, action=_Track)
    p.add_argument("--floor-db", type=float, default=DEFAULT_FLOOR_DB,
                   action=_Track)
    p.add_argument("--width", type=int, default=900, action=_Track)
    p.add_argument("--height", type=int, default=300, action=_Track)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrvsonify", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and artifact-filter records")
    p.add_argument("records", nargs="+")
    _add_ingest_args(p)
    p.add_argument("-o", "--outdir", default=_default_outdir(), action=_Track)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="windowed HRV features to CSV")
    p.add_argument("records", nargs="+")
    _add_ingest_args(p)
    _add_feature_args(p)
    p.add_argument("-o", "--output", default="features.csv", action=_Track)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("cluster", help="z-score + fuzzy c-means on features")
    p.add_argument("features_csv")
    _add_cluster_args(p)
    p.add_argument("-o", "--outdir", default=_default_outdir(), action=_Track)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sonify", help="render a feature series to WAV")
    p.add_argument("features_csv")
    p.add_argument("--label", default=None, action=_Track,
                   help="record label to sonify (default: all rows)")
    _add_sonify_args(p)
    p.add_argument("-o", "--output", default="out.wav", action=_Track)
    p.set_defaults(func=cmd_sonify)

    p = sub.add_parser("spectrogram", help="WAV to spectrogram PNG")
    p.add_argument("wav")
    _add_spectrogram_args(p)
    p.add_argument("-o", "--output", default="out.png", action=_Track)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("pipeline", help="ingest through spectrogram")
    p.add_argument("records", nargs="*",
                   help="RR record files (default: bundled samples)")
    p.add_argument("--config", default=None,
                   help="TOML pipeline configuration file")
    _add_ingest_args(p)
    _add_feature_args(p)
    _add_cluster_args(p)
    _add_sonify_args(p)
    _add_spectrogram_args(p)
    p.add_argument("-o", "--outdir", default=_default_outdir(), action=_Track)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
