"""Command-line interface.

Subcommands cover the whole workflow: ``validate`` checks input files,
``features`` and ``build-panel`` materialize the minute tables, ``regress``
runs a bundled or custom table specification, ``compare-deepfake`` scores
original/face-swap clip pairs, ``select-representative`` picks each chair's
most typical conference, and ``synth-corpus`` writes a synthetic input set.

Every CSV/JSON output starts with a provenance record — the SHA-256 of the
resolved configuration and of every input file — so identical inputs always
produce byte-identical outputs (no timestamps anywhere).
"""

from __future__ import annotations

import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import pandas as pd

from . import ingest
from .econ import (RegressionResult, apply_se_override, load_table_spec,
                   render_table, run_table, table_to_frame)
from .facefeat import FacialFeatureBuilder, minmax_deepfake_deltas
from .frames import ChairFrameFilter
from .ingest import (EMOTIONS, IngestError, parse_frame_scores, parse_lexicon,
                     parse_meeting_meta, parse_minute_bars, parse_transcript)
from .market import MarketFeatureBuilder
from .panel import build_panel, column_catalog, display_label
from .select import representative_meeting
from .synth import make_corpus
from .textfeat import NlpFeatureBuilder

CANONICAL_FILES = {
    "frame_scores": ("frame_scores.jsonl", parse_frame_scores),
    "transcript": ("transcript.jsonl", parse_transcript),
    "bars": ("bars.csv", parse_minute_bars),
    "meetings": ("meetings.csv", parse_meeting_meta),
}

DEFAULT_CONFIG: Dict = {
    "similarity_threshold": 0.5,
    "require_face": True,
    "window_minutes": 3.0,
    "min_frames": 5,
    "units": "pct",
    "normalize_ticks": False,
    "anchor_slack_minutes": 2.0,
    "variance_target": 0.95,
}

BUNDLED_TABLES = ("table4", "table5", "table6", "table7", "table8", "table9")


# ---------------------------------------------------------------------------
# provenance and IO helpers
# ---------------------------------------------------------------------------


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path) -> str:
    return _sha256_bytes(Path(path).read_bytes())


def resolve_config(config_path: Optional[str], overrides: Dict) -> Dict:
    """defaults <- JSON config file <- explicit command-line flags."""
    cfg = dict(DEFAULT_CONFIG)
    if config_path:
        loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise click.ClickException(
                f"unknown configuration keys: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def provenance(cfg: Dict, inputs: Dict[str, Path]) -> Dict[str, str]:
    record = {"config_sha256": _sha256_bytes(
        json.dumps(cfg, sort_keys=True).encode("utf-8"))}
    for name in sorted(inputs):
        record[f"input_{name}_sha256"] = _sha256_file(inputs[name])
    return record


def _provenance_lines(record: Dict[str, str]) -> List[str]:
    return [f"# {key}={value}" for key, value in record.items()]


def write_csv(df: pd.DataFrame, path: Path, record: Dict[str, str]) -> None:
    body = df.to_csv(index=False)
    path.write_text("\n".join(_provenance_lines(record)) + "\n" + body,
                    encoding="utf-8")


def write_json(obj, path: Path, record: Dict[str, str]) -> None:
    payload = {"provenance": record, "data": obj}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def read_panel(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _csv_ready(df: pd.DataFrame) -> pd.DataFrame:
    out = df.copy()
    for col in out.columns:
        if pd.api.types.is_datetime64_any_dtype(out[col]):
            out[col] = out[col].map(lambda t: t.isoformat())
        elif out[col].map(lambda v: hasattr(v, "isoformat")).any():
            out[col] = out[col].map(
                lambda v: v.isoformat() if hasattr(v, "isoformat") else v)
    return out


# ---------------------------------------------------------------------------
# pipeline assembly
# ---------------------------------------------------------------------------


def _input_paths(input_dir: Path) -> Dict[str, Path]:
    return {name: input_dir / fname
            for name, (fname, _) in CANONICAL_FILES.items()}


def _load_inputs(input_dir: Path):
    paths = _input_paths(input_dir)
    missing = [str(p) for p in paths.values() if not p.exists()]
    if missing:
        raise click.ClickException(f"missing input files: {missing}")
    frames = parse_frame_scores(paths["frame_scores"])
    segments = parse_transcript(paths["transcript"])
    bars = parse_minute_bars(paths["bars"])
    meetings = parse_meeting_meta(paths["meetings"])
    return frames, segments, bars, meetings, paths


def _concat_by_meeting(fn, items: Sequence, jobs: int) -> pd.DataFrame:
    """Apply ``fn`` per meeting (optionally in a thread pool) and concatenate
    in meeting-id order, so the output ordering never depends on scheduling."""
    groups: Dict[str, list] = {}
    for item in items:
        groups.setdefault(item.meeting_id, []).append(item)
    keys = sorted(groups)
    if jobs <= 1:
        parts = [fn(groups[k]) for k in keys]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {k: pool.submit(fn, groups[k]) for k in keys}
            parts = [futures[k].result() for k in keys]
    return pd.concat(parts, ignore_index=True) if parts else fn([])


def _build_features(frames, segments, bars, meetings, cfg: Dict, jobs: int):
    chair_filter = ChairFrameFilter(
        similarity_threshold=cfg["similarity_threshold"],
        require_face=cfg["require_face"])
    kept = chair_filter.fit(frames).transform(frames)

    facial_builder = FacialFeatureBuilder(
        window_minutes=cfg["window_minutes"], min_frames=cfg["min_frames"])
    facial_builder.fit(kept, meetings=meetings)
    facial = _concat_by_meeting(facial_builder.transform, kept, jobs)

    nlp_builder = NlpFeatureBuilder().fit()
    nlp = _concat_by_meeting(nlp_builder.transform, segments, jobs)

    market_builder = MarketFeatureBuilder(
        units=cfg["units"], normalize_ticks=cfg["normalize_ticks"],
        anchor_slack_minutes=cfg["anchor_slack_minutes"])
    market_builder.fit(bars, meetings=meetings)
    market = market_builder.transform(bars)

    return {
        "kept_frames": kept,
        "filter_report": chair_filter.report_,
        "facial": facial,
        "nlp": nlp,
        "market": market,
        "gap_log": market_builder.gap_log_,
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


@click.group()
def cli():
    """Facial-expression and market-reaction pipeline for press conferences."""


@cli.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
def validate(input_dir):
    """Check whichever canonical input files exist in INPUT_DIR.

    Exits non-zero if any record fails validation; files that are absent are
    reported and skipped, so partial corpora (e.g. frame scores alone) can be
    validated.
    """
    input_dir = Path(input_dir)
    errors = 0
    parsed: Dict[str, list] = {}
    found_any = False
    for name, (fname, parser) in CANONICAL_FILES.items():
        path = input_dir / fname
        if not path.exists():
            click.echo(f"SKIP {fname}: not present")
            continue
        found_any = True
        try:
            records = parser(path)
        except IngestError as exc:
            click.echo(f"ERROR {fname}: {exc}")
            errors += 1
            continue
        parsed[name] = records
        click.echo(f"OK {fname}: {len(records)} records")
    if not found_any:
        click.echo("ERROR no canonical input files found")
        errors += 1

    for lex_name in ingest.LEXICON_NAMES:
        try:
            lex = ingest.load_bundled_lexicon(lex_name)
            click.echo(f"OK lexicon {lex_name}: {len(lex)} phrases")
        except IngestError as exc:
            click.echo(f"ERROR lexicon {lex_name}: {exc}")
            errors += 1

    if "meetings" in parsed:
        known = {m.meeting_id for m in parsed["meetings"]}
        for name in ("frame_scores", "transcript"):
            if name in parsed:
                stray = {r.meeting_id for r in parsed[name]} - known
                if stray:
                    click.echo(f"ERROR {name}: unknown meeting ids {sorted(stray)}")
                    errors += 1
    click.echo(f"{'FAILED' if errors else 'PASSED'}: {errors} error(s)")
    sys.exit(1 if errors else 0)


def _common_build_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="JSON file overriding defaults.")(fn)
    fn = click.option("--similarity-threshold", type=float, default=None)(fn)
    fn = click.option("--units", type=click.Choice(["pct", "bps"]), default=None)(fn)
    fn = click.option("--jobs", type=int, default=1, show_default=True,
                      help="Worker threads for per-meeting feature building.")(fn)
    return fn


@cli.command("features")
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_common_build_options
def features_cmd(input_dir, out_dir, config_path, similarity_threshold, units, jobs):
    """Write the intermediate facial / language / market minute tables."""
    cfg = resolve_config(config_path, {"similarity_threshold": similarity_threshold,
                                       "units": units})
    frames, segments, bars, meetings, paths = _load_inputs(Path(input_dir))
    built = _build_features(frames, segments, bars, meetings, cfg, jobs)
    record = provenance(cfg, paths)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(_csv_ready(built["facial"]), out / "facial_minutes.csv", record)
    write_csv(_csv_ready(built["nlp"]), out / "nlp_minutes.csv", record)
    write_csv(_csv_ready(built["market"]), out / "market_minutes.csv", record)
    write_json(built["filter_report"].__dict__, out / "filter_report.json", record)
    write_json(built["gap_log"], out / "gap_log.json", record)
    click.echo(f"wrote facial_minutes.csv ({len(built['facial'])} rows), "
               f"nlp_minutes.csv ({len(built['nlp'])} rows), "
               f"market_minutes.csv ({len(built['market'])} rows) to {out}")


@cli.command("build-panel")
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_common_build_options
def build_panel_cmd(input_dir, out_dir, config_path, similarity_threshold, units, jobs):
    """Assemble the minute-level analysis panel and its sidecar files."""
    cfg = resolve_config(config_path, {"similarity_threshold": similarity_threshold,
                                       "units": units})
    frames, segments, bars, meetings, paths = _load_inputs(Path(input_dir))
    built = _build_features(frames, segments, bars, meetings, cfg, jobs)
    report = built["filter_report"]
    panel, audit = build_panel(
        built["facial"], built["nlp"], built["market"], meetings,
        frame_counts=(report.total, report.kept))
    record = provenance(cfg, paths)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(_csv_ready(panel), out / "panel.csv", record)
    write_json(column_catalog(panel), out / "column_catalog.json", record)
    write_json(audit.as_dict(), out / "audit.json", record)
    write_json(report.__dict__, out / "filter_report.json", record)
    write_json(built["gap_log"], out / "gap_log.json", record)
    click.echo(f"wrote panel.csv with {len(panel)} rows x {len(panel.columns)} "
               f"columns to {out}")
    for stage, count in audit.stages:
        click.echo(f"  {stage}: {count}")


def _parse_se(se: Optional[str]) -> Tuple[Optional[str], Optional[str]]:
    if se is None:
        return None, None
    if se in ("classical", "hc1"):
        return se, None
    if se == "cluster":
        return "cluster", None
    if se.startswith("cluster:"):
        target = se.split(":", 1)[1]
        col = {"meeting": "meeting_id", "chair": "chair"}.get(target, target)
        return "cluster", col
    raise click.ClickException(
        f"unknown --se value {se!r}; use classical, hc1, cluster, or cluster:<col>")


@cli.command()
@click.argument("panel_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--table", "table_name", type=click.Choice(BUNDLED_TABLES),
              default=None, help="A bundled table specification.")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Path to a custom .spec JSON file.")
@click.option("--se", default=None,
              help="Override standard errors: classical | hc1 | cluster[:meeting|chair]")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def regress(panel_csv, table_name, spec_path, se, out_dir):
    """Estimate every column of a table specification on PANEL_CSV."""
    if (table_name is None) == (spec_path is None):
        raise click.ClickException("pass exactly one of --table or --spec")
    if table_name is not None:
        spec_path = Path(__file__).parent / "specs" / f"{table_name}.spec"
    table = load_table_spec(spec_path)
    se_type, cluster_col = _parse_se(se)
    table = apply_se_override(table, se_type, cluster_col)
    panel = read_panel(panel_csv)
    try:
        results = run_table(panel, table)
    except (KeyError, ValueError) as exc:
        raise click.ClickException(str(exc))
    record = provenance({"se_override": se or ""},
                        {"panel": Path(panel_csv), "spec": Path(spec_path)})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = render_table(results, title=table.title, label_fn=display_label)
    (out / f"{table.table}.txt").write_text(
        "\n".join(_provenance_lines(record)) + "\n" + text, encoding="utf-8")
    write_csv(table_to_frame(results), out / f"{table.table}.csv", record)
    write_json([r.to_dict() for r in results], out / f"{table.table}.json", record)
    click.echo(text)


@cli.command("compare-deepfake")
@click.option("--pair", "pairs", nargs=2, multiple=True, required=True,
              metavar="ORIGINAL SWAPPED",
              help="Frame-score files for an original clip and its face swap.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def compare_deepfake(pairs, out_dir):
    """Per-emotion |mean difference| between clip pairs, min-max scaled to [0,1]."""
    rows = []
    inputs: Dict[str, Path] = {}
    for i, (orig_path, swap_path) in enumerate(pairs, start=1):
        for tag, p in (("original", orig_path), ("swapped", swap_path)):
            if not Path(p).exists():
                raise click.ClickException(f"no such file: {p}")
            inputs[f"pair{i}_{tag}"] = Path(p)
        orig = [f for f in parse_frame_scores(orig_path) if f.face_detected]
        swap = [f for f in parse_frame_scores(swap_path) if f.face_detected]
        try:
            deltas, degenerate = minmax_deepfake_deltas(orig, swap)
        except ValueError as exc:
            raise click.ClickException(f"pair {i}: {exc}")
        for emotion in EMOTIONS:
            rows.append({"pair": i, "original": str(orig_path),
                         "swapped": str(swap_path), "emotion": emotion,
                         "delta": deltas[emotion], "degenerate": degenerate})
    df = pd.DataFrame(rows)
    record = provenance({}, inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(df, out / "deepfake_deltas.csv", record)
    write_json(rows, out / "deepfake_deltas.json", record)
    for i in sorted({r["pair"] for r in rows}):
        subset = {r["emotion"]: r["delta"] for r in rows if r["pair"] == i}
        line = ", ".join(f"{e}={subset[e]:.3f}" for e in EMOTIONS)
        click.echo(f"pair {i}: {line}")


@cli.command("select-representative")
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--chair", default=None, help="Restrict to one chair.")
@click.option("--variance-target", type=float, default=None,
              help="Share of variance the leading components must cover.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--similarity-threshold", type=float, default=None)
def select_representative(input_dir, chair, variance_target, out_dir,
                          config_path, similarity_threshold):
    """Pick each chair's most typical conference by emotion profile."""
    cfg = resolve_config(config_path, {
        "similarity_threshold": similarity_threshold,
        "variance_target": variance_target})
    frames, _, _, meetings, paths = _load_inputs(Path(input_dir))
    chair_filter = ChairFrameFilter(similarity_threshold=cfg["similarity_threshold"],
                                    require_face=cfg["require_face"])
    kept = chair_filter.fit(frames).transform(frames)
    chairs = [chair] if chair else sorted({m.chair for m in meetings})
    chosen: Dict[str, str] = {}
    for name in chairs:
        try:
            chosen[name] = representative_meeting(
                kept, meetings, name, variance_target=cfg["variance_target"])
        except ValueError as exc:
            raise click.ClickException(str(exc))
        click.echo(f"{name}: {chosen[name]}")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(chosen, out / "representative.json", provenance(cfg, paths))


@cli.command("synth-corpus")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--meetings", "n_meetings", type=int, default=6, show_default=True)
@click.option("--minutes", type=int, default=35, show_default=True)
def synth_corpus(out_dir, seed, n_meetings, minutes):
    """Write a deterministic synthetic input corpus to --out."""
    paths = make_corpus(out_dir, seed=seed, n_meetings=n_meetings, minutes=minutes)
    for name in sorted(paths):
        click.echo(f"wrote {paths[name]}")


def main():
    cli(prog_name="fomcface")


if __name__ == "__main__":
    main()
