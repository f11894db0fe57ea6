"""Command-line pipeline: synth, embed, persist, ace, plot, pipeline.

Every subcommand reads one flat config file (--config) and writes its
artifacts into an output directory (--out overrides the config). Exit codes:
0 success, 2 config error, 3 data error, 4 numerical error.

The six-step workflow (select bands, detect the plume region, map patches to
the Grassmannian, compute pairwise subspace distances, extract barcodes,
interpret) maps onto subcommands that are each idempotent and deterministic:
rerunning with identical inputs reproduces every output byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    PATCH_MODE,
    PipelineConfig,
    check_known_keys,
    get_float,
    get_floats,
    load_pipeline_config,
    parse_kv,
    require,
)
from .cube import (
    HyperspectralMovie,
    PatchSpec,
    load_movie,
    patch_series,
    remove_background,
    save_movie,
    sliding_window_series,
)
from .detection import ace_map, fit_background, read_signature
from .errors import (
    ConfigError,
    DataError,
    DegeneratePatchError,
    GrassfireError,
    NumericalError,
)
from .grassmann import (
    DistanceMatrix,
    distance_matrix,
    embed,
    read_distance_matrix,
    write_distance_matrix,
)
from .persistence import (
    components_at,
    read_barcode,
    rips_barcode,
    write_barcode,
)
from .plotting import render_barcode_svg
from .synth import generate, scenario_from_mapping


def _out_dir(args, default: Path | None = None) -> Path:
    out = Path(args.out) if args.out else (default or Path("out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    kv = parse_kv(args.config)
    scenario = scenario_from_mapping(kv)
    out = _out_dir(args)
    movie, mask = generate(scenario)
    movie_path = out / "movie.hscb"
    mask_path = out / "mask.hscb"
    save_movie(movie, movie_path)
    save_movie(HyperspectralMovie(mask[..., None].astype(np.float32)), mask_path)
    print(f"wrote {movie_path} ({movie.frames}x{movie.rows}x{movie.cols}x{movie.bands})")
    print(f"wrote {mask_path}")
    return 0


# ---------------------------------------------------------------- embed

def _resolve_movie(cfg: PipelineConfig, out: Path, written: list[Path]) -> HyperspectralMovie:
    if cfg.scenario_path is not None:
        kv = parse_kv(cfg.scenario_path)
        if cfg.seed is not None:
            kv = dict(kv)
            kv["seed"] = str(cfg.seed)
        movie, mask = generate(scenario_from_mapping(kv))
        movie_path = out / "movie.hscb"
        mask_path = out / "mask.hscb"
        save_movie(movie, movie_path)
        save_movie(HyperspectralMovie(mask[..., None].astype(np.float32)), mask_path)
        written += [movie_path, mask_path]
    else:
        movie = load_movie(cfg.input_path)
    if cfg.background_removal:
        movie = remove_background(movie, cfg.pre_burst)
        removed_path = out / "background_removed.hscb"
        save_movie(movie, removed_path)
        written.append(removed_path)
    return movie


def _extract_series(cfg: PipelineConfig, movie: HyperspectralMovie):
    if cfg.mode == PATCH_MODE:
        spec = PatchSpec(
            cfg.row_start, cfg.row_end, cfg.col_start, cfg.col_end, cfg.band_indices
        )
        return patch_series(movie, spec)
    return sliding_window_series(
        movie,
        cfg.frame,
        cfg.row_start,
        cfg.row_end,
        cfg.col_start,
        cfg.col_end,
        cfg.window_cols,
        cfg.stride,
        cfg.band_indices,
    )


def _embed_series(cfg: PipelineConfig, movie: HyperspectralMovie):
    """Embed the configured patch series; degenerate patches are skipped or
    abort the run, per on_degenerate."""
    patches = _extract_series(cfg, movie)
    points = []
    skipped = []
    for idx, patch in enumerate(patches):
        try:
            points.append(embed(patch))
        except DegeneratePatchError as exc:
            label = "frame" if cfg.mode == PATCH_MODE else "window"
            if cfg.on_degenerate == "abort":
                raise DegeneratePatchError(f"{label} {idx}: {exc}") from None
            skipped.append(idx)
            print(f"warning: skipping degenerate {label} {idx}: {exc}", file=sys.stderr)
    if not points:
        raise DataError("every patch in the series was degenerate")
    return points, skipped


def cmd_embed(args) -> int:
    cfg = load_pipeline_config(args.config, args.out)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    movie = _resolve_movie(cfg, out, written)
    points, skipped = _embed_series(cfg, movie)
    d = distance_matrix(points, cfg.metric)
    dist_path = out / "distmat.csv"
    write_distance_matrix(d, dist_path)
    if skipped:
        skip_path = out / "embed_skipped.txt"
        skip_path.write_text("".join(f"{i}\n" for i in skipped))
    print(f"wrote {dist_path} ({d.m}x{d.m}, metric={cfg.metric.value})")
    return 0


# ---------------------------------------------------------------- persist

_PERSIST_KEYS = {"distance_matrix", "scale_max", "epsilon_report"}


def _run_length_format(indices) -> str:
    """Compress sorted indices into 'a-b, c, d-e' form."""
    if not indices:
        return ""
    runs = []
    start = prev = indices[0]
    for i in indices[1:]:
        if i == prev + 1:
            prev = i
            continue
        runs.append((start, prev))
        start = prev = i
    runs.append((start, prev))
    return ", ".join(f"{a}" if a == b else f"{a}-{b}" for a, b in runs)


def _component_report(d: DistanceMatrix, epsilons) -> str:
    lines = []
    for eps in epsilons:
        part = components_at(d, eps)
        comps = part.components()
        lines.append(f"epsilon = {eps!r}: {len(comps)} components")
        singles = [c[0] for c in comps if len(c) == 1]
        if singles:
            lines.append(f"  isolated points ({len(singles)}): {_run_length_format(singles)}")
        for comp in comps:
            if len(comp) > 1:
                lines.append(f"  cluster of {len(comp)}: {_run_length_format(comp)}")
        lines.append("")
    return "\n".join(lines)


def _persist_outputs(d: DistanceMatrix, scale_max: float | None, epsilons, out: Path):
    written = []
    cap = float(np.max(d.entries)) if scale_max is None else scale_max
    if cap <= 0:
        # all points coincide; the barcode is just the essential class
        cap = 1.0
    barcode = rips_barcode(d, cap)
    barcode_path = out / "barcode.csv"
    write_barcode(barcode, barcode_path)
    written.append(barcode_path)
    if epsilons:
        report_path = out / "components_report.txt"
        report_path.write_text(_component_report(d, epsilons))
        written.append(report_path)
    return barcode, written


def cmd_persist(args) -> int:
    kv = parse_kv(args.config)
    check_known_keys(kv, _PERSIST_KEYS, str(args.config))
    base = Path(args.config).parent
    dist_path = (base / require(kv, "distance_matrix")).resolve()
    d = read_distance_matrix(dist_path)
    scale_raw = kv.get("scale_max", "max")
    scale_max = None if scale_raw == "max" else get_float(kv, "scale_max")
    epsilons = get_floats(kv, "epsilon_report") if "epsilon_report" in kv else []
    out = _out_dir(args)
    barcode, written = _persist_outputs(d, scale_max, epsilons, out)
    n0 = len(barcode.in_dim(0))
    n1 = len(barcode.in_dim(1))
    for p in written:
        print(f"wrote {p}")
    print(
        f"barcode: {n0} dim-0 bars, {n1} dim-1 bars, "
        f"{barcode.dropped_zero_persistence} zero-persistence pairs dropped"
    )
    return 0


# ---------------------------------------------------------------- ace

def _ace_outputs(cfg: PipelineConfig, movie: HyperspectralMovie, out: Path):
    if cfg.ace_target is None:
        raise ConfigError("ACE requires an ace_target signature file")
    if cfg.pre_burst is None:
        raise ConfigError("ACE requires a pre_burst range to fit the background")
    target = read_signature(cfg.ace_target)
    first, last = cfg.pre_burst
    pixels = movie.values[first : last + 1].reshape(-1, movie.bands).astype(np.float64)
    model = fit_background(pixels, cfg.ace_shrinkage)
    written = []
    summary = ["frame,max_score,pixels_above_threshold"]
    n_undef = 0
    for f in range(movie.frames):
        scores, undef = ace_map(movie, f, model, target)
        n_undef += undef
        cube = HyperspectralMovie(scores[None, :, :, None].astype(np.float32))
        map_path = out / f"ace_map_{f:04d}.hscb"
        save_movie(cube, map_path)
        written.append(map_path)
        above = int((scores > cfg.ace_threshold).sum())
        summary.append(f"{f},{scores.max():.17g},{above}")
    summary_path = out / "ace_summary.csv"
    summary_path.write_text("\n".join(summary) + "\n")
    written.append(summary_path)
    return written, n_undef


def cmd_ace(args) -> int:
    cfg = load_pipeline_config(args.config, args.out)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    movie = _resolve_movie(cfg, out, written)
    ace_written, n_undef = _ace_outputs(cfg, movie, out)
    print(f"wrote {len(ace_written) - 1} ACE maps and {ace_written[-1]}")
    if n_undef:
        print(f"note: {n_undef} pixels had undefined scores (set to 0)")
    return 0


# ---------------------------------------------------------------- plot

_PLOT_KEYS = {"barcode", "svg"}


def cmd_plot(args) -> int:
    kv = parse_kv(args.config)
    check_known_keys(kv, _PLOT_KEYS, str(args.config))
    base = Path(args.config).parent
    barcode_path = (base / require(kv, "barcode")).resolve()
    barcode = read_barcode(barcode_path)
    out = _out_dir(args)
    svg_path = out / kv.get("svg", "barcode.svg")
    render_barcode_svg(barcode, svg_path)
    print(f"wrote {svg_path}")
    return 0


# ---------------------------------------------------------------- pipeline

def cmd_pipeline(args) -> int:
    cfg = load_pipeline_config(args.config, args.out)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def stage(name, fn):
        try:
            return fn()
        except GrassfireError as exc:
            raise type(exc)(f"stage {name}: {exc}") from None

    movie = stage("source", lambda: _resolve_movie(cfg, out, written))

    def run_embed():
        points, skipped = _embed_series(cfg, movie)
        d = distance_matrix(points, cfg.metric)
        dist_path = out / "distmat.csv"
        write_distance_matrix(d, dist_path)
        written.append(dist_path)
        if skipped:
            skip_path = out / "embed_skipped.txt"
            skip_path.write_text("".join(f"{i}\n" for i in skipped))
            written.append(skip_path)
        return d

    d = stage("embed", run_embed)

    def run_persist():
        barcode, persist_written = _persist_outputs(
            d, cfg.scale_max, cfg.epsilon_report, out
        )
        written.extend(persist_written)
        return barcode

    barcode = stage("persist", run_persist)

    def run_plot():
        svg_path = out / "barcode.svg"
        render_barcode_svg(barcode, svg_path)
        written.append(svg_path)

    stage("plot", run_plot)

    if cfg.ace_target is not None:
        def run_ace():
            ace_written, _ = _ace_outputs(cfg, movie, out)
            written.extend(ace_written)

        stage("ace", run_ace)

    manifest_path = out / "manifest.txt"
    lines = sorted(f"{_sha256(p)}  {p.name}" for p in written)
    manifest_path.write_text("\n".join(lines) + "\n")
    print(f"pipeline complete: {len(written)} artifacts in {out}")
    print(f"wrote {manifest_path}")
    return 0


# ---------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grassfire",
        description=(
            "Grassmannian embedding and persistent homology for hyperspectral movies"
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("synth", cmd_synth, "generate a synthetic plume movie and mask"),
        ("embed", cmd_embed, "embed a patch series and write the distance matrix"),
        ("persist", cmd_persist, "compute barcodes and component reports"),
        ("ace", cmd_ace, "run the ACE detector over all frames"),
        ("plot", cmd_plot, "render a barcode CSV as SVG"),
        ("pipeline", cmd_pipeline, "run every stage and write a manifest"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", "-c", required=True, help="flat key = value config file")
        p.add_argument("--out", "-o", default=None, help="output directory")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except (DataError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
