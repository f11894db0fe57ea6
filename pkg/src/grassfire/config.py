"""Flat key = value config files and the pipeline configuration.

One `key = value` per line; blank lines and lines starting with # are
ignored; vector values are comma-separated. Unknown keys are rejected so
typos fail loudly instead of silently using a default.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .grassmann import SubspaceMetric


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (for example
    'mes-loop-pipeline.cfg')."""
    path = importlib.resources.files("grassfire") / "configs" / name
    with importlib.resources.as_file(path) as p:
        if not p.is_file():
            raise ConfigError(f"no bundled config named {name!r}")
        return p


def parse_kv(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{ln}: expected key = value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if not key:
                raise ConfigError(f"{path}:{ln}: empty key")
            if key in out:
                raise ConfigError(f"{path}:{ln}: duplicate key {key!r}")
            out[key] = value
    return out


def require(kv: Mapping[str, str], key: str) -> str:
    if key not in kv:
        raise ConfigError(f"missing required key {key!r}")
    return kv[key]


def get_int(kv: Mapping[str, str], key: str, default: int | None = None) -> int:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(kv[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: {kv[key]!r} is not an integer") from None


def get_float(kv: Mapping[str, str], key: str, default: float | None = None) -> float:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(kv[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: {kv[key]!r} is not a number") from None


def get_floats(kv: Mapping[str, str], key: str, expect: int | None = None) -> list[float]:
    raw = require(kv, key)
    try:
        vals = [float(tok) for tok in raw.split(",")]
    except ValueError:
        raise ConfigError(f"key {key!r}: {raw!r} is not a comma-separated vector") from None
    if expect is not None and len(vals) != expect:
        raise ConfigError(f"key {key!r}: expected {expect} values, got {len(vals)}")
    return vals


def get_ints(kv: Mapping[str, str], key: str) -> list[int]:
    raw = require(kv, key)
    try:
        return [int(tok) for tok in raw.split(",")]
    except ValueError:
        raise ConfigError(f"key {key!r}: {raw!r} is not a comma-separated integer list") from None


def get_bool(kv: Mapping[str, str], key: str, default: bool | None = None) -> bool:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    raw = kv[key].lower()
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: {kv[key]!r} is not a boolean")


def check_known_keys(kv: Mapping[str, str], known: set[str], context: str) -> None:
    unknown = sorted(set(kv) - known)
    if unknown:
        raise ConfigError(f"{context}: unknown keys {unknown}")


PATCH_MODE = "patch_series"
WINDOW_MODE = "sliding_window"

_PIPELINE_KEYS = {
    "input",
    "scenario",
    "mode",
    "row_start",
    "row_end",
    "col_start",
    "col_end",
    "band_indices",
    "frame",
    "window_cols",
    "stride",
    "metric",
    "scale_max",
    "pre_burst",
    "background_removal",
    "ace_target",
    "ace_threshold",
    "ace_shrinkage",
    "epsilon_report",
    "on_degenerate",
    "output_dir",
    "seed",
}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one pipeline run needs; built from a flat config file."""

    input_path: Path | None
    scenario_path: Path | None
    mode: str
    row_start: int
    row_end: int
    col_start: int
    col_end: int
    band_indices: tuple[int, ...]
    frame: int | None
    window_cols: int | None
    stride: int
    metric: SubspaceMetric
    scale_max: float | None  # None means "use the max pairwise distance"
    pre_burst: tuple[int, int] | None
    background_removal: bool
    ace_target: Path | None
    ace_threshold: float
    ace_shrinkage: float
    epsilon_report: tuple[float, ...]
    on_degenerate: str
    output_dir: Path
    seed: int | None

    @property
    def source(self) -> Path:
        src = self.input_path if self.input_path is not None else self.scenario_path
        assert src is not None
        return src


def load_pipeline_config(path: str | Path, out_dir: str | Path | None = None) -> PipelineConfig:
    """Parse and cross-validate a pipeline config file.

    out_dir, when given (the --out flag), overrides the config's output_dir.
    Relative paths in the file resolve against the file's directory.
    """
    path = Path(path)
    kv = parse_kv(path)
    check_known_keys(kv, _PIPELINE_KEYS, str(path))
    base = path.parent

    def respath(key: str) -> Path | None:
        if key not in kv:
            return None
        return (base / kv[key]).resolve()

    input_path = respath("input")
    scenario_path = respath("scenario")
    if (input_path is None) == (scenario_path is None):
        raise ConfigError(f"{path}: exactly one of 'input' or 'scenario' is required")

    mode = require(kv, "mode")
    if mode not in (PATCH_MODE, WINDOW_MODE):
        raise ConfigError(
            f"{path}: mode must be {PATCH_MODE!r} or {WINDOW_MODE!r}, got {mode!r}"
        )
    frame = get_int(kv, "frame") if mode == WINDOW_MODE else None
    window_cols = get_int(kv, "window_cols") if mode == WINDOW_MODE else None
    if mode == PATCH_MODE:
        for key in ("frame", "window_cols", "stride"):
            if key in kv:
                raise ConfigError(f"{path}: key {key!r} only applies to {WINDOW_MODE} mode")

    pre_burst = None
    if "pre_burst" in kv:
        vals = get_ints(kv, "pre_burst")
        if len(vals) != 2:
            raise ConfigError(f"{path}: pre_burst needs two values, got {len(vals)}")
        pre_burst = (vals[0], vals[1])
    background_removal = get_bool(kv, "background_removal", default=False)
    if background_removal and pre_burst is None:
        raise ConfigError(f"{path}: background_removal requires a pre_burst range")

    scale_raw = kv.get("scale_max", "max")
    if scale_raw == "max":
        scale_max = None
    else:
        scale_max = get_float(kv, "scale_max")
        if not scale_max > 0:
            raise ConfigError(f"{path}: scale_max must be positive, got {scale_max}")

    epsilon_report: tuple[float, ...] = ()
    if "epsilon_report" in kv:
        epsilon_report = tuple(get_floats(kv, "epsilon_report"))

    try:
        metric = SubspaceMetric.parse(kv.get("metric", "min_angle"))
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from None

    on_degenerate = kv.get("on_degenerate", "abort")
    if on_degenerate not in ("abort", "skip"):
        raise ConfigError(
            f"{path}: on_degenerate must be 'abort' or 'skip', got {on_degenerate!r}"
        )

    output_dir = Path(out_dir) if out_dir is not None else base / kv.get("output_dir", "out")
    output_dir = output_dir.resolve()

    cfg = PipelineConfig(
        input_path=input_path,
        scenario_path=scenario_path,
        mode=mode,
        row_start=get_int(kv, "row_start"),
        row_end=get_int(kv, "row_end"),
        col_start=get_int(kv, "col_start"),
        col_end=get_int(kv, "col_end"),
        band_indices=tuple(get_ints(kv, "band_indices")),
        frame=frame,
        window_cols=window_cols,
        stride=get_int(kv, "stride", default=1),
        metric=metric,
        scale_max=scale_max,
        pre_burst=pre_burst,
        background_removal=background_removal,
        ace_target=respath("ace_target"),
        ace_threshold=get_float(kv, "ace_threshold", default=0.5),
        ace_shrinkage=get_float(kv, "ace_shrinkage", default=1e-3),
        epsilon_report=epsilon_report,
        on_degenerate=on_degenerate,
        output_dir=output_dir,
        seed=get_int(kv, "seed") if "seed" in kv else None,
    )
    _check_path_collisions(cfg, path)
    return cfg


def _check_path_collisions(cfg: PipelineConfig, cfg_path: Path) -> None:
    """Inputs must not live where outputs will be written."""
    inputs = [p for p in (cfg.input_path, cfg.scenario_path, cfg.ace_target) if p is not None]
    for p in inputs:
        if cfg.output_dir == p or cfg.output_dir in p.parents:
            raise ConfigError(
                f"{cfg_path}: input {p} is inside the output directory {cfg.output_dir}"
            )
