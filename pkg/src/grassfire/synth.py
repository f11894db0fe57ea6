"""Seeded generator of synthetic hyperspectral plume movies.

Scene model: a static smooth background field per band, plus an additive
Gaussian plume blob whose strength follows a per-frame profile (zero before
onset, linear ramp over the release, exponential decay after the peak) and
whose center drifts at a constant velocity from onset, plus i.i.d. Gaussian
sensor noise. Amplitudes may be negative to model absorption plumes.

All randomness comes from counter-based Philox streams keyed by (seed,
stream tag), so generation is bit-reproducible and could be parallelized by
frame without changing the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.ndimage import gaussian_filter

from .cube import HyperspectralMovie
from .errors import DataError

_BACKGROUND_TAG = 2**64 - 1
_BACKGROUND_LEVEL = 10.0


@dataclass(frozen=True)
class PlumeScenario:
    """Parameters of one synthetic release event."""

    frames: int
    rows: int
    cols: int
    bands: int
    onset_frame: int
    release_duration: int
    plume_center0: tuple[float, float]
    drift_velocity: tuple[float, float]
    sigma_spatial: float
    amplitude: np.ndarray
    decay_rate: float
    background_smoothness: float
    noise_sigma: float
    seed: int

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=np.float64)
        if amp.shape != (self.bands,):
            raise DataError(
                f"amplitude has shape {amp.shape}, expected ({self.bands},)"
            )
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)
        if min(self.frames, self.rows, self.cols, self.bands) < 1:
            raise DataError("frames, rows, cols, bands must all be >= 1")
        if not 0 <= self.onset_frame:
            raise DataError(f"onset_frame must be >= 0, got {self.onset_frame}")
        if self.release_duration < 1:
            raise DataError(f"release_duration must be >= 1, got {self.release_duration}")
        if self.onset_frame + self.release_duration > self.frames:
            raise DataError(
                f"onset {self.onset_frame} + release {self.release_duration} "
                f"exceeds {self.frames} frames"
            )
        if not self.sigma_spatial > 0:
            raise DataError(f"sigma_spatial must be > 0, got {self.sigma_spatial}")
        if self.noise_sigma < 0:
            raise DataError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.decay_rate < 0:
            raise DataError(f"decay_rate must be >= 0, got {self.decay_rate}")
        if self.background_smoothness < 0:
            raise DataError(
                f"background_smoothness must be >= 0, got {self.background_smoothness}"
            )
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must fit in an unsigned 64-bit integer")

    def amplitude_profile(self, frame: int) -> float:
        """Plume strength in [0, 1] for one frame."""
        if frame < self.onset_frame:
            return 0.0
        peak = self.onset_frame + self.release_duration - 1
        if frame <= peak:
            return (frame - self.onset_frame + 1) / self.release_duration
        return float(np.exp(-self.decay_rate * (frame - peak)))

    def center(self, frame: int) -> tuple[float, float]:
        dt = max(frame - self.onset_frame, 0)
        return (
            self.plume_center0[0] + self.drift_velocity[0] * dt,
            self.plume_center0[1] + self.drift_velocity[1] * dt,
        )


def _stream(seed: int, tag: int) -> np.random.Generator:
    key = np.array([seed, tag], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _background(sc: PlumeScenario) -> np.ndarray:
    """Static smooth field: low-pass filtered white noise around a fixed base
    level, rescaled to unit variance per band.

    The filter runs over the spatial axes at the configured correlation
    length and over the band axis at a third of the band count. Spectral
    smoothing matters: natural backgrounds vary in a few smooth spectral
    modes, which is what lets a whitened detector separate a spiky gas
    signature from background clutter.
    """
    rng = _stream(sc.seed, _BACKGROUND_TAG)
    white = rng.standard_normal((sc.rows, sc.cols, sc.bands))
    sigma = (sc.background_smoothness, sc.background_smoothness, sc.bands / 3.0)
    if max(sigma) > 0:
        field = gaussian_filter(white, sigma=sigma)
    else:
        field = white
    flat = field.reshape(-1, sc.bands)
    std = flat.std(axis=0)
    std[std == 0] = 1.0
    field = (field - flat.mean(axis=0)) / std
    return _BACKGROUND_LEVEL + field


def generate(sc: PlumeScenario) -> tuple[HyperspectralMovie, np.ndarray]:
    """Render the scenario into a movie plus a per-frame boolean plume mask.

    mask[f, r, c] is True exactly where the noise-free plume contribution
    (max magnitude over bands) exceeds noise_sigma.
    """
    bg = _background(sc)
    rr, cc = np.meshgrid(
        np.arange(sc.rows, dtype=np.float64),
        np.arange(sc.cols, dtype=np.float64),
        indexing="ij",
    )
    values = np.empty((sc.frames, sc.rows, sc.cols, sc.bands), dtype=np.float64)
    mask = np.zeros((sc.frames, sc.rows, sc.cols), dtype=bool)
    max_amp = float(np.abs(sc.amplitude).max())
    for f in range(sc.frames):
        profile = sc.amplitude_profile(f)
        frame_vals = bg.copy()
        if profile > 0.0 and max_amp > 0.0:
            cr, ccen = sc.center(f)
            blob = np.exp(-((rr - cr) ** 2 + (cc - ccen) ** 2) / (2.0 * sc.sigma_spatial**2))
            frame_vals += profile * blob[:, :, None] * sc.amplitude[None, None, :]
            mask[f] = profile * blob * max_amp > sc.noise_sigma
        if sc.noise_sigma > 0:
            noise = _stream(sc.seed, f).standard_normal(frame_vals.shape)
            frame_vals += sc.noise_sigma * noise
        values[f] = frame_vals
    wavelengths = np.linspace(8.0, 11.0, sc.bands)
    movie = HyperspectralMovie(values.astype(np.float32), wavelengths)
    return movie, mask


def scenario_from_mapping(kv: Mapping[str, str]) -> PlumeScenario:
    """Build a scenario from flat key = value strings (the scenario file
    format). Missing or malformed keys and violated scenario invariants all
    surface as ConfigError."""
    from .config import ConfigError, get_int, get_float, get_floats

    try:
        return PlumeScenario(
            frames=get_int(kv, "frames"),
            rows=get_int(kv, "rows"),
            cols=get_int(kv, "cols"),
            bands=get_int(kv, "bands"),
            onset_frame=get_int(kv, "onset_frame"),
            release_duration=get_int(kv, "release_duration"),
            plume_center0=tuple(get_floats(kv, "plume_center0", expect=2)),
            drift_velocity=tuple(get_floats(kv, "drift_velocity", expect=2)),
            sigma_spatial=get_float(kv, "sigma_spatial"),
            amplitude=np.asarray(get_floats(kv, "amplitude")),
            decay_rate=get_float(kv, "decay_rate"),
            background_smoothness=get_float(kv, "background_smoothness"),
            noise_sigma=get_float(kv, "noise_sigma"),
            seed=get_int(kv, "seed"),
        )
    except DataError as exc:
        raise ConfigError(str(exc)) from None
