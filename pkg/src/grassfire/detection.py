"""Adaptive cosine estimator (ACE) for locating plume pixels.

The score of a test pixel x against a target signature s under a background
model (mu, Sigma) is the squared cosine of the angle between the whitened,
mean-subtracted vectors:

    score = (s~' x~)^2 / (|s~|^2 |x~|^2),   s~ = W (s - mu),  x~ = W (x - mu)

with W any square root of Sigma^-1. Whitening is realized by triangular
solves against the Cholesky factor rather than an explicit inverse square
root; the score is identical and the conditioning better. Scores live in
[0, 1] by Cauchy-Schwarz and are invariant under any invertible linear map
applied jointly to the pixels and the target.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .cube import HyperspectralMovie
from .errors import DataError, FormatError, SingularModelError, UndefinedScoreError

DEFAULT_SHRINKAGE = 1e-3


@dataclass(frozen=True)
class BackgroundModel:
    """Per-band mean and shrunk sample covariance of background pixels.

    cholesky_lower caches the lower Cholesky factor of the covariance; its
    existence is the positive-definiteness invariant.
    """

    mean: np.ndarray
    covariance: np.ndarray
    shrinkage: float
    cholesky_lower: np.ndarray

    @property
    def bands(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class TargetSignature:
    """Spectral signature of the sought chemical, same band order as the model."""

    spectrum: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.spectrum, dtype=np.float64)
        if s.ndim != 1 or s.size < 1:
            raise DataError("target spectrum must be a nonempty vector")
        if not np.isfinite(s).all():
            raise DataError("target spectrum contains non-finite values")
        s.setflags(write=False)
        object.__setattr__(self, "spectrum", s)


def fit_background(pixels: np.ndarray, shrinkage: float = DEFAULT_SHRINKAGE) -> BackgroundModel:
    """Estimate mean and covariance from rows of background spectra.

    covariance = sample covariance (divisor m - 1) + shrinkage * trace/b on
    the diagonal. At least 2 pixels are required; b + 1 or more is sensible.
    Raises SingularModelError when the shrunk covariance is not positive
    definite (for example all-identical pixels with zero shrinkage).
    """
    px = np.asarray(pixels, dtype=np.float64)
    if px.ndim != 2:
        raise DataError(f"pixels must be (m, bands), got shape {px.shape}")
    m, b = px.shape
    if m < 2:
        raise DataError(f"need at least 2 pixels to fit a background, got {m}")
    if shrinkage < 0:
        raise DataError(f"shrinkage must be >= 0, got {shrinkage}")
    mean = px.mean(axis=0)
    centered = px - mean
    cov = (centered.T @ centered) / (m - 1)
    cov = (cov + cov.T) / 2.0
    cov += shrinkage * (np.trace(cov) / b) * np.eye(b)
    try:
        lower = cholesky(cov, lower=True)
    except np.linalg.LinAlgError:
        lower = None
    # potrf can factor a numerically semidefinite matrix when rounding lands
    # positive; demand pivots clearly above the noise floor of the scale
    scale = np.trace(cov) / b
    if lower is None or scale <= 0 or (np.diag(lower) ** 2).min() <= 1e-12 * scale:
        raise SingularModelError(
            f"background covariance not positive-definite with shrinkage {shrinkage:g}"
        )
    mean.setflags(write=False)
    cov.setflags(write=False)
    return BackgroundModel(mean, cov, float(shrinkage), lower)


def ace_score(model: BackgroundModel, target: TargetSignature, x: np.ndarray) -> float:
    """Squared cosine of the whitened angle between x and the target."""
    s = target.spectrum
    x = np.asarray(x, dtype=np.float64)
    if s.shape != (model.bands,) or x.shape != (model.bands,):
        raise DataError(
            f"band mismatch: model has {model.bands}, target {s.shape}, pixel {x.shape}"
        )
    st = solve_triangular(model.cholesky_lower, s - model.mean, lower=True)
    xt = solve_triangular(model.cholesky_lower, x - model.mean, lower=True)
    ss = float(st @ st)
    xx = float(xt @ xt)
    if ss == 0.0:
        raise DataError("target equals the background mean; signature is empty")
    if xx == 0.0:
        raise UndefinedScoreError("test pixel equals the background mean exactly")
    cross = float(st @ xt)
    return min((cross * cross) / (ss * xx), 1.0)


def ace_map(
    movie: HyperspectralMovie,
    frame: int,
    model: BackgroundModel,
    target: TargetSignature,
) -> tuple[np.ndarray, int]:
    """Per-pixel ACE scores for one frame.

    Returns (rows x cols score image, count of undefined pixels). Pixels
    whose whitened vector is exactly zero get score 0 and are tallied in the
    count rather than raising.
    """
    if movie.bands != model.bands:
        raise DataError(f"movie has {movie.bands} bands, model {model.bands}")
    if not 0 <= frame < movie.frames:
        raise DataError(f"frame {frame} outside 0..{movie.frames - 1}")
    s = target.spectrum
    if s.shape != (model.bands,):
        raise DataError(f"target has shape {s.shape}, expected ({model.bands},)")
    rows, cols = movie.rows, movie.cols
    px = movie.values[frame].reshape(-1, movie.bands).astype(np.float64)
    st = solve_triangular(model.cholesky_lower, s - model.mean, lower=True)
    ss = float(st @ st)
    if ss == 0.0:
        raise DataError("target equals the background mean; signature is empty")
    xt = solve_triangular(model.cholesky_lower, (px - model.mean).T, lower=True)
    xx = np.einsum("bn,bn->n", xt, xt)
    cross = st @ xt
    undefined = xx == 0.0
    xx_safe = np.where(undefined, 1.0, xx)
    scores = np.minimum((cross * cross) / (ss * xx_safe), 1.0)
    scores[undefined] = 0.0
    return scores.reshape(rows, cols), int(undefined.sum())


def write_signature(target: TargetSignature, path: str | Path) -> None:
    """Single-column CSV, one band value per line."""
    with open(path, "w") as fh:
        for v in target.spectrum:
            fh.write(f"{v:.17g}\n")


def read_signature(path: str | Path) -> TargetSignature:
    path = Path(path)
    vals = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
    if not vals:
        raise FormatError(f"{path}: empty signature file")
    return TargetSignature(np.asarray(vals))
