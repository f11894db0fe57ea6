"""Hyperspectral movie data model, HSCB file I/O, and patch extraction.

A movie is a dense 4-way array indexed (frame, row, col, band). Patches are
spatial-spectral subregions vectorized into n x k matrices: column j holds
the values of band j over the patch pixels, flattened row-major (the spatial
row index varies slowest). That fixed order makes extraction bit-reproducible;
any fixed order spans the same column space.

HSCB on-disk layout (all little-endian):

    bytes 0-3    magic "HSCB"
    bytes 4-7    u32 version, currently 1
    bytes 8-23   u32 frames, rows, cols, bands
    byte  24     u8  wavelengths-present flag
    then         bands x f64 wavelengths, if flagged
    then         frames*rows*cols*bands x f32 values, row-major
                 (frame, row, col, band)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BoundsError, DataError, FormatError

MAGIC = b"HSCB"
VERSION = 1
HEADER = struct.Struct("<4sIIIIIB")

# Refuse headers that would ask for absurd allocations (16 Gi samples).
MAX_ELEMENTS = 2**34


@dataclass(frozen=True)
class HyperspectralMovie:
    """4-way array of radiance samples plus optional band-center wavelengths.

    values has shape (frames, rows, cols, bands) and dtype float32, the
    storage precision of the HSCB format. wavelengths, when present, holds
    one strictly positive band center (micrometers) per band.
    """

    values: np.ndarray
    wavelengths: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 4:
            raise DataError(f"movie values must be 4-way, got {v.ndim} axes")
        if min(v.shape) < 1:
            raise DataError(f"movie has an empty axis: shape {v.shape}")
        if not np.isfinite(v).all():
            idx = tuple(int(x) for x in np.argwhere(~np.isfinite(v))[0])
            raise DataError(f"non-finite value at (frame,row,col,band)={idx}")
        object.__setattr__(self, "values", v)
        if self.wavelengths is not None:
            w = np.asarray(self.wavelengths, dtype=np.float64)
            if w.shape != (v.shape[3],):
                raise DataError(
                    f"wavelengths length {w.shape} does not match {v.shape[3]} bands"
                )
            if not (np.isfinite(w).all() and (w > 0).all()):
                raise DataError("wavelengths must be finite and strictly positive")
            w.setflags(write=False)
            object.__setattr__(self, "wavelengths", w)
        v.setflags(write=False)

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def rows(self) -> int:
        return self.values.shape[1]

    @property
    def cols(self) -> int:
        return self.values.shape[2]

    @property
    def bands(self) -> int:
        return self.values.shape[3]


def load_movie(path: str | Path) -> HyperspectralMovie:
    """Read an HSCB file, validating structure and values.

    Structural problems (magic, version, truncation, oversized dimensions)
    raise FormatError with the byte offset of the problem; non-finite payload
    values raise DataError naming the first offending index.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < HEADER.size:
        raise FormatError(f"{path}: truncated header at byte {len(raw)} (need {HEADER.size})")
    magic, version, frames, rows, cols, bands, wflag = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r} at byte 0")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version} at byte 4")
    dims = (frames, rows, cols, bands)
    if min(dims) == 0:
        raise FormatError(f"{path}: zero dimension in header {dims} at byte 8")
    n_values = frames * rows * cols * bands
    if n_values > MAX_ELEMENTS:
        raise FormatError(f"{path}: dimension overflow {dims} at byte 8")
    if wflag not in (0, 1):
        raise FormatError(f"{path}: bad wavelengths flag {wflag} at byte 24")
    offset = HEADER.size
    wavelengths = None
    if wflag:
        need = 8 * bands
        if len(raw) < offset + need:
            raise FormatError(f"{path}: truncated wavelengths at byte {len(raw)}")
        wavelengths = np.frombuffer(raw, dtype="<f8", count=bands, offset=offset)
        offset += need
    expected = offset + 4 * n_values
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload is {len(raw) - offset} bytes at byte {offset}, "
            f"expected {4 * n_values}"
        )
    values = np.frombuffer(raw, dtype="<f4", count=n_values, offset=offset)
    if not np.isfinite(values).all():
        flat = int(np.argmin(np.isfinite(values)))
        idx = np.unravel_index(flat, dims)
        raise DataError(f"{path}: non-finite value at (frame,row,col,band)={tuple(map(int, idx))}")
    return HyperspectralMovie(values.reshape(dims).copy(), wavelengths)


def save_movie(movie: HyperspectralMovie, path: str | Path) -> None:
    """Write an HSCB file readable back to identical content by load_movie."""
    path = Path(path)
    wflag = 0 if movie.wavelengths is None else 1
    header = HEADER.pack(
        MAGIC, VERSION, movie.frames, movie.rows, movie.cols, movie.bands, wflag
    )
    with open(path, "wb") as fh:
        fh.write(header)
        if wflag:
            fh.write(movie.wavelengths.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(movie.values, dtype="<f4").tobytes())


@dataclass(frozen=True)
class PatchSpec:
    """Spatial region (inclusive bounds) plus an ordered band subset.

    Enforces k < n/2 - 1, the depth rule that keeps k-dimensional patch
    subspaces from overlapping trivially. Pass allow_excess_bands=True to
    experiment outside the rule.
    """

    row_start: int
    row_end: int
    col_start: int
    col_end: int
    band_indices: tuple[int, ...]
    allow_excess_bands: bool = False

    def __post_init__(self):
        object.__setattr__(self, "band_indices", tuple(int(b) for b in self.band_indices))
        if not (0 <= self.row_start <= self.row_end):
            raise DataError(f"bad row range [{self.row_start}, {self.row_end}]")
        if not (0 <= self.col_start <= self.col_end):
            raise DataError(f"bad column range [{self.col_start}, {self.col_end}]")
        if not self.band_indices:
            raise DataError("band_indices is empty")
        if len(set(self.band_indices)) != len(self.band_indices):
            raise DataError(f"duplicate band indices in {self.band_indices}")
        if min(self.band_indices) < 0:
            raise DataError(f"negative band index in {self.band_indices}")
        if not self.allow_excess_bands and not self.k < self.n / 2 - 1:
            raise DataError(
                f"band count k={self.k} violates k < n/2 - 1 for patch size n={self.n}; "
                f"use a larger region, fewer bands, or allow_excess_bands"
            )

    @property
    def patch_rows(self) -> int:
        return self.row_end - self.row_start + 1

    @property
    def patch_cols(self) -> int:
        return self.col_end - self.col_start + 1

    @property
    def n(self) -> int:
        return self.patch_rows * self.patch_cols

    @property
    def k(self) -> int:
        return len(self.band_indices)

    def check_against(self, movie: HyperspectralMovie) -> None:
        if self.row_end >= movie.rows:
            raise BoundsError(f"row_end {self.row_end} >= {movie.rows} rows")
        if self.col_end >= movie.cols:
            raise BoundsError(f"col_end {self.col_end} >= {movie.cols} cols")
        if max(self.band_indices) >= movie.bands:
            raise BoundsError(
                f"band index {max(self.band_indices)} >= {movie.bands} bands"
            )


@dataclass(frozen=True)
class PatchMatrix:
    """Vectorized patch: entries[(r - r0)*patch_cols + (c - c0), j] is the
    movie value at spatial (r, c) in band band_indices[j]."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or min(e.shape) < 1:
            raise DataError(f"patch matrix must be 2-d and nonempty, got shape {e.shape}")
        if not np.isfinite(e).all():
            raise DataError("patch matrix contains non-finite entries")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def k(self) -> int:
        return self.entries.shape[1]


def extract_patch(movie: HyperspectralMovie, frame: int, spec: PatchSpec) -> PatchMatrix:
    """Pull one spatial-spectral patch out of one frame as an n x k matrix."""
    if not 0 <= frame < movie.frames:
        raise BoundsError(f"frame {frame} outside 0..{movie.frames - 1}")
    spec.check_against(movie)
    block = movie.values[
        frame,
        spec.row_start : spec.row_end + 1,
        spec.col_start : spec.col_end + 1,
    ][..., list(spec.band_indices)]
    return PatchMatrix(block.astype(np.float64).reshape(spec.n, spec.k))


def patch_series(movie: HyperspectralMovie, spec: PatchSpec) -> list[PatchMatrix]:
    """One patch per frame at a fixed location, in frame order."""
    spec.check_against(movie)
    return [extract_patch(movie, t, spec) for t in range(movie.frames)]


def sliding_window_series(
    movie: HyperspectralMovie,
    frame: int,
    row_start: int,
    row_end: int,
    col_start: int,
    col_end: int,
    window_cols: int,
    stride: int,
    band_indices: Sequence[int],
) -> list[PatchMatrix]:
    """Sweep a fixed-height window across a column range of a single frame.

    Window i covers columns [col_start + i*stride, col_start + i*stride +
    window_cols - 1]; there are floor((col_end - col_start - window_cols + 1)
    / stride) + 1 windows.
    """
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")
    if window_cols < 1:
        raise DataError(f"window_cols must be >= 1, got {window_cols}")
    width = col_end - col_start + 1
    if window_cols > width:
        raise BoundsError(
            f"window of {window_cols} columns does not fit in range "
            f"[{col_start}, {col_end}] ({width} columns)"
        )
    count = (col_end - col_start - window_cols + 1) // stride + 1
    out = []
    for i in range(count):
        c0 = col_start + i * stride
        spec = PatchSpec(row_start, row_end, c0, c0 + window_cols - 1, tuple(band_indices))
        out.append(extract_patch(movie, frame, spec))
    return out


def remove_background(
    movie: HyperspectralMovie, pre_burst: tuple[int, int]
) -> HyperspectralMovie:
    """Subtract the per-pixel per-band temporal mean over the pre-burst frames.

    pre_burst is an inclusive (first, last) frame range declared by the user,
    typically frames known to precede the release.
    """
    first, last = pre_burst
    if not (0 <= first <= last < movie.frames):
        raise BoundsError(
            f"pre-burst range [{first}, {last}] invalid for {movie.frames} frames"
        )
    mean = movie.values[first : last + 1].astype(np.float64).mean(axis=0)
    out = (movie.values.astype(np.float64) - mean[None]).astype(np.float32)
    return HyperspectralMovie(out, movie.wavelengths)
