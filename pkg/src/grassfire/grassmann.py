"""Subspace embedding and principal-angle distances on G(k, n).

A point on the Grassmannian is held as an n x k matrix with orthonormal
columns; the matrix is one representative of the equivalence class under
right-multiplication by k x k orthogonal matrices, and every distance here
is invariant under that choice.

Numerical conventions, applied consistently:
  * cross-Gram singular values are clamped to [0, 1] before arccos, so a
    value like 1 + 1e-15 never produces NaN;
  * angles below ANGLE_FLOOR are truncated to exactly 0; arccos near 1 has
    an intrinsic noise floor of sqrt(machine epsilon), about 1.5e-8, so the
    floor sits above it and identical subspaces get exact zeros, keeping
    pseudo-distance merges and barcode births stable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cube import PatchMatrix
from .errors import DataError, DegeneratePatchError, FormatError

ORTHO_TOL = 1e-10
RANK_TOL = 1e-10
ANGLE_FLOOR = 1e-7


@dataclass(frozen=True)
class GrassmannPoint:
    """An n x k orthonormal-column matrix representing a k-subspace of R^n."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64)
        if b.ndim != 2:
            raise DataError(f"basis must be a matrix, got {b.ndim} axes")
        n, k = b.shape
        if k > n:
            raise DataError(f"basis is {n}x{k}; need k <= n")
        gram = b.T @ b
        dev = np.abs(gram - np.eye(k)).max()
        if not dev < ORTHO_TOL:
            raise DataError(f"basis columns not orthonormal (max deviation {dev:.2e})")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class PrincipalAngles:
    """Canonical angles between two k-subspaces, ascending, in [0, pi/2]."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise DataError("angles must be a nonempty vector")
        if not (np.diff(a) >= 0).all():
            raise DataError("angles must be sorted ascending")
        if a[0] < -1e-12 or a[-1] > np.pi / 2 + 1e-12:
            raise DataError("angles outside [0, pi/2]")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)


class SubspaceMetric(enum.Enum):
    """Distance functions of the principal angles theta_1..theta_k."""

    MIN_ANGLE = "min_angle"          # theta_1 (a pseudodistance)
    CHORDAL = "chordal"              # sqrt(sum sin^2 theta_i)
    GEODESIC = "geodesic"            # sqrt(sum theta_i^2)
    FUBINI_STUDY = "fubini_study"    # arccos(prod cos theta_i)

    @classmethod
    def parse(cls, name: str) -> "SubspaceMetric":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise DataError(f"unknown metric {name!r}; expected one of: {valid}") from None


def embed(patch: PatchMatrix | np.ndarray, rank_tol: float = RANK_TOL) -> GrassmannPoint:
    """Map an n x k patch matrix to the point spanned by its columns.

    Uses the left factor of the thin SVD as the orthonormal representative.
    Raises DegeneratePatchError when the smallest singular value is at or
    below rank_tol times the largest: the patch is spatially constant or its
    bands are linearly dependent, so it has no well-defined k-subspace.
    """
    x = patch.entries if isinstance(patch, PatchMatrix) else np.asarray(patch, np.float64)
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s[-1] <= rank_tol * s[0]:
        raise DegeneratePatchError(
            f"patch is numerically rank-deficient: sigma_min/sigma_max = "
            f"{s[-1]:.3e}/{s[0]:.3e}"
        )
    return GrassmannPoint(u)


def principal_angles(y1: GrassmannPoint, y2: GrassmannPoint) -> PrincipalAngles:
    """Angles from the singular values of the cross-Gram matrix Y1^T Y2."""
    _check_compatible(y1, y2)
    sigma = np.linalg.svd(y1.basis.T @ y2.basis, compute_uv=False)
    return PrincipalAngles(_angles_from_sigma(sigma))


def _check_compatible(y1: GrassmannPoint, y2: GrassmannPoint) -> None:
    if y1.n != y2.n or y1.k != y2.k:
        raise DataError(
            f"dimension mismatch: G({y1.k},{y1.n}) vs G({y2.k},{y2.n})"
        )


def _angles_from_sigma(sigma: np.ndarray) -> np.ndarray:
    theta = np.arccos(np.clip(sigma, 0.0, 1.0))
    theta[theta < ANGLE_FLOOR] = 0.0
    return np.sort(theta)


def metric_value(angles: PrincipalAngles | np.ndarray, metric: SubspaceMetric) -> float:
    """Evaluate one subspace metric on a sorted angle vector."""
    th = angles.angles if isinstance(angles, PrincipalAngles) else np.asarray(angles)
    if metric is SubspaceMetric.MIN_ANGLE:
        return float(th[0])
    if metric is SubspaceMetric.CHORDAL:
        return float(np.sqrt(np.sum(np.sin(th) ** 2)))
    if metric is SubspaceMetric.GEODESIC:
        return float(np.sqrt(np.sum(th**2)))
    if metric is SubspaceMetric.FUBINI_STUDY:
        return float(np.arccos(np.clip(np.prod(np.cos(th)), 0.0, 1.0)))
    raise DataError(f"unhandled metric {metric}")


def distance(y1: GrassmannPoint, y2: GrassmannPoint, metric: SubspaceMetric) -> float:
    """Subspace distance between two points under the chosen metric.

    MIN_ANGLE is a pseudodistance: it is 0 whenever the subspaces share a
    direction, even if they are distinct.
    """
    return metric_value(principal_angles(y1, y2), metric)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative matrix of pairwise subspace distances."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise DataError(f"distance matrix must be square, got shape {e.shape}")
        if not np.isfinite(e).all():
            raise DataError("distance matrix contains non-finite entries")
        if np.abs(e - e.T).max() > 1e-12:
            raise DataError("distance matrix asymmetric beyond 1e-12")
        if np.abs(np.diag(e)).max() > 1e-12:
            raise DataError("distance matrix diagonal not zero")
        if e.min() < 0:
            raise DataError("distance matrix has negative entries")
        e = e.copy()
        np.fill_diagonal(e, 0.0)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def distance_matrix(
    points: Sequence[GrassmannPoint],
    metric: SubspaceMetric,
    chunk: int = 8192,
) -> DistanceMatrix:
    """All pairwise distances for a sequence of points sharing (n, k).

    Pairs are independent, so the computation is batched: cross-Gram
    matrices for a block of pairs at a time, one batched SVD per block.
    The result is exactly symmetric by construction.
    """
    if len(points) < 1:
        raise DataError("need at least one point")
    n, k = points[0].n, points[0].k
    for p in points[1:]:
        if p.n != n or p.k != k:
            raise DataError(
                f"heterogeneous points: G({k},{n}) vs G({p.k},{p.n})"
            )
    m = len(points)
    bases = np.stack([p.basis for p in points])
    out = np.zeros((m, m), dtype=np.float64)
    iu, ju = np.triu_indices(m, 1)
    for lo in range(0, len(iu), chunk):
        bi = bases[iu[lo : lo + chunk]]
        bj = bases[ju[lo : lo + chunk]]
        grams = np.einsum("pnk,pnl->pkl", bi, bj)
        sigma = np.linalg.svd(grams, compute_uv=False)
        theta = np.arccos(np.clip(sigma, 0.0, 1.0))
        theta[theta < ANGLE_FLOOR] = 0.0
        theta = np.sort(theta, axis=1)
        if metric is SubspaceMetric.MIN_ANGLE:
            vals = theta[:, 0]
        elif metric is SubspaceMetric.CHORDAL:
            vals = np.sqrt((np.sin(theta) ** 2).sum(axis=1))
        elif metric is SubspaceMetric.GEODESIC:
            vals = np.sqrt((theta**2).sum(axis=1))
        else:
            vals = np.arccos(np.clip(np.cos(theta).prod(axis=1), 0.0, 1.0))
        out[iu[lo : lo + chunk], ju[lo : lo + chunk]] = vals
        out[ju[lo : lo + chunk], iu[lo : lo + chunk]] = vals
    return DistanceMatrix(out)


def write_distance_matrix(d: DistanceMatrix, path: str | Path) -> None:
    """CSV with 17 significant digits per entry, enough to round-trip f64."""
    with open(path, "w") as fh:
        for row in d.entries:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def read_distance_matrix(path: str | Path, asym_tol: float = 1e-9) -> DistanceMatrix:
    """Parse a distance-matrix CSV, tolerating asymmetry up to asym_tol.

    Matrices within tolerance are symmetrized by averaging so downstream
    code sees an exactly symmetric matrix.
    """
    path = Path(path)
    rows = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: empty distance matrix")
    width = len(rows[0])
    for ix, row in enumerate(rows, start=1):
        if len(row) != width:
            raise FormatError(f"{path}:{ix}: expected {width} values, got {len(row)}")
    e = np.asarray(rows, dtype=np.float64)
    if e.shape[0] != e.shape[1]:
        raise FormatError(f"{path}: matrix is {e.shape[0]}x{e.shape[1]}, not square")
    if not np.isfinite(e).all():
        raise DataError(f"{path}: non-finite entries")
    asym = np.abs(e - e.T).max()
    if asym > asym_tol:
        raise DataError(f"{path}: asymmetric beyond {asym_tol:g} (max deviation {asym:.3e})")
    sym = (e + e.T) / 2.0
    np.fill_diagonal(sym, 0.0)
    return DistanceMatrix(sym)
