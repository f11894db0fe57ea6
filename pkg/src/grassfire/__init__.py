"""Grassmannian embedding and persistent homology for hyperspectral movies.

Set GRASSFIRE_THREADS before launching to cap internal (BLAS) parallelism;
it must be read before numpy initializes its thread pools, which is why it
is handled here at package import.
"""

import os as _os

if "GRASSFIRE_THREADS" in _os.environ:
    _cap = _os.environ["GRASSFIRE_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _cap)

__version__ = "0.1.0"

from .cube import (
    HyperspectralMovie,
    PatchMatrix,
    PatchSpec,
    extract_patch,
    load_movie,
    patch_series,
    remove_background,
    save_movie,
    sliding_window_series,
)
from .detection import (
    BackgroundModel,
    TargetSignature,
    ace_map,
    ace_score,
    fit_background,
    read_signature,
    write_signature,
)
from .errors import (
    BoundsError,
    CapacityError,
    ConfigError,
    DataError,
    DegeneratePatchError,
    FormatError,
    GrassfireError,
    NumericalError,
    SingularModelError,
    UndefinedScoreError,
)
from .grassmann import (
    DistanceMatrix,
    GrassmannPoint,
    PrincipalAngles,
    SubspaceMetric,
    distance,
    distance_matrix,
    embed,
    metric_value,
    principal_angles,
    read_distance_matrix,
    write_distance_matrix,
)
from .persistence import (
    Barcode,
    ComponentPartition,
    PersistenceInterval,
    betti_at,
    components_at,
    read_barcode,
    rips_barcode,
    rips_h0,
    rips_h1,
    write_barcode,
)
from .synth import PlumeScenario, generate, scenario_from_mapping

__all__ = [
    "HyperspectralMovie", "PatchMatrix", "PatchSpec",
    "extract_patch", "load_movie", "patch_series", "remove_background",
    "save_movie", "sliding_window_series",
    "BackgroundModel", "TargetSignature", "ace_map", "ace_score",
    "fit_background", "read_signature", "write_signature",
    "GrassmannPoint", "PrincipalAngles", "SubspaceMetric", "DistanceMatrix",
    "distance", "distance_matrix", "embed", "metric_value", "principal_angles",
    "read_distance_matrix", "write_distance_matrix",
    "Barcode", "ComponentPartition", "PersistenceInterval",
    "betti_at", "components_at", "read_barcode", "rips_barcode",
    "rips_h0", "rips_h1", "write_barcode",
    "PlumeScenario", "generate", "scenario_from_mapping",
    "GrassfireError", "ConfigError", "DataError", "FormatError", "BoundsError",
    "NumericalError", "DegeneratePatchError", "SingularModelError",
    "UndefinedScoreError", "CapacityError",
]
