"""Dimension theory of dynamically defined fractal function graphs.

The package builds three families of fractal curves -- lacunary series
graphs (Weierstrass / Takagi type), Markovian fractal interpolation
functions, and generalized Takagi functions driven by tent maps -- and
computes their dimensions twice: exactly, through Moran / spectral-radius
equations and equilibrium-measure statistics, and empirically, through a
saturation-checked box-counting estimator.  The agreement of the two
routes is the package's main invariant and is what the test suite pins.

The curated names below cover the main workflow; the submodules carry
the full API (``symbolic`` for shift spaces and n-block approximations,
``graphs`` for constructions, ``dimension`` for the exact formulas,
``measures`` for equilibrium statistics, ``tentmap`` for the tent-map
family, ``boxcount`` for the estimator, ``config``/``cli`` for the
command-line front end).
"""

from .boxcount import BoxDimResult, box_dimension, grid_count
from .config import SystemConfig, load_config
from .dimension import DimensionReport, moran_solve, spectral_radius, theoretical_box_dim
from .errors import DiagnosticsFailed, InvalidConfig, PreconditionFailed
from .graphs import (
    DataSet,
    MarkovFif,
    SeriesSpec,
    eval_series,
    fif_system,
    graph_eval,
    markov_fif_system,
    sample_graph,
    series_samples,
)
from .measures import equilibrium_markov, ergodic_stats, ly_dimension
from .symbolic import Sft, admissible_words
from .tentmap import (
    TentSystem,
    detect_markov,
    entropy_estimate,
    golden_ratio,
    markov_dim,
    takagi_beta_eval,
)

__version__ = "0.1.0"

__all__ = [
    "BoxDimResult",
    "DataSet",
    "DiagnosticsFailed",
    "DimensionReport",
    "InvalidConfig",
    "MarkovFif",
    "PreconditionFailed",
    "SeriesSpec",
    "Sft",
    "SystemConfig",
    "TentSystem",
    "admissible_words",
    "box_dimension",
    "detect_markov",
    "entropy_estimate",
    "equilibrium_markov",
    "ergodic_stats",
    "eval_series",
    "fif_system",
    "golden_ratio",
    "graph_eval",
    "grid_count",
    "load_config",
    "ly_dimension",
    "markov_dim",
    "markov_fif_system",
    "moran_solve",
    "sample_graph",
    "series_samples",
    "spectral_radius",
    "takagi_beta_eval",
    "theoretical_box_dim",
]
