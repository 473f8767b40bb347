"""Multilinear Cesaro averages along cubes for torus transformations."""

__version__ = "0.1.0"

from .dynamics import (
    BoundedSequence,
    Identity,
    Observable,
    Product,
    Rotation,
    SkewProduct2,
    apply,
    commutator_defect,
    iterate,
    iterate_many,
    kronecker_project,
    orbit_sequence,
    vn_sequence,
    weyl_sequence,
)
from .cesaro import (
    CesaroSeries,
    CubeSpec,
    IndexPattern,
    Slot,
    cube_average_2,
    cube_average_3,
    theorem1_series,
    weighted_series,
)
from .wiener_wintner import TwistedSumSpec, WWReport, ww1_defect, ww_sup
from .bounds import lemma1_margin, lemma2_margin, empirical_C
from .recurrence import BoxSet, RecurrenceReport, khintchine2_series, khintchine3_series, threshold_root

__all__ = [name for name in dir() if not name.startswith("_")]
