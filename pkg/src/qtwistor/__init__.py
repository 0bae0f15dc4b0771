"""Numerical differential geometry of almost quaternionic manifolds and their twistor spaces."""

from .calculus import Chart, Field
from .connect import Connection, MetricField, levi_civita, with_skew_torsion
from .errors import QTwistorError, SceneError
from .expr import parse_expression
from .quat import AdmissibleBasis
from .report import CheckReport
from .scene import Scene, load_preset, load_scene
from .twistor import TwistorStructure

__version__ = "0.1.0"

__all__ = [
    "AdmissibleBasis", "Chart", "CheckReport", "Connection", "Field", "MetricField", "QTwistorError",
    "Scene", "SceneError", "TwistorStructure", "levi_civita", "load_preset", "load_scene",
    "parse_expression", "with_skew_torsion", "__version__",
]
