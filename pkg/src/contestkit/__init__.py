"""Evidence engine for challenging threshold decisions.

Grades decisions on a four-level contestability hierarchy, detects
explanation/intuition conflicts, quantifies predictive multiplicity, and
runs what-if, feature-correction, and overruling-evidence contests.
"""

from .core import (
    Case,
    ContestabilityReport,
    DecisionPolicy,
    FunctionModel,
    GroundTruthOracle,
    Neighborhood,
    Witness,
    classify_contestability,
    decide,
    epistemic_decision,
    somewhere_scan,
)

__version__ = "0.1.0"
