"""Toolkit for five-point metric spaces and nonnegative curvature.

Modules: :mod:`~fivepoint.metric` (finite metrics and forms),
:mod:`~fivepoint.comparison` (LSS inequalities, comparison configurations,
tense sets), :mod:`~fivepoint.classify` (tense-triple configurations),
:mod:`~fivepoint.embed` (embedding certificates) and
:mod:`~fivepoint.verify` (independent oracles and samplers).
"""

__version__ = "0.1.0"
