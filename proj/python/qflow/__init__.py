"""Analytic matter-wave interference models and Bohmian trajectory analysis.

Thin python layer over the C++ core: closed-form wave models, hydrodynamic
fields, trajectory ensembles, carpets, momentum ladders, fractal-dimension
estimation, the effective-well toy model, and the scenario runner.
"""

from ._qflow import *  # noqa: F401,F403
from ._qflow import __version__  # noqa: F401
