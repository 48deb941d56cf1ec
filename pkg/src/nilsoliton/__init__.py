"""Nilsoliton metrics, moment-map strata and degenerations of nilpotent Lie brackets."""

__version__ = "0.1.0"

from .algebra_core import Bracket, act, validate
from .bracket_dsl import parse, render
from .curvature import nilsoliton_check, ricci
from .families import certificate, mu, mu_bar, mu_tilde

__all__ = ["Bracket", "act", "validate", "parse", "render", "ricci", "nilsoliton_check",
           "certificate", "mu", "mu_tilde", "mu_bar", "__version__"]
