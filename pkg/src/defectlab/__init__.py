"""Defect analysis for lattice subshifts of finite type: defect fields, cocycle residues and gaps, tile complexes."""

from . import automaton, cocycles, complexes, defects, fixtures, groups, lattice, symbolic
from .errors import DefectLabError

__all__ = ["automaton", "cocycles", "complexes", "defects", "fixtures", "groups", "lattice", "symbolic", "DefectLabError"]
__version__ = "0.1.0"
