"""molcage: guest-driven construction of molecular cages around a substrate."""

__version__ = "0.1.0"

from .core import ChemParams, MolecularGraph, SpatialIndex, validate
from .pathsearch import SearchConfig, construct_paths
from .pipeline import PipelineConfig, assemble, assemble_instance

__all__ = [
    "ChemParams",
    "MolecularGraph",
    "SpatialIndex",
    "validate",
    "SearchConfig",
    "construct_paths",
    "PipelineConfig",
    "assemble",
    "assemble_instance",
    "__version__",
]
