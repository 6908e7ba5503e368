"""Periodic ring detection in image sequences via cubical persistent homology."""

from .cubical import (PersistenceDiagram, PersistencePair, build_filtration,
                      compute_persistence, max_persistence)
from .grid_io import FrameStack, Grid, load_stack
from .pipeline import DetectionReport, PipelineConfig, run, threshold_sweep
from .synth import SynthParams, generate

__version__ = "0.1.0"
