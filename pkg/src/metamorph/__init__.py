"""Robot morphology toolkit: taxonomy reasoning, morphology graphs,
dataset statistics, graph distances, and interchange formats."""

__version__ = "0.1.0"
