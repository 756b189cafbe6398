"""Single-channel sEMG gait-phase detection pipeline."""

__version__ = "0.1.0"
