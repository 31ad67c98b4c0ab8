# symbench/core/__init__.py

"""Simulation core: states, channels, designs, the benchmarking engine and fits."""

from symbench.core.protocol import BenchmarkEngine, DecayCurve, ExperimentSpec

__all__ = ["BenchmarkEngine", "DecayCurve", "ExperimentSpec"]
