"""Simulation and cohesion-bound analysis for nonreciprocal aggregating swarms."""

__version__ = "0.1.0"
