"""Fractional Brownian motion local times: simulation, estimation and checks."""

__version__ = "0.1.0"
