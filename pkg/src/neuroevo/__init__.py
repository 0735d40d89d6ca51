"""Neuroevolution of FrozenLake policies with a genetic algorithm."""

__version__ = "0.1.0"
