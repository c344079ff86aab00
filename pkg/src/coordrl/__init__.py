"""Coordination-regularized multi-agent actor-critic learning."""

__version__ = "0.1.0"
