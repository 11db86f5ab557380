"""
Hidden Confounder Attacks - Main Package

Structural causal models, a simplex solver, a perturbed optimizer and the
attack engine that skews LP solutions through hidden confounders.
"""

__version__ = "1.0.0"
__author__ = "HCA Toolkit Team"
