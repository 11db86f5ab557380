"""
Service layer for the attack pipeline.

This module contains the perturbed optimizer, LP parameterizations, the
attack engine, the bundled scenarios and report writers.
"""
