"""
Test suite for the Hidden Confounder Attack toolkit.

This module contains all tests for the solver, perturbed optimizer, attack
engine, scenarios and command-line front end.
"""
