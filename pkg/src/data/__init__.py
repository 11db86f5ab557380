"""
Data layer for the attack toolkit.

This module contains data models, input file schemas, and file sources
and writers.
"""
