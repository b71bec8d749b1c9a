"""
CLI tools for onionlabel.

This module provides command-line interfaces for data generation, featurization,
training, evaluation, explanation, evasion experiments and report collation.
"""
