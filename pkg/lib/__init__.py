"""
Shared library for the onionlabel pipeline.

This library contains the data model, feature extraction, classifiers,
metrics, explanations and evasion experiments shared by the CLI tools.
"""

__version__ = "1.0.0"
