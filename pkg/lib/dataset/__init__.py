"""
Dataset functionality for the onionlabel pipeline.

This module provides the feature schema, label sets, immutable datasets,
feature CSV I/O and the order statistics used across the pipeline.
"""
