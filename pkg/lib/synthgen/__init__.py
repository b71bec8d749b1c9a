"""
Synthetic data generation for the onionlabel pipeline.

This module provides class profiles, the default D5-like generator config and
the seeded Gaussian sample generator.
"""
