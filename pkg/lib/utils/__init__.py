"""
Utility functions for the onionlabel pipeline.

This module provides shared utilities like configuration management and the
error hierarchy with its exit codes.
"""
