"""
Multi-label evaluation metrics and report tables.
"""
