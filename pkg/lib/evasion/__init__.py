"""
Feature-replacement evasion experiments against trained classifiers.
"""
