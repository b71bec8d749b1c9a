"""
Feature extraction for the onionlabel pipeline.

This module turns per-host session logs (packet timing per flow, Tor
connection records, DNS counters) into the 215-slot feature vector.
"""
