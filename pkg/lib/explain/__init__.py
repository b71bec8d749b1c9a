"""
Shapley attributions, global importance and plot-data exports.
"""
