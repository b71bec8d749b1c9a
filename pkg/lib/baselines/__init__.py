"""
Random-forest baselines: Binary Relevance, Classifier Chains and Label Powerset.
"""
