"""
Accuracy evaluation: scoring against truth, exhaustive oracle, experiment sweeps
"""
