"""
Seed index: overlapping-window hash index over the reference, both strands
"""
