"""
Alignment: bounded edit distance kernel and the seed-and-extend aligner
"""
