"""
SNAP seed aligner
Hash-index seed-and-extend nucleotide read aligner with simulation and evaluation tools
"""

__version__ = "0.1.0"
__author__ = "Genomics Tools Team"
