"""
Read and alignment file formats: FASTQ in, SAM out
"""
