"""
Reference genome model: FASTA ingestion, packed sequence, contig coordinates
"""
