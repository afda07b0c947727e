"""
Read simulation with ground truth encoded in read names
"""
