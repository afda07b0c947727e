"""
Command-line jobs: index, align, simulate, eval, sweep
"""
