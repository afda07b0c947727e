"""
Configuration and logging helpers shared by all jobs
"""
