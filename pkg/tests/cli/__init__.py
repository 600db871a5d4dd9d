"""
Command-line interface suite.
"""
