"""
Pair tensor suite.
"""
