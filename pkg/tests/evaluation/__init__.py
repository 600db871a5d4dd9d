"""
Dataset, synthetic pair and scoring suite.
"""
