"""
CNN and checkpoint suite.
"""
