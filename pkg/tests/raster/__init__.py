"""
Rasterizer suite.
"""
