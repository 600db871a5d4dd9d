"""
End-to-end acceptance suite.
"""
