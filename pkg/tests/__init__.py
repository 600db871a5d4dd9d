"""
Test suite for the trademark phonetic feature pipeline.
"""
