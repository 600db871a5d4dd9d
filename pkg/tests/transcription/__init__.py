"""
Transcription suite.
"""
