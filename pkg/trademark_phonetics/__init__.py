"""
Trademark phonetic similarity from 2-gram phonetic feature images.

Text is transcribed (Hangul romanization, English to IPA), segmented into
2-grams, mapped to (x, y) points through a symbol dictionary and drawn as a
128x128 intensity image. Pairs of images feed a small CNN or a cosine baseline.
"""
__version__ = "1.0.0"
