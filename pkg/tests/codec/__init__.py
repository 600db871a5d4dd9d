"""
Symbol dictionary and tokenizer suite.
"""
