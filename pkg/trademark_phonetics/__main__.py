"""Entry point for `python -m trademark_phonetics`."""
import sys

from trademark_phonetics.cli import main

sys.exit(main())
