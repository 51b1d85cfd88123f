"""genderlens: diagnostics for gender bias in machine translation.

Measures whether models integrate contextual gender cues (minimal pair
accuracy), what they default to without cues (prior bias on a neutralized
set), and where cues are attended internally (layer/head aggregation with
sanity checks).
"""

__version__ = "0.1.0"
