"""
Core engine for cfrac-prover: exact algebra, recurrence operators, series
solving, continued fractions, guessing and the proof engine.
"""

__version__ = "0.1.0"
