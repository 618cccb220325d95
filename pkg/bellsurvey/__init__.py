"""
Numerical laboratory for full-correlation Bell inequalities on random states.
"""

__version__ = "1.0.0"
