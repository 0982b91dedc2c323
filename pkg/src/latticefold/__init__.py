"""Desk-scale fuel-assembly design loop.

Lattice codec, two-group diffusion evaluator, composite fitness, and
three design-search strategies (fixed-inventory GA, randomized
octant-symmetric sampling, online preference-optimized policy) compared
under identical evaluation budgets.
"""

__version__ = "0.1.0"
