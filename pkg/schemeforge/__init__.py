# schemeforge/__init__.py

# Scheme selection and multi-scheme solvers for grid-based PDE problems.

__version__ = "1.0.0"
