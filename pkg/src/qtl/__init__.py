"""
qtl - quantum thermalization lab
Exact numerics for the emergence of equilibrium in small closed quantum systems.
"""

__version__ = "0.1.0"
