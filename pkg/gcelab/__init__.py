"""gcelab - exterior calculus and hermitian invariants on left-invariant Lie frames"""

__version__ = "0.4.0"
