"""Exact computations with finite Z/p^m[C_(p^n)]-modules and the X_(a,d) family."""

__version__ = "0.1.0"
