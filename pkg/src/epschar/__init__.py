"""Exact finite-field verification of generic character sums on GL_n(F_p[eps]/eps^r)."""

__version__ = "0.1.0"
