"""Exact simulation of the D(S3) quantum double on small open qudit lattices."""
__version__ = '0.1.0'
