"""Kernel-smoothed multiscaling limit fields of fractional Riesz-Bessel equations."""

__version__ = "0.1.0"
