"""Imaginary quadratic fields whose class group has small exponent."""

__version__ = "0.1.0"
