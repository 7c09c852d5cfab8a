"""Spectral tools for convolution-type NLS on the circle.

Subpackages cover band-limited fields, the nonlinearity catalog and its
gradients, split-step propagation with projective fixed-point
continuation, small-divisor scans, Floer-type cylinder boundary value
problems, and decay/energy diagnostics.
"""

__version__ = "0.1.0"
