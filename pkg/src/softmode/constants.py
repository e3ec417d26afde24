"""CODATA 2018 exact/recommended values, SI units."""

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K (exact)
C_LIGHT = 299792458.0  # m / s (exact)
TWO_PI = 6.283185307179586
